//! Committer aggregation and keyword-based bot flagging.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::classify::Pattern;
use crate::diff::CommitHeader;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CommitterIdentity {
    pub name: String,
    pub email: String,
    pub commit_count: u64,
    pub is_bot: bool,
    pub match_reason: Option<String>,
}

/// Which identity of a commit is attributed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum IdentityRole {
    #[default]
    Committer,
    Author,
}

impl IdentityRole {
    pub fn of(self, header: &CommitHeader) -> (&str, &str) {
        match self {
            IdentityRole::Committer => (&header.committer_name, &header.committer_email),
            IdentityRole::Author => (&header.author_name, &header.author_email),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BotConfig {
    pub keywords: Vec<String>,
    pub allowlist: Vec<String>,
    pub denylist: Vec<String>,
}

impl Default for BotConfig {
    fn default() -> Self {
        BotConfig {
            keywords: vec!["bot".into(), "auto".into()],
            allowlist: vec!["Drobotov".into()],
            denylist: Vec::new(),
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum BotConfigError {
    #[error("bot config line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("reading bot config: {0}")]
    Io(#[from] std::io::Error),
}

impl BotConfig {
    /// Parses the line-oriented config format:
    ///
    /// ```text
    /// # comment
    /// keywords = bot, auto, release-train
    /// allow = Drobotov, ci-robotics@example.org
    /// deny = Release Manager
    /// ```
    ///
    /// `keywords` replaces the default keyword list; `allow` and `deny` add
    /// to the defaults. Repeated keys accumulate.
    pub fn parse(text: &str) -> Result<Self, BotConfigError> {
        let mut config = BotConfig::default();
        let mut keywords_seen = false;
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let syntax = |message: String| BotConfigError::Syntax {
                line: idx + 1,
                message,
            };
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| syntax("expected `key = value`".into()))?;
            let values = value
                .split(',')
                .map(str::trim)
                .filter(|v| !v.is_empty())
                .map(String::from);
            match key.trim().to_ascii_lowercase().as_str() {
                "keywords" | "keyword" => {
                    if !keywords_seen {
                        config.keywords.clear();
                        keywords_seen = true;
                    }
                    config.keywords.extend(values);
                }
                "allow" | "allowlist" => config.allowlist.extend(values),
                "deny" | "denylist" => config.denylist.extend(values),
                other => return Err(syntax(format!("unknown key {other:?}"))),
            }
        }
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self, BotConfigError> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    fn listed(list: &[String], name: &str, email: &str) -> bool {
        let (name, email) = (name.to_lowercase(), email.to_lowercase());
        list.iter().any(|entry| {
            let entry = entry.to_lowercase();
            entry == name || entry == email
        })
    }
}

/// Groups commits by exact (name, email), in order of first appearance.
pub fn aggregate_committers<'a, I>(headers: I, role: IdentityRole) -> Vec<CommitterIdentity>
where
    I: IntoIterator<Item = &'a CommitHeader>,
{
    let mut index: HashMap<(String, String), usize> = HashMap::new();
    let mut out: Vec<CommitterIdentity> = Vec::new();
    for header in headers {
        let (name, email) = role.of(header);
        let key = (name.to_string(), email.to_string());
        match index.get(&key) {
            Some(&i) => out[i].commit_count += 1,
            None => {
                index.insert(key, out.len());
                out.push(CommitterIdentity {
                    name: name.to_string(),
                    email: email.to_string(),
                    commit_count: 1,
                    is_bot: false,
                    match_reason: None,
                });
            }
        }
    }
    out
}

/// Verdict and reason for a single name/email pair.
pub fn bot_verdict(name: &str, email: &str, config: &BotConfig) -> (bool, Option<String>) {
    if BotConfig::listed(&config.denylist, name, email) {
        return (true, Some("denylist".to_string()));
    }
    let local = email.split('@').next().unwrap_or(email).to_lowercase();
    let name_lower = name.to_lowercase();
    let hit = config.keywords.iter().find_map(|k| {
        let k = k.to_lowercase();
        if name_lower.contains(&k) {
            Some(format!("name contains \"{k}\""))
        } else if local.contains(&k) {
            Some(format!("email contains \"{k}\""))
        } else {
            None
        }
    });
    match hit {
        Some(_) if BotConfig::listed(&config.allowlist, name, email) => {
            (false, Some("allowlist".to_string()))
        }
        Some(reason) => (true, Some(reason)),
        None => (false, None),
    }
}

pub fn flag_bot(identity: CommitterIdentity, config: &BotConfig) -> CommitterIdentity {
    let (is_bot, match_reason) = bot_verdict(&identity.name, &identity.email, config);
    CommitterIdentity {
        is_bot,
        match_reason,
        ..identity
    }
}

/// One attributed edit of a hotspot line.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabeledCommit {
    pub pattern: Pattern,
    pub commit: String,
    pub is_bot: bool,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct ShareRow {
    pub bot_commits: u64,
    pub human_commits: u64,
    pub ratio: f64,
    pub bot_line_edits: u64,
    pub human_line_edits: u64,
    pub line_edit_ratio: f64,
}

impl ShareRow {
    fn finish(mut self) -> Self {
        let total = self.bot_commits + self.human_commits;
        self.ratio = if total == 0 {
            0.0
        } else {
            self.bot_commits as f64 / total as f64
        };
        let edits = self.bot_line_edits + self.human_line_edits;
        self.line_edit_ratio = if edits == 0 {
            0.0
        } else {
            self.bot_line_edits as f64 / edits as f64
        };
        self
    }

    pub fn total_commits(&self) -> u64 {
        self.bot_commits + self.human_commits
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct BotShare {
    pub overall: ShareRow,
    pub per_pattern: BTreeMap<Pattern, ShareRow>,
}

/// Bot share of distinct commits overall and per label. Every entry also
/// counts as one line edit for the edit-weighted columns.
pub fn bot_share(labeled: &[LabeledCommit]) -> BotShare {
    let mut share = BotShare::default();
    let mut seen: HashSet<&str> = HashSet::new();
    let mut seen_pattern: HashSet<(Pattern, &str)> = HashSet::new();
    for entry in labeled {
        let row = share.per_pattern.entry(entry.pattern).or_default();
        let (commits, edits) = if entry.is_bot {
            (&mut row.bot_commits, &mut row.bot_line_edits)
        } else {
            (&mut row.human_commits, &mut row.human_line_edits)
        };
        *edits += 1;
        if seen_pattern.insert((entry.pattern, &entry.commit)) {
            *commits += 1;
        }
        let o = &mut share.overall;
        if entry.is_bot {
            o.bot_line_edits += 1;
        } else {
            o.human_line_edits += 1;
        }
        if seen.insert(&entry.commit) {
            if entry.is_bot {
                o.bot_commits += 1;
            } else {
                o.human_commits += 1;
            }
        }
    }
    share.overall = share.overall.finish();
    for row in share.per_pattern.values_mut() {
        *row = row.finish();
    }
    share
}

#[cfg(test)]
mod tests {
    use super::*;

    fn header(name: &str, email: &str) -> CommitHeader {
        CommitHeader {
            hash: "0".into(),
            committer_timestamp: 1,
            author_name: name.into(),
            author_email: email.into(),
            committer_name: name.into(),
            committer_email: email.into(),
        }
    }

    #[test]
    fn grouping_by_exact_pair() {
        let hs = vec![
            header("Ada", "ada@x"),
            header("Ada", "ada@x"),
            header("Bot", "b@x"),
            header("Ada", "ada@x"),
            header("Ada", "ada@y"),
        ];
        let ids = aggregate_committers(&hs, IdentityRole::Committer);
        let counts: Vec<_> = ids
            .iter()
            .map(|i| (i.name.as_str(), i.email.as_str(), i.commit_count))
            .collect();
        assert_eq!(
            counts,
            vec![("Ada", "ada@x", 3), ("Bot", "b@x", 1), ("Ada", "ada@y", 1)]
        );
        assert!(aggregate_committers(&[], IdentityRole::Committer).is_empty());
    }

    #[test]
    fn known_bot_names() {
        let cfg = BotConfig::default();
        for name in [
            "skia-flutter-autoroll",
            "vercel-release-bot",
            "Electron Bot",
            "dependabot[bot]",
            "jenkins-x-bot",
            "github-actions[bot]",
            "Sudowoodo Release Bot",
            "Confluent Jenkins Bot",
            "Protobuf Team Bot",
            "Netty Project Bot",
        ] {
            assert!(bot_verdict(name, "x@example.com", &cfg).0, "{name}");
        }
        assert_eq!(
            bot_verdict("skia-flutter-autoroll", "", &cfg).1.as_deref(),
            Some("name contains \"auto\"")
        );
    }

    #[test]
    fn allowlist_and_denylist() {
        let cfg = BotConfig::default();
        assert_eq!(
            bot_verdict("Drobotov", "d@x", &cfg),
            (false, Some("allowlist".into()))
        );
        assert!(!bot_verdict("DROBOTOV", "d@x", &cfg).0);
        let cfg = BotConfig::parse("deny = Release Manager\nallow = ci-robot@x.org").unwrap();
        assert!(bot_verdict("release manager", "rm@x", &cfg).0);
        assert!(!bot_verdict("CI", "ci-robot@x.org", &cfg).0);
        assert!(
            !bot_verdict("Ada", "ada@robotics.example", &cfg).0,
            "domain is not matched"
        );
        assert!(bot_verdict("Ada", "autobuild@x", &cfg).0);
    }

    #[test]
    fn config_parsing() {
        let cfg = BotConfig::parse("# c\nkeywords = robot\nkeywords = ci-\n").unwrap();
        assert_eq!(cfg.keywords, vec!["robot", "ci-"]);
        assert_eq!(cfg.allowlist, vec!["Drobotov"]);
        assert!(BotConfig::parse("nonsense").is_err());
        assert!(BotConfig::parse("colour = red").is_err());
    }

    fn labeled(pattern: Pattern, commit: usize, is_bot: bool) -> LabeledCommit {
        LabeledCommit {
            pattern,
            commit: format!("{commit:040x}"),
            is_bot,
        }
    }

    #[test]
    fn shares() {
        let entries: Vec<_> = (0..1000)
            .map(|i| labeled(Pattern::PinnedVersionBump, i, i < 739))
            .collect();
        assert!((bot_share(&entries).overall.ratio - 0.739).abs() < 1e-12);

        let entries: Vec<_> = (0..20)
            .map(|i| labeled(Pattern::MetadataChange, i, i != 0))
            .collect();
        let share = bot_share(&entries);
        assert!((share.per_pattern[&Pattern::MetadataChange].ratio - 0.95).abs() < 1e-12);

        let humans: Vec<_> = (0..10)
            .map(|i| labeled(Pattern::LongLineChange, i, false))
            .collect();
        let share = bot_share(&humans);
        assert_eq!(share.overall.ratio, 0.0);
        assert!(share.per_pattern.values().all(|r| r.ratio == 0.0));
        assert!(!share.per_pattern.contains_key(&Pattern::MetadataChange));
    }

    #[test]
    fn commits_counted_once_edits_every_time() {
        let entries = vec![
            labeled(Pattern::MetadataChange, 1, true),
            labeled(Pattern::MetadataChange, 1, true),
            labeled(Pattern::PathUpdate, 1, true),
            labeled(Pattern::PathUpdate, 2, false),
        ];
        let share = bot_share(&entries);
        assert_eq!(
            (share.overall.bot_commits, share.overall.human_commits),
            (1, 1)
        );
        assert_eq!(
            (share.overall.bot_line_edits, share.overall.human_line_edits),
            (3, 1)
        );
        assert_eq!(share.per_pattern[&Pattern::MetadataChange].bot_commits, 1);
        assert_eq!(share.per_pattern[&Pattern::PathUpdate].total_commits(), 2);
    }
}
