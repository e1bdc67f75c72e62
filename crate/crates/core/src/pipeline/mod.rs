//! End-to-end analysis of one repository: file churn, per-file line
//! tracking of hotspot files, classification, bot attribution and reports.

pub mod git;
mod output;
mod overrides;

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::path::{Path, PathBuf};

use chrono::{DateTime, Utc};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::bots::{
    aggregate_committers, bot_share, bot_verdict, flag_bot, BotConfig, BotShare, CommitterIdentity,
    IdentityRole, LabeledCommit,
};
use crate::churn::{
    detect_hotspot_files, file_churn, hotspot_line_indices, lifespan_days, CategoryTable,
    ChurnError, CommitCounter, FileCategory, FileChurn, HotspotThresholds,
};
use crate::classify::{classify_history, ClassifierConfig, Pattern, PatternLabel};
use crate::diff::{parse_log_stream, CommitHeader, LogEvent, ParseError};
use crate::track::{FileCounters, HistoryReplay, LineReport, ReplayStats};

pub use git::Git;
pub use output::{emit_reports, escape_path};
pub use overrides::{read_label_file, LabelFileError, LabelOverrides, LabelRow};

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct FileSample {
    pub count: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, Serialize)]
pub struct AnalysisConfig {
    pub repo_path: PathBuf,
    pub output_dir: PathBuf,
    pub thresholds: HotspotThresholds,
    pub classifier: ClassifierConfig,
    pub bot_config: BotConfig,
    pub identity: IdentityRole,
    pub worker_count: usize,
    pub file_sample: Option<FileSample>,
    pub emit_plot_data: bool,
    pub labels_override: Option<PathBuf>,
    pub category_table: Option<PathBuf>,
    pub git_program: PathBuf,
}

impl AnalysisConfig {
    pub fn new(repo_path: impl Into<PathBuf>, output_dir: impl Into<PathBuf>) -> Self {
        AnalysisConfig {
            repo_path: repo_path.into(),
            output_dir: output_dir.into(),
            thresholds: HotspotThresholds::default(),
            classifier: ClassifierConfig::default(),
            bot_config: BotConfig::default(),
            identity: IdentityRole::Committer,
            worker_count: std::thread::available_parallelism().map_or(1, |n| n.get()),
            file_sample: None,
            emit_plot_data: false,
            labels_override: None,
            category_table: None,
            git_program: PathBuf::from("git"),
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum PipelineError {
    #[error("no git repository at {0}")]
    RepoNotFound(PathBuf),
    #[error("repository {0} has no commits")]
    EmptyRepository(PathBuf),
    #[error("git executable {0:?} not found")]
    GitUnavailable(String),
    #[error("{command} failed: {message}")]
    Git { command: String, message: String },
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Churn(#[from] ChurnError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

/// One selected hotspot line with its label and the commits that edited it.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HotspotLine {
    pub line_number: usize,
    pub mod_count: usize,
    pub lifespan_days: f64,
    pub label: PatternLabel,
    /// False once a human label from an override file replaced the heuristic.
    pub heuristic: bool,
    pub oscillation: bool,
    pub diagnostics: BTreeSet<Pattern>,
    /// Hashes of the modifying commits, birth excluded.
    pub modifications: Vec<String>,
}

#[derive(Debug, Clone, Default)]
pub struct FileAnalysis {
    pub path: String,
    pub category: Option<FileCategory>,
    pub reports: Vec<LineReport>,
    pub hotspots: Vec<HotspotLine>,
    pub failure: Option<String>,
    pub binary: bool,
    pub stats: ReplayStats,
    pub counters: FileCounters,
    /// Headers of the commits referenced by `hotspots`.
    pub commits: BTreeMap<String, CommitHeader>,
}

/// Replays one file's patch history (including its earlier names) and
/// selects, classifies and reports its hotspot lines.
pub fn analyze_file<I>(
    path: &str,
    aliases: &[String],
    category: FileCategory,
    events: I,
    thresholds: &HotspotThresholds,
    classifier: &ClassifierConfig,
) -> Result<FileAnalysis, ParseError>
where
    I: IntoIterator<Item = Result<LogEvent, ParseError>>,
{
    let targets = aliases.iter().cloned().chain([path.to_string()]);
    let replay = HistoryReplay::with_targets(targets).replay(events)?;
    let mut out = FileAnalysis {
        path: path.to_string(),
        category: Some(category),
        stats: replay.stats().clone(),
        ..FileAnalysis::default()
    };
    if let Some(err) = replay.failures().get(path) {
        out.failure = Some(err.to_string());
        return Ok(out);
    }
    let Some(state) = replay.file(path) else {
        out.binary = out.stats.binary_skips > 0;
        return Ok(out);
    };
    out.counters = state.counters.clone();
    out.reports = state.finalize();

    let mut wanted: BTreeSet<&str> = BTreeSet::new();
    for i in hotspot_line_indices(&state.file_lines, thresholds) {
        let line = &state.file_lines[i];
        let Ok(c) = classify_history(line, category, path, classifier) else {
            continue;
        };
        let modifications: Vec<String> = line.history[1..]
            .iter()
            .map(|r| r.commit.to_string())
            .collect();
        out.hotspots.push(HotspotLine {
            line_number: i + 1,
            mod_count: line.mod_count(),
            lifespan_days: lifespan_days(line),
            label: c.label,
            heuristic: true,
            oscillation: c.oscillation,
            diagnostics: c.diagnostics,
            modifications,
        });
    }
    for h in &out.hotspots {
        wanted.extend(h.modifications.iter().map(String::as_str));
    }
    out.commits = replay
        .commits()
        .iter()
        .filter(|c| wanted.contains(c.hash.as_str()))
        .map(|c| (c.hash.clone(), c.clone()))
        .collect();
    Ok(out)
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct StageCounts {
    pub commits: u64,
    pub files_at_head: usize,
    pub dual_filter_files: usize,
    pub files_line_tracked: usize,
    pub files_failed: usize,
    pub binary_files_skipped: usize,
    pub hunks_replayed: u64,
    pub overlap_skips: u64,
    pub content_mismatches: u64,
    pub hotspot_bearing_files: usize,
    pub hotspot_lines: usize,
    pub hotspot_commits: usize,
    pub committers: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct FileFailure {
    pub path: String,
    pub error: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub tool_version: String,
    pub git_version: String,
    pub config: AnalysisConfig,
    pub repo_head: String,
    pub started_at: DateTime<Utc>,
    pub finished_at: DateTime<Utc>,
    pub lifetime_months: f64,
    pub churn_mean: Option<f64>,
    pub churn_stddev: Option<f64>,
    pub stages: StageCounts,
    pub failures: Vec<FileFailure>,
    pub warnings: Vec<String>,
    pub assumptions: Vec<String>,
    pub outputs: Vec<String>,
}

impl RunManifest {
    /// Some files were aborted but the run completed.
    pub fn is_partial(&self) -> bool {
        !self.failures.is_empty()
    }

    pub fn exit_code(&self) -> i32 {
        if self.is_partial() {
            2
        } else {
            0
        }
    }
}

const ASSUMPTIONS: &[&str] = &[
    "history is the first-parent chain of HEAD; merges contribute their diff against the first parent",
    "commit timestamps are committer timestamps",
    "file churn is counted for files present in the HEAD tree; renames accumulate under the final path",
    "project lifetime in months is the first-to-last commit span divided by 30.44 days",
    "line identity is positional; moved lines die and are reborn",
    "pattern labels are heuristic unless replaced from a labels override file",
    "bot attribution uses the configured identity of the commits that modified hotspot lines",
];

/// Everything the report writer needs.
#[derive(Debug, Clone, Default)]
pub struct AnalysisResults {
    pub churn: Vec<FileChurn>,
    pub hotspot_files: BTreeSet<String>,
    pub files: Vec<FileAnalysis>,
    pub committers: Vec<CommitterIdentity>,
    pub bot_share: BotShare,
}

fn sample_files(files: Vec<String>, sample: Option<FileSample>) -> Vec<String> {
    let Some(FileSample { count, seed }) = sample else {
        return files;
    };
    if count >= files.len() {
        return files;
    }
    let mut files = files;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for i in 0..count {
        let j = rng.random_range(i..files.len());
        files.swap(i, j);
    }
    files.truncate(count);
    files.sort();
    files
}

/// Applies overrides, then derives committers and bot shares from the
/// commits that edited hotspot lines.
pub fn aggregate(
    churn: Vec<FileChurn>,
    hotspot_files: BTreeSet<String>,
    mut files: Vec<FileAnalysis>,
    overrides: Option<&LabelOverrides>,
    bot_config: &BotConfig,
    identity: IdentityRole,
) -> AnalysisResults {
    if let Some(o) = overrides {
        for f in &mut files {
            for h in &mut f.hotspots {
                if let Some(p) = o.get(&f.path, h.line_number) {
                    h.label = PatternLabel::new(p, 1.0);
                    h.heuristic = false;
                }
            }
        }
    }
    let mut headers: Vec<&CommitHeader> = files.iter().flat_map(|f| f.commits.values()).collect();
    headers.sort_by(|a, b| (a.committer_timestamp, &a.hash).cmp(&(b.committer_timestamp, &b.hash)));
    headers.dedup_by(|a, b| a.hash == b.hash);
    let committers = aggregate_committers(headers.iter().copied(), identity)
        .into_iter()
        .map(|c| flag_bot(c, bot_config))
        .collect();
    let is_bot: HashMap<&str, bool> = headers
        .iter()
        .map(|h| {
            let (name, email) = identity.of(h);
            (h.hash.as_str(), bot_verdict(name, email, bot_config).0)
        })
        .collect();
    let mut labeled = Vec::new();
    for f in &files {
        for h in &f.hotspots {
            for commit in &h.modifications {
                labeled.push(LabeledCommit {
                    pattern: h.label.pattern,
                    commit: commit.clone(),
                    is_bot: is_bot.get(commit.as_str()).copied().unwrap_or(false),
                });
            }
        }
    }
    AnalysisResults {
        churn,
        hotspot_files,
        bot_share: bot_share(&labeled),
        files,
        committers,
    }
}

fn load_category_table(path: Option<&Path>) -> Result<CategoryTable, PipelineError> {
    let mut table = CategoryTable::builtin().clone();
    if let Some(path) = path {
        let text = std::fs::read_to_string(path)?;
        let extra = CategoryTable::parse(&text)
            .map_err(|e| PipelineError::Config(format!("{}: {e}", path.display())))?;
        table.extend(extra);
    }
    Ok(table)
}

pub fn analyze_repo(config: &AnalysisConfig) -> Result<RunManifest, PipelineError> {
    let started_at = Utc::now();
    if config.worker_count == 0 {
        return Err(PipelineError::Config(
            "worker count must be at least 1".into(),
        ));
    }
    config.thresholds.validate()?;
    let table = load_category_table(config.category_table.as_deref())?;
    let overrides = config
        .labels_override
        .as_deref()
        .map(LabelOverrides::load)
        .transpose()
        .map_err(|e| PipelineError::Config(e.to_string()))?;

    let git = Git::new(&config.git_program, &config.repo_path);
    let git_version = git.version()?;
    let repo_head = git.open()?;
    let mut warnings = Vec::new();
    let mut stages = StageCounts::default();

    // Stage 1: per-file commit counts and the dual filter.
    let mut counter = CommitCounter::new();
    let mut proc = git.name_status_log()?;
    for ev in parse_log_stream(&mut proc.stdout) {
        counter.handle(&ev?);
    }
    proc.finish()?;
    stages.commits = counter.commits();
    let head_files = git.head_files()?;
    stages.files_at_head = head_files.len();
    let counts: BTreeMap<String, u64> = head_files
        .iter()
        .map(|p| (p.clone(), counter.counts().get(p).copied().unwrap_or(0)))
        .collect();
    let lifetime_months = counter.lifetime_months();
    let (hotspot_files, churn_mean, churn_stddev) =
        match detect_hotspot_files(&counts, lifetime_months, &config.thresholds) {
            Ok(h) => {
                if h.degenerate {
                    warnings.push(
                        "all files share one commit count; no file can be an outlier".to_string(),
                    );
                }
                (h.files, Some(h.summary.mean), Some(h.summary.stddev))
            }
            Err(e @ (ChurnError::EmptyInput | ChurnError::NonPositiveLifetime(_))) => {
                warnings.push(format!("file-level detection skipped: {e}"));
                (BTreeSet::new(), None, None)
            }
            Err(e) => return Err(e.into()),
        };
    stages.dual_filter_files = hotspot_files.len();
    let churn = file_churn(&counts, &table);

    // Stage 2: line tracking on (a sample of) the hotspot files only.
    let targets = sample_files(hotspot_files.iter().cloned().collect(), config.file_sample);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.worker_count)
        .build()
        .map_err(|e| PipelineError::Config(e.to_string()))?;
    let analyses: Vec<FileAnalysis> = pool.install(|| {
        targets
            .par_iter()
            .map(|path| {
                let aliases: Vec<String> = counter.aliases(path).cloned().collect();
                let category = table.categorize(path);
                track_one(&git, path, &aliases, category, config).unwrap_or_else(|err| {
                    FileAnalysis {
                        path: path.clone(),
                        category: Some(category),
                        failure: Some(err.to_string()),
                        ..FileAnalysis::default()
                    }
                })
            })
            .collect()
    });
    let failures: Vec<FileFailure> = analyses
        .iter()
        .filter_map(|a| {
            a.failure.as_ref().map(|e| FileFailure {
                path: a.path.clone(),
                error: e.clone(),
            })
        })
        .collect();
    for a in &analyses {
        stages.hunks_replayed += a.stats.hunks;
        stages.overlap_skips += a.counters.overlap_skips;
        stages.content_mismatches += a.counters.content_mismatches;
        stages.binary_files_skipped += a.binary as usize;
        stages.hotspot_lines += a.hotspots.len();
        stages.hotspot_bearing_files += !a.hotspots.is_empty() as usize;
    }
    stages.files_line_tracked = analyses.len();
    stages.files_failed = failures.len();
    if stages.content_mismatches > 0 {
        warnings.push(format!(
            "{} diff lines did not match the tracked content",
            stages.content_mismatches
        ));
    }

    // Stage 3: aggregation.
    let results = aggregate(
        churn,
        hotspot_files,
        analyses,
        overrides.as_ref(),
        &config.bot_config,
        config.identity,
    );
    stages.committers = results.committers.len();
    stages.hotspot_commits = results.bot_share.overall.total_commits() as usize;

    // Stage 4: reports, manifest last.
    let outputs = emit_reports(&results, &config.output_dir, config.emit_plot_data)?;
    let mut manifest = RunManifest {
        tool_version: TOOL_VERSION.to_string(),
        git_version,
        config: config.clone(),
        repo_head,
        started_at,
        finished_at: started_at,
        lifetime_months,
        churn_mean,
        churn_stddev,
        stages,
        failures,
        warnings,
        assumptions: ASSUMPTIONS.iter().map(|s| s.to_string()).collect(),
        outputs: outputs
            .iter()
            .map(|p| {
                p.strip_prefix(&config.output_dir)
                    .unwrap_or(p)
                    .display()
                    .to_string()
            })
            .collect(),
    };
    manifest.finished_at = Utc::now();
    let tmp = config.output_dir.join("manifest.json.tmp");
    std::fs::write(&tmp, serde_json::to_vec_pretty(&manifest)?)?;
    std::fs::rename(&tmp, config.output_dir.join("manifest.json"))?;
    Ok(manifest)
}

fn track_one(
    git: &Git,
    path: &str,
    aliases: &[String],
    category: FileCategory,
    config: &AnalysisConfig,
) -> Result<FileAnalysis, PipelineError> {
    let mut paths: Vec<&str> = aliases.iter().map(String::as_str).collect();
    paths.push(path);
    let mut proc = git.patch_log(&paths)?;
    let analysis = analyze_file(
        path,
        aliases,
        category,
        parse_log_stream(&mut proc.stdout),
        &config.thresholds,
        &config.classifier,
    );
    proc.finish()?;
    Ok(analysis?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sampling_is_seeded_and_sorted() {
        let files: Vec<String> = (0..20).map(|i| format!("f{i:02}")).collect();
        let a = sample_files(files.clone(), Some(FileSample { count: 5, seed: 9 }));
        assert_eq!(
            a,
            sample_files(files.clone(), Some(FileSample { count: 5, seed: 9 }))
        );
        assert_eq!(a.len(), 5);
        assert!(a.windows(2).all(|w| w[0] < w[1]));
        assert_eq!(sample_files(files.clone(), None), files);
        assert_eq!(
            sample_files(files.clone(), Some(FileSample { count: 50, seed: 1 })),
            files
        );
    }

    const LOG: &str = "commit a1 1000 \x1fA\x1fa@x\x1fBot\x1fbot@x\n\
diff --git a/f b/f\n\
new file mode 100644\n\
--- /dev/null\n\
+++ b/f\n\
@@ -0,0 +1,2 @@\n\
+v = 1.0.0\n\
+stable\n";

    fn bump(prev: u32, next: u32, ts: i64, committer: &str) -> String {
        format!(
            "\ncommit b{next} {ts} \x1fA\x1fa@x\x1f{committer}\x1f{committer}@x\n\
diff --git a/f b/f\n\
--- a/f\n\
+++ b/f\n\
@@ -1 +1 @@\n\
-v = 1.0.{prev}\n\
+v = 1.0.{next}\n"
        )
    }

    #[test]
    fn file_analysis_selects_and_labels() {
        let mut log = LOG.to_string();
        for i in 0..4 {
            log += &bump(
                i,
                i + 1,
                2000 + i as i64 * 1000,
                if i % 2 == 0 { "ci-bot" } else { "Ada" },
            );
        }
        let t = HotspotThresholds {
            sigma_multiplier: 0.5,
            ..HotspotThresholds::default()
        };
        let a = analyze_file(
            "f",
            &[],
            FileCategory::ProgrammingFile,
            parse_log_stream(log.as_bytes()),
            &t,
            &ClassifierConfig::default(),
        )
        .unwrap();
        assert_eq!(a.reports.len(), 2);
        assert_eq!(a.hotspots.len(), 1);
        let h = &a.hotspots[0];
        assert_eq!((h.line_number, h.mod_count), (1, 4));
        assert_eq!(h.label.pattern, Pattern::PinnedVersionBump);
        assert_eq!(a.commits.len(), 4);

        let results = aggregate(
            Vec::new(),
            BTreeSet::new(),
            vec![a],
            None,
            &BotConfig::default(),
            IdentityRole::Committer,
        );
        assert_eq!(results.bot_share.overall.bot_commits, 2);
        assert_eq!(results.bot_share.overall.human_commits, 2);
        assert_eq!(results.committers.len(), 2);
        assert!(results
            .committers
            .iter()
            .any(|c| c.name == "ci-bot" && c.is_bot));
    }
}
