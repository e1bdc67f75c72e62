use std::collections::HashMap;
use std::sync::LazyLock;

use regex::Regex;

use super::{ClassifierConfig, Pattern};
use crate::churn::FileCategory;

fn re(pattern: &str) -> Regex {
    Regex::new(pattern).expect("static regex")
}

static VERSION: LazyLock<Regex> =
    LazyLock::new(|| re(r"^[vV]?(\d+(?:\.\d+)+)(?:[-+][0-9A-Za-z.\-]+)?$"));
static KEY: LazyLock<Regex> = LazyLock::new(|| {
    re(r#"^\s*(?:-\s+)?(?:export\s+)?["']?([A-Za-z_][A-Za-z0-9_.\-]*)["']?\s*\+?[:=]"#)
});
static IMPORT: LazyLock<Regex> = LazyLock::new(|| {
    re(
        r"^\s*(?:import\b|from\s+\S+\s+import\b|#\s*include\b|#\s*import\b|@import\b|require\b|(?:const|let|var)\s+.*=\s*require\s*\(|use\s+[\w:{}, *]+;|using\s+[\w.]+\s*;|extern\s+crate\b)",
    )
});
static QUOTED: LazyLock<Regex> =
    LazyLock::new(|| re(r#""([^"]*)"|'([^']*)'|`([^`]*)`|<([^<>\s]*)>"#));
static IDENT: LazyLock<Regex> = LazyLock::new(|| re(r"[A-Za-z_][A-Za-z0-9_.:]*"));
static PATHLIKE: LazyLock<Regex> = LazyLock::new(|| {
    re(
        r"(?:^|[^\w.])(?:\.{1,2}|~)?/[\w.\-]+|[\w.\-]+/[\w.\-]+/[\w.\-]|[\w\-]+/[\w\-]+\.[A-Za-z]\w*|[A-Za-z]:\\|[\w.\-]+\\[\w.\-]+|[A-Za-z][A-Za-z0-9+.\-]*://",
    )
});
static IPV4: LazyLock<Regex> = LazyLock::new(|| re(r"\b\d{1,3}(?:\.\d{1,3}){3}\b"));
static HOST_PORT: LazyLock<Regex> = LazyLock::new(|| {
    re(
        r"(?i)\b(?:localhost|[a-z0-9\-]+(?:\.[a-z0-9\-]+)*\.[a-z]{2,}|\d{1,3}(?:\.\d{1,3}){3}):\d{2,5}\b",
    )
});
static FLAG: LazyLock<Regex> = LazyLock::new(|| re(r"^--?[A-Za-z][A-Za-z0-9_\-]*(?:=.*)?$"));
static YEAR: LazyLock<Regex> = LazyLock::new(|| re(r"\b(?:19|20)\d{2}\b"));
static ISO_DATE: LazyLock<Regex> = LazyLock::new(|| re(r"\b\d{4}-\d{2}-\d{2}(?:[T ]\d{2}:\d{2})?"));
static INTEGRITY: LazyLock<Regex> =
    LazyLock::new(|| re(r"(?i)\b(?:sha\d{1,3}|md5)[-:][A-Za-z0-9+/=]{16,}"));
static EPOCH: LazyLock<Regex> = LazyLock::new(|| re(r"^1\d{9}(?:\d{3})?$"));
static CALL: LazyLock<Regex> = LazyLock::new(|| re(r"([A-Za-z_][A-Za-z0-9_]*[?!]?)\("));
static AMI: LazyLock<Regex> = LazyLock::new(|| re(r"\bami-[0-9a-f]{8,17}\b|@sha256:[0-9a-f]{12,}"));

const DISTRO_PREFIXES: &[&str] = &[
    "centos",
    "rocky",
    "alma",
    "almalinux",
    "ubuntu",
    "debian",
    "alpine",
    "fedora",
    "rhel",
    "opensuse",
    "sles",
    "amazonlinux",
    "oraclelinux",
    "archlinux",
    "raspbian",
    "mint",
    "stream",
];
const DISTRO_CODENAMES: &[&str] = &[
    "trusty",
    "xenial",
    "bionic",
    "focal",
    "jammy",
    "noble",
    "jessie",
    "stretch",
    "buster",
    "bullseye",
    "bookworm",
    "trixie",
    "leap",
    "tumbleweed",
];
const RESOURCE_WORDS: &[&str] = &[
    "image",
    "images",
    "ami",
    "vm",
    "container",
    "docker",
    "snapshot",
    "machine",
];
const SERVICE_WORDS: &[&str] = &[
    "host", "hostname", "port", "url", "uri", "endpoint", "token", "secret", "password", "passwd",
    "ip", "address", "addr", "ssh", "server", "domain", "proxy", "dsn", "baseurl", "apikey",
];
const DEBUG_WORDS: &[&str] = &[
    "debug",
    "verbose",
    "verbosity",
    "loglevel",
    "log",
    "logging",
    "trace",
];
const LOG_LEVELS: &[&str] = &[
    "debug", "info", "warn", "warning", "error", "trace", "verbose", "fatal", "critical", "notice",
    "silent", "quiet",
];
const LICENSE_WORDS: &[&str] = &[
    "copyright",
    "license",
    "licence",
    "(c)",
    "©",
    "spdx",
    "all rights reserved",
];
const METADATA_KEYS: &[&str] = &[
    "timestamp",
    "date",
    "generated",
    "built",
    "build",
    "buildid",
    "checksum",
    "hash",
    "sha",
    "sha1",
    "sha256",
    "md5",
    "integrity",
    "signature",
    "etag",
    "revision",
    "lastmod",
    "modified",
    "updated",
    "version",
];
const CALL_KEYWORDS: &[&str] = &[
    "if", "for", "while", "switch", "return", "catch", "sizeof", "elif", "and", "or", "not", "in",
    "until", "unless",
];
const MANIFESTS: &[&str] = &[
    "package.json",
    "bower.json",
    "composer.json",
    "pom.xml",
    "build.gradle",
    "build.gradle.kts",
    "settings.gradle",
    "setup.py",
    "setup.cfg",
    "pyproject.toml",
    "pipfile",
    "environment.yml",
    "cargo.toml",
    "go.mod",
    "gemfile",
    "podfile",
    "makefile",
    "gnumakefile",
    "kbuild",
    "cmakelists.txt",
    "meson.build",
    "configure.ac",
    "packages.config",
    "deps.edn",
    "project.clj",
    "mix.exs",
    "pubspec.yaml",
    "build.sbt",
];
const MANIFEST_EXTS: &[&str] = &[
    "gemspec", "csproj", "fsproj", "vbproj", "podspec", "mk", "cabal", "nuspec",
];
const DATA_EXTS: &[&str] = &[
    "json", "jsonl", "ndjson", "geojson", "csv", "tsv", "xml", "yaml", "yml", "dat", "toml",
];
const DATA_DIRS: &[&str] = &[
    "data", "dataset", "datasets", "fixtures", "seeds", "i18n", "locales", "l10n",
];

/// Collapses blank and tab runs to one space, trims and case-folds.
pub(super) fn normalize(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    let mut gap = false;
    for c in s.trim().chars() {
        if c == ' ' || c == '\t' {
            gap = true;
            continue;
        }
        if gap {
            out.push(' ');
            gap = false;
        }
        out.extend(c.to_lowercase());
    }
    out
}

fn is_word(c: char) -> bool {
    c.is_alphanumeric() || matches!(c, '.' | '_' | '-')
}

fn is_span(c: char) -> bool {
    !c.is_whitespace()
        && !matches!(
            c,
            '"' | '\'' | '`' | '(' | ')' | '[' | ']' | '{' | '}' | '<' | '>' | ',' | ';'
        )
}

fn expand(
    chars: &[char],
    mut start: usize,
    mut end: usize,
    pred: fn(char) -> bool,
) -> (usize, usize) {
    while start > 0 && pred(chars[start - 1]) {
        start -= 1;
    }
    while end < chars.len() && pred(chars[end]) {
        end += 1;
    }
    (start, end)
}

/// One side of the edit with the changed region grown to word and span
/// boundaries.
struct Side<'a> {
    text: &'a str,
    lower: String,
    word: String,
    word_start: usize,
    chars: Vec<char>,
    span: String,
    key: Option<String>,
}

impl<'a> Side<'a> {
    fn new(text: &'a str, chars: Vec<char>, start: usize, end: usize) -> Self {
        let (ws, we) = expand(&chars, start, end, is_word);
        let (ss, se) = expand(&chars, start, end, is_span);
        let word: String = chars[ws..we].iter().collect();
        Side {
            text,
            lower: text.to_lowercase(),
            word: word.trim_matches(|c| c == '.' || c == '-').to_string(),
            word_start: ws,
            span: chars[ss..se].iter().collect(),
            chars,
            key: KEY.captures(text).map(|c| c[1].to_string()),
        }
    }

    fn span_tokens(&self) -> impl Iterator<Item = String> + '_ {
        self.span
            .split(|c: char| !c.is_alphanumeric())
            .filter(|t| !t.is_empty())
            .map(str::to_lowercase)
    }

    fn comparator_before_word(&self) -> bool {
        let mut i = self.word_start;
        while i > 0 && self.chars[i - 1] == ' ' {
            i -= 1;
        }
        let head: String = self.chars[i.saturating_sub(2)..i].iter().collect();
        if head.ends_with("=>") || head.ends_with("->") {
            return false;
        }
        [">=", "<=", "~=", "!=", ">", "<", "~", "^"]
            .iter()
            .any(|op| head.ends_with(op))
    }
}

struct Ctx<'a> {
    b: Side<'a>,
    a: Side<'a>,
    path: String,
    file_name: String,
    ext: String,
    category: FileCategory,
}

fn key_segments(key: &str) -> Vec<String> {
    let mut segs = Vec::new();
    for part in key.split(|c: char| !c.is_ascii_alphanumeric()) {
        let mut cur = String::new();
        let mut prev_lower = false;
        for c in part.chars() {
            if c.is_ascii_uppercase() && prev_lower && !cur.is_empty() {
                segs.push(std::mem::take(&mut cur).to_lowercase());
            }
            prev_lower = c.is_ascii_lowercase() || c.is_ascii_digit();
            cur.push(c);
        }
        if !cur.is_empty() {
            segs.push(cur.to_lowercase());
        }
    }
    segs
}

fn segments_hit(key: Option<&str>, vocab: &[&str]) -> bool {
    key.is_some_and(|k| {
        key_segments(k).iter().any(|s| {
            vocab
                .iter()
                .any(|v| s == v || s.strip_suffix('s') == Some(v))
        })
    })
}

fn version_numbers(token: &str) -> Option<Vec<u64>> {
    let caps = VERSION.captures(token)?;
    caps[1].split('.').map(|p| p.parse().ok()).collect()
}

fn token_counts(text: &str) -> HashMap<&str, i64> {
    let mut m = HashMap::new();
    for t in text.split_whitespace() {
        *m.entry(t).or_insert(0) += 1;
    }
    m
}

/// Whitespace tokens whose counts differ between the two sides.
fn changed_tokens<'t>(before: &'t str, after: &'t str) -> Vec<&'t str> {
    let mut counts = token_counts(before);
    for t in after.split_whitespace() {
        *counts.entry(t).or_insert(0) -= 1;
    }
    let mut out: Vec<&str> = counts
        .into_iter()
        .filter(|&(_, n)| n != 0)
        .map(|(t, _)| t)
        .collect();
    out.sort_unstable();
    out
}

fn is_comment(line: &str) -> bool {
    let t = line.trim_start();
    ["#", "//", "/*", "*", "--", ";", "<!--", "%", "rem "]
        .iter()
        .any(|p| t.starts_with(p))
}

/// Callee name and argument count of every `name(...)` in the line.
fn calls(line: &str) -> Vec<(String, usize)> {
    let chars: Vec<(usize, char)> = line.char_indices().collect();
    let mut out = Vec::new();
    for m in CALL.captures_iter(line) {
        let name = m.get(1).unwrap();
        if CALL_KEYWORDS.contains(&name.as_str()) {
            continue;
        }
        let open = m.get(0).unwrap().end() - 1;
        let Some(pos) = chars.iter().position(|&(i, _)| i == open) else {
            continue;
        };
        let (mut depth, mut commas, mut nonblank) = (0usize, 0usize, false);
        let mut quote: Option<char> = None;
        for &(_, c) in &chars[pos..] {
            if let Some(q) = quote {
                if c == q {
                    quote = None;
                }
                nonblank = true;
                continue;
            }
            match c {
                '"' | '\'' | '`' => quote = Some(c),
                '(' | '[' | '{' => depth += 1,
                ')' | ']' | '}' => {
                    depth -= 1;
                    if depth == 0 {
                        break;
                    }
                }
                ',' if depth == 1 => commas += 1,
                _ => {}
            }
            if depth >= 1 && !c.is_whitespace() && c != '(' || depth > 1 {
                nonblank = true;
            }
        }
        let arity = if nonblank { commas + 1 } else { 0 };
        out.push((name.as_str().to_string(), arity));
    }
    out.sort();
    out
}

fn word_lcs(a: &[&str], b: &[&str]) -> usize {
    let mut prev = vec![0usize; b.len() + 1];
    let mut cur = vec![0usize; b.len() + 1];
    for x in a {
        for (j, y) in b.iter().enumerate() {
            cur[j + 1] = if x == y {
                prev[j] + 1
            } else {
                cur[j].max(prev[j + 1])
            };
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[b.len()]
}

impl<'a> Ctx<'a> {
    fn new(before: &'a str, after: &'a str, path: &str, category: FileCategory) -> Self {
        let bc: Vec<char> = before.chars().collect();
        let ac: Vec<char> = after.chars().collect();
        let prefix = bc.iter().zip(&ac).take_while(|(x, y)| x == y).count();
        let max_suffix = bc.len().min(ac.len()) - prefix;
        let suffix = bc
            .iter()
            .rev()
            .zip(ac.iter().rev())
            .take(max_suffix)
            .take_while(|(x, y)| x == y)
            .count();
        let (bl, al) = (bc.len(), ac.len());
        let path_lower = path.replace('\\', "/").to_lowercase();
        let file_name = path_lower.rsplit('/').next().unwrap_or("").to_string();
        let ext = file_name
            .rsplit_once('.')
            .map(|(_, e)| e.to_string())
            .unwrap_or_default();
        Ctx {
            b: Side::new(before, bc, prefix, bl - suffix),
            a: Side::new(after, ac, prefix, al - suffix),
            path: path_lower,
            file_name,
            ext,
            category,
        }
    }

    fn sides(&self) -> [&Side<'a>; 2] {
        [&self.b, &self.a]
    }

    fn same_key(&self) -> Option<&str> {
        match (&self.b.key, &self.a.key) {
            (Some(x), Some(y)) if x == y => Some(x),
            _ => None,
        }
    }

    fn any_key(&self) -> Option<&str> {
        self.b.key.as_deref().or(self.a.key.as_deref())
    }
}

fn pinned_version_bump(c: &Ctx) -> bool {
    let (Some(vb), Some(va)) = (version_numbers(&c.b.word), version_numbers(&c.a.word)) else {
        return false;
    };
    !c.b.comparator_before_word() && !c.a.comparator_before_word() && va > vb
}

fn conditional_version_bump(c: &Ctx) -> bool {
    version_numbers(&c.b.word).is_some()
        && version_numbers(&c.a.word).is_some()
        && (c.b.comparator_before_word() || c.a.comparator_before_word())
}

fn distro_bump(c: &Ctx) -> bool {
    c.sides().iter().any(|s| {
        s.span_tokens().any(|t| {
            DISTRO_CODENAMES.contains(&t.as_str())
                || DISTRO_PREFIXES.iter().any(|p| t.starts_with(p))
        })
    })
}

fn resource_id_modification(c: &Ctx) -> bool {
    segments_hit(c.any_key(), RESOURCE_WORDS)
        || c.sides().iter().any(|s| {
            AMI.is_match(&s.span)
                || s.lower.trim_start().starts_with("from ")
                || s.span_tokens()
                    .any(|t| RESOURCE_WORDS.contains(&t.as_str()))
        })
}

fn service_configuration(c: &Ctx) -> bool {
    segments_hit(c.same_key(), SERVICE_WORDS)
        || c.sides()
            .iter()
            .any(|s| IPV4.is_match(&s.span) || HOST_PORT.is_match(&s.span))
}

fn is_manifest(c: &Ctx) -> bool {
    MANIFESTS.contains(&c.file_name.as_str())
        || MANIFEST_EXTS.contains(&c.ext.as_str())
        || (c.file_name.starts_with("requirements") && c.ext == "txt")
}

fn dependency_specification(c: &Ctx) -> bool {
    if IMPORT.is_match(c.b.text) && IMPORT.is_match(c.a.text) {
        let strip = |s: &str| -> (Vec<String>, Vec<String>) {
            let quoted: Vec<String> = QUOTED
                .captures_iter(s)
                .filter_map(|m| {
                    m.iter()
                        .skip(1)
                        .flatten()
                        .next()
                        .map(|g| g.as_str().to_string())
                })
                .collect();
            let rest = QUOTED.replace_all(s, " ");
            let mut idents: Vec<String> = IDENT
                .find_iter(&rest)
                .map(|m| m.as_str().to_string())
                .collect();
            idents.sort();
            (idents, quoted)
        };
        let (ib, qb) = strip(c.b.text);
        let (ia, qa) = strip(c.a.text);
        if ib != ia {
            return true;
        }
        let pathish = |q: &String| q.contains('/') || q.contains('\\') || q.starts_with('.');
        return qb != qa && !qb.iter().chain(&qa).any(pathish);
    }
    is_manifest(c)
        && !is_comment(c.b.text)
        && !is_comment(c.a.text)
        && changed_tokens(c.b.text, c.a.text)
            .iter()
            .any(|t| t.chars().any(|ch| ch.is_ascii_alphabetic()))
}

fn path_update(c: &Ctx) -> bool {
    c.sides().iter().any(|s| PATHLIKE.is_match(&s.span))
}

fn debug_configuration(c: &Ctx) -> bool {
    let strip = |t: &str| {
        t.trim_matches(|ch| matches!(ch, '"' | '\'' | ',' | ';' | '`'))
            .to_string()
    };
    if changed_tokens(c.b.text, c.a.text)
        .iter()
        .any(|t| FLAG.is_match(&strip(t)))
    {
        return true;
    }
    let level = |w: &str| LOG_LEVELS.contains(&w.to_lowercase().as_str());
    if level(&c.b.word) && level(&c.a.word) {
        return true;
    }
    segments_hit(c.same_key(), DEBUG_WORDS)
}

fn license_modification(c: &Ctx) -> bool {
    c.sides()
        .iter()
        .any(|s| LICENSE_WORDS.iter().any(|w| s.lower.contains(w)))
        && (c
            .sides()
            .iter()
            .any(|s| YEAR.is_match(&s.span) || s.span.chars().any(char::is_alphabetic)))
}

fn is_checksum(t: &str) -> bool {
    t.len() >= 7
        && t.chars().all(|ch| ch.is_ascii_hexdigit())
        && t.chars().any(|ch| ch.is_ascii_digit())
        && t.chars().any(|ch| ch.is_ascii_alphabetic())
}

fn metadata_change(c: &Ctx) -> bool {
    if c.sides().iter().any(|s| {
        ISO_DATE.is_match(&s.span)
            || INTEGRITY.is_match(&s.span)
            || s.span_tokens()
                .any(|t| is_checksum(&t) || EPOCH.is_match(&t))
    }) {
        return true;
    }
    if version_numbers(&c.b.word).is_some() && version_numbers(&c.a.word).is_some() {
        return true;
    }
    segments_hit(c.same_key(), METADATA_KEYS)
}

fn function_call_change(c: &Ctx) -> bool {
    let (cb, ca) = (calls(c.b.text), calls(c.a.text));
    (!cb.is_empty() || !ca.is_empty()) && cb != ca
}

fn long_line_change(c: &Ctx, cfg: &ClassifierConfig) -> bool {
    let len = c.b.chars.len().max(c.a.chars.len());
    if len <= cfg.long_line_threshold {
        return false;
    }
    let wb: Vec<&str> = c.b.text.split_whitespace().collect();
    let wa: Vec<&str> = c.a.text.split_whitespace().collect();
    let total = wb.len() + wa.len();
    if total == 0 {
        return false;
    }
    let edits = total - 2 * word_lcs(&wb, &wa);
    (edits as f64) / (total as f64) < cfg.long_line_edit_ratio
}

fn is_data_file(c: &Ctx) -> bool {
    let structured =
        c.category == FileCategory::AdministrativeFile && DATA_EXTS.contains(&c.ext.as_str());
    let mut dirs = c.path.split('/').rev().skip(1);
    let stem = c.file_name.split('.').next().unwrap_or("");
    structured || dirs.any(|d| DATA_DIRS.contains(&d)) || stem.contains("data")
}

fn external_data_fluctuations(c: &Ctx) -> bool {
    if !is_data_file(c) {
        return false;
    }
    if c.same_key().is_some() {
        return true;
    }
    let delim = if c.ext == "tsv" { '\t' } else { ',' };
    matches!(c.ext.as_str(), "csv" | "tsv")
        && c.b.text.matches(delim).count() == c.a.text.matches(delim).count()
}

pub(super) fn matching_rules(
    before: &str,
    after: &str,
    path: &str,
    category: FileCategory,
    cfg: &ClassifierConfig,
) -> Vec<Pattern> {
    if normalize(before) == normalize(after) {
        return vec![Pattern::FormattingPingPong];
    }
    let c = Ctx::new(before.trim_end(), after.trim_end(), path, category);
    let checks: [(Pattern, bool); 13] = [
        (Pattern::PinnedVersionBump, pinned_version_bump(&c)),
        (
            Pattern::ConditionalVersionBump,
            conditional_version_bump(&c),
        ),
        (Pattern::DistroBump, distro_bump(&c)),
        (
            Pattern::ResourceIdModification,
            resource_id_modification(&c),
        ),
        (Pattern::ServiceConfiguration, service_configuration(&c)),
        (
            Pattern::DependencySpecification,
            dependency_specification(&c),
        ),
        (Pattern::PathUpdate, path_update(&c)),
        (Pattern::DebugConfiguration, debug_configuration(&c)),
        (Pattern::LicenseModification, license_modification(&c)),
        (Pattern::MetadataChange, metadata_change(&c)),
        (Pattern::FunctionCallChange, function_call_change(&c)),
        (Pattern::LongLineChange, long_line_change(&c, cfg)),
        (
            Pattern::ExternalDataFluctuations,
            external_data_fluctuations(&c),
        ),
    ];
    checks
        .into_iter()
        .filter(|&(_, hit)| hit)
        .map(|(p, _)| p)
        .collect()
}
