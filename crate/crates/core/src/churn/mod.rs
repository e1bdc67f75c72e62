//! File and line churn: commit counts, the hotspot-file dual filter, hotspot
//! line selection and descriptive statistics.

mod categories;
mod stats;

use std::collections::{BTreeMap, BTreeSet, HashSet};

use serde::{Deserialize, Serialize};

use crate::diff::{FileChange, LogEvent, ParseError};
use crate::track::TrackedLine;

pub use categories::{categorize_file, CategoryTable, FileCategory, TableError};
pub use stats::{
    churn_summary, exceeds_sigma, summarize, ChurnSummary, DescriptiveStats, Deviation, StatsError,
};

pub const SECONDS_PER_DAY: f64 = 86_400.0;
pub const DAYS_PER_MONTH: f64 = 30.44;
pub const DAYS_PER_YEAR: f64 = 365.25;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FileChurn {
    pub path: String,
    pub commit_touch_count: u64,
    pub category: FileCategory,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HotspotThresholds {
    pub sigma_multiplier: f64,
    pub monthly_rate: f64,
    pub min_line_mods: usize,
    pub deviation: Deviation,
}

impl Default for HotspotThresholds {
    fn default() -> Self {
        HotspotThresholds {
            sigma_multiplier: 3.0,
            monthly_rate: 1.0,
            min_line_mods: 3,
            deviation: Deviation::Population,
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ChurnError {
    #[error("no files to evaluate")]
    EmptyInput,
    #[error("project lifetime must be positive, got {0} months")]
    NonPositiveLifetime(f64),
    #[error("invalid threshold: {0}")]
    InvalidThreshold(&'static str),
}

impl HotspotThresholds {
    pub fn validate(&self) -> Result<(), ChurnError> {
        if !(self.sigma_multiplier > 0.0 && self.sigma_multiplier.is_finite()) {
            return Err(ChurnError::InvalidThreshold(
                "sigma multiplier must be positive",
            ));
        }
        if !(self.monthly_rate > 0.0 && self.monthly_rate.is_finite()) {
            return Err(ChurnError::InvalidThreshold(
                "monthly rate must be positive",
            ));
        }
        if self.min_line_mods == 0 {
            return Err(ChurnError::InvalidThreshold(
                "minimum line modifications must be positive",
            ));
        }
        Ok(())
    }
}

/// Per-file commit counts accumulated from a log stream.
#[derive(Debug, Clone, Default)]
pub struct CommitCounter {
    counts: BTreeMap<String, u64>,
    aliases: BTreeMap<String, BTreeSet<String>>,
    touched: HashSet<String>,
    first_ts: Option<i64>,
    last_ts: Option<i64>,
    commits: u64,
}

impl CommitCounter {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn handle(&mut self, event: &LogEvent) {
        match event {
            LogEvent::CommitStart(header) => {
                self.commits += 1;
                self.touched.clear();
                let ts = header.committer_timestamp;
                self.first_ts = Some(self.first_ts.map_or(ts, |f| f.min(ts)));
                self.last_ts = Some(self.last_ts.map_or(ts, |l| l.max(ts)));
            }
            LogEvent::FileStart(header) => {
                let path = header.path();
                if header.change == FileChange::Renamed && header.old_path != path {
                    if let Some(old) = self.counts.remove(&header.old_path) {
                        *self.counts.entry(path.to_string()).or_default() += old;
                    }
                    let mut names = self.aliases.remove(&header.old_path).unwrap_or_default();
                    names.insert(header.old_path.clone());
                    names.remove(path);
                    self.aliases
                        .entry(path.to_string())
                        .or_default()
                        .extend(names);
                    if self.touched.remove(&header.old_path) {
                        self.touched.insert(path.to_string());
                    }
                }
                if self.touched.insert(path.to_string()) {
                    *self.counts.entry(path.to_string()).or_default() += 1;
                }
            }
            _ => {}
        }
    }

    pub fn counts(&self) -> &BTreeMap<String, u64> {
        &self.counts
    }

    pub fn into_counts(self) -> BTreeMap<String, u64> {
        self.counts
    }

    pub fn commits(&self) -> u64 {
        self.commits
    }

    /// Earlier names a path was renamed from.
    pub fn aliases(&self, path: &str) -> impl Iterator<Item = &String> {
        self.aliases.get(path).into_iter().flatten()
    }

    /// Span between the earliest and latest commit, in months.
    pub fn lifetime_months(&self) -> f64 {
        match (self.first_ts, self.last_ts) {
            (Some(first), Some(last)) => lifetime_months(first, last),
            _ => 0.0,
        }
    }
}

pub fn count_file_commits<I>(events: I) -> Result<BTreeMap<String, u64>, ParseError>
where
    I: IntoIterator<Item = Result<LogEvent, ParseError>>,
{
    let mut counter = CommitCounter::new();
    for ev in events {
        counter.handle(&ev?);
    }
    Ok(counter.into_counts())
}

pub fn lifetime_months(first_ts: i64, last_ts: i64) -> f64 {
    (last_ts - first_ts) as f64 / (SECONDS_PER_DAY * DAYS_PER_MONTH)
}

pub fn file_churn(counts: &BTreeMap<String, u64>, table: &CategoryTable) -> Vec<FileChurn> {
    counts
        .iter()
        .map(|(path, &count)| FileChurn {
            path: path.clone(),
            commit_touch_count: count,
            category: table.categorize(path),
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct HotspotFiles {
    pub files: BTreeSet<String>,
    pub summary: ChurnSummary,
    /// Set when every count is equal, so no file can be an outlier.
    pub degenerate: bool,
}

pub fn detect_hotspot_files(
    counts: &BTreeMap<String, u64>,
    lifetime_months: f64,
    t: &HotspotThresholds,
) -> Result<HotspotFiles, ChurnError> {
    t.validate()?;
    if lifetime_months.is_nan() || lifetime_months <= 0.0 {
        return Err(ChurnError::NonPositiveLifetime(lifetime_months));
    }
    let values: Vec<u64> = counts.values().copied().collect();
    let summary = churn_summary(&values, t.deviation).ok_or(ChurnError::EmptyInput)?;
    let degenerate = values.iter().all(|&v| v == values[0]);
    if degenerate {
        log::warn!(
            "all {} files have the same commit count; no hotspot files",
            values.len()
        );
    }
    let rate_floor = lifetime_months * t.monthly_rate;
    let files = counts
        .iter()
        .filter(|&(_, &c)| {
            (c as f64) > rate_floor && exceeds_sigma(c, &values, t.sigma_multiplier, t.deviation)
        })
        .map(|(p, _)| p.clone())
        .collect();
    Ok(HotspotFiles {
        files,
        summary,
        degenerate,
    })
}

/// Lines of one file whose modification count is an outlier among the file's
/// live lines and reaches the `min_line_mods` floor.
pub fn select_hotspot_lines<'a>(
    lines: &'a [TrackedLine],
    t: &HotspotThresholds,
) -> Vec<&'a TrackedLine> {
    hotspot_line_indices(lines, t)
        .into_iter()
        .map(|i| &lines[i])
        .collect()
}

/// Positions in `lines` of the lines [`select_hotspot_lines`] returns.
pub fn hotspot_line_indices(lines: &[TrackedLine], t: &HotspotThresholds) -> Vec<usize> {
    let mods: Vec<u64> = lines
        .iter()
        .filter(|l| l.is_alive())
        .map(|l| l.mod_count() as u64)
        .collect();
    lines
        .iter()
        .enumerate()
        .filter(|(_, l)| l.is_alive())
        .filter(|(_, l)| {
            let m = l.mod_count() as u64;
            m >= t.min_line_mods as u64 && exceeds_sigma(m, &mods, t.sigma_multiplier, t.deviation)
        })
        .map(|(i, _)| i)
        .collect()
}

/// Days between the first and last recorded revision of a line.
pub fn lifespan_days(line: &TrackedLine) -> f64 {
    match (line.history.first(), line.history.last()) {
        (Some(first), Some(last)) => (last.timestamp - first.timestamp) as f64 / SECONDS_PER_DAY,
        _ => 0.0,
    }
}
