use std::collections::{BTreeMap, BTreeSet};

use super::{CommitStamp, FileState, TrackError};
use crate::diff::{CommitHeader, FileChange, Hunk, LineKind, LogEvent, ParseError};

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ReplayStats {
    pub commits: u64,
    pub file_diffs: u64,
    pub hunks: u64,
    pub binary_skips: u64,
}

/// Drives [`FileState`]s from a parsed event stream.
///
/// Renames carry state forward under the new path, copies start from fresh
/// births of the source's content. A file whose hunk cannot be applied is
/// moved to the failure list and ignored from then on.
#[derive(Debug, Default)]
pub struct HistoryReplay {
    files: BTreeMap<String, FileState>,
    failed: BTreeMap<String, TrackError>,
    targets: Option<BTreeSet<String>>,
    commit: Option<CommitStamp>,
    commits: Vec<CommitHeader>,
    current: Option<String>,
    touched: BTreeSet<String>,
    /// Hunks applied per file in the current commit, to recover the
    /// pre-commit content a copy refers to.
    applied: BTreeMap<String, Vec<Hunk>>,
    stats: ReplayStats,
}

impl HistoryReplay {
    pub fn new() -> Self {
        Self::default()
    }

    /// Only files whose path is in `targets` are tracked.
    pub fn with_targets<I: IntoIterator<Item = String>>(targets: I) -> Self {
        HistoryReplay {
            targets: Some(targets.into_iter().collect()),
            ..Self::default()
        }
    }

    pub fn replay<I>(mut self, events: I) -> Result<Self, ParseError>
    where
        I: IntoIterator<Item = Result<LogEvent, ParseError>>,
    {
        for ev in events {
            self.handle(&ev?);
        }
        Ok(self)
    }

    pub fn handle(&mut self, event: &LogEvent) {
        match event {
            LogEvent::CommitStart(header) => {
                self.stats.commits += 1;
                self.commit = Some(CommitStamp::from(header));
                self.commits.push(header.clone());
                self.current = None;
                self.touched.clear();
                self.applied.clear();
            }
            LogEvent::FileStart(header) => {
                self.stats.file_diffs += 1;
                self.current = None;
                let Some(commit) = self.commit.clone() else {
                    return;
                };
                let path = header.path().to_string();
                let wanted = |p: &str| self.targets.as_ref().is_none_or(|t| t.contains(p));
                let renamed_in = header.change == FileChange::Renamed && wanted(&header.old_path);
                if !wanted(&path) && !renamed_in {
                    return;
                }
                match header.change {
                    FileChange::Renamed if header.old_path != path => {
                        if let Some(err) = self.failed.remove(&header.old_path) {
                            self.failed.insert(path.clone(), err);
                        }
                        let state = self.files.remove(&header.old_path).unwrap_or_default();
                        self.files.insert(path.clone(), state);
                    }
                    FileChange::Copied if header.old_path != path => {
                        let state = self
                            .files
                            .get(&header.old_path)
                            .map(|src| {
                                let applied = self
                                    .applied
                                    .get(&header.old_path)
                                    .map_or(&[][..], Vec::as_slice);
                                FileState::born_from(pre_commit_lines(src, applied), &commit)
                            })
                            .unwrap_or_default();
                        self.failed.remove(&path);
                        self.files.insert(path.clone(), state);
                    }
                    _ => {}
                }
                if self.failed.contains_key(&path) {
                    return;
                }
                let state = self.files.entry(path.clone()).or_default();
                if self.touched.insert(path.clone()) {
                    state.begin_commit();
                }
                self.current = Some(path);
            }
            LogEvent::HunkEvent(hunk) => {
                self.stats.hunks += 1;
                let (Some(path), Some(commit)) = (self.current.as_ref(), self.commit.as_ref())
                else {
                    return;
                };
                let state = self.files.get_mut(path).expect("current file has state");
                match state.apply_hunk(hunk, commit) {
                    Ok(()) => self
                        .applied
                        .entry(path.clone())
                        .or_default()
                        .push(hunk.clone()),
                    Err(err) => {
                        log::warn!("aborting line tracking for {path}: {err}");
                        self.files.remove(path);
                        self.failed.insert(path.clone(), err);
                        self.current = None;
                    }
                }
            }
            LogEvent::FileSkipped(_) => {
                self.stats.binary_skips += 1;
                if let Some(path) = self.current.take() {
                    self.files.remove(&path);
                }
            }
            LogEvent::StreamEnd => {
                self.current = None;
            }
        }
    }

    pub fn file(&self, path: &str) -> Option<&FileState> {
        self.files.get(path)
    }

    pub fn files(&self) -> impl Iterator<Item = (&String, &FileState)> {
        self.files.iter()
    }

    pub fn into_files(self) -> BTreeMap<String, FileState> {
        self.files
    }

    pub fn failures(&self) -> &BTreeMap<String, TrackError> {
        &self.failed
    }

    pub fn commits(&self) -> &[CommitHeader] {
        &self.commits
    }

    pub fn stats(&self) -> &ReplayStats {
        &self.stats
    }
}

/// Content of `state` before `applied` (this commit's hunks, in order) were
/// applied.
fn pre_commit_lines(state: &FileState, applied: &[Hunk]) -> Vec<(Vec<u8>, bool)> {
    let mut lines: Vec<(Vec<u8>, bool)> = state
        .file_lines
        .iter()
        .map(|l| (l.content.clone(), l.newline))
        .collect();
    for hunk in applied.iter().rev() {
        let start = hunk.new_start.saturating_sub((hunk.new_count > 0) as usize);
        if start + hunk.new_count > lines.len() {
            break;
        }
        let old = hunk
            .lines
            .iter()
            .filter(|l| l.kind != LineKind::Addition)
            .map(|l| (l.text.clone(), l.had_newline));
        lines.splice(start..start + hunk.new_count, old);
    }
    lines
}
