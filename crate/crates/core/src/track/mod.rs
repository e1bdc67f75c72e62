//! Line identity tracking across a replayed patch history.
//!
//! Each file keeps a dense vector of live [`TrackedLine`]s. Hunks are mapped
//! onto it through [`LineOffsets`], deletions and additions are paired by
//! position, and unmatched lines become deaths and births. Identity is purely
//! positional: moved blocks die at the old place and are born at the new one.

mod offsets;
mod replay;
mod report;

pub use offsets::{adjust_position, LineOffsets};
pub use replay::{HistoryReplay, ReplayStats};
pub use report::{read_line_reports, write_line_reports, LineReport};

use std::sync::Arc;

use thiserror::Error;

use crate::diff::{CommitHeader, Hunk, HunkLine, LineKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SlotId(pub u64);

/// Commit identity attached to revisions; the hash is shared by every line
/// the commit touches.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CommitStamp {
    pub hash: Arc<str>,
    pub timestamp: i64,
}

impl From<&CommitHeader> for CommitStamp {
    fn from(c: &CommitHeader) -> Self {
        CommitStamp {
            hash: Arc::from(c.hash.as_str()),
            timestamp: c.committer_timestamp,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Revision {
    pub commit: Arc<str>,
    pub timestamp: i64,
    pub content: Vec<u8>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TrackedLine {
    pub slot_id: SlotId,
    pub content: Vec<u8>,
    /// Whether the line is terminated by a newline in the current revision.
    pub newline: bool,
    pub birth_ts: i64,
    pub death_ts: Option<i64>,
    /// Birth entry first, then one entry per paired modification.
    pub history: Vec<Revision>,
}

impl TrackedLine {
    fn born(slot_id: SlotId, line: &HunkLine, commit: &CommitStamp) -> Self {
        TrackedLine {
            slot_id,
            content: line.text.clone(),
            newline: line.had_newline,
            birth_ts: commit.timestamp,
            death_ts: None,
            history: vec![Revision {
                commit: commit.hash.clone(),
                timestamp: commit.timestamp,
                content: line.text.clone(),
            }],
        }
    }

    pub fn mod_count(&self) -> usize {
        self.history.len() - 1
    }

    pub fn is_alive(&self) -> bool {
        self.death_ts.is_none()
    }

    fn modify(&mut self, line: &HunkLine, commit: &CommitStamp) {
        self.content = line.text.clone();
        self.newline = line.had_newline;
        self.history.push(Revision {
            commit: commit.hash.clone(),
            timestamp: commit.timestamp,
            content: line.text.clone(),
        });
    }
}

/// Result of positional pairing inside one deletion-run/addition-run group.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EditPairing<D, A> {
    pub pairs: Vec<(D, A)>,
    pub deaths: Vec<D>,
    pub births: Vec<A>,
}

/// Pairs the i-th deletion with the i-th addition; surpluses become deaths
/// or births.
pub fn pair_edits<D, A>(deletions: Vec<D>, additions: Vec<A>) -> EditPairing<D, A> {
    let paired = deletions.len().min(additions.len());
    let mut dels = deletions.into_iter();
    let mut adds = additions.into_iter();
    let pairs = dels.by_ref().zip(adds.by_ref()).take(paired).collect();
    EditPairing {
        pairs,
        deaths: dels.collect(),
        births: adds.collect(),
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TrackError {
    #[error(
        "hunk @@ -{old_start},{old_count} @@ maps to line {adjusted} but the file has {live} live lines"
    )]
    HunkOutOfBounds {
        old_start: usize,
        old_count: usize,
        adjusted: usize,
        live: usize,
    },
    #[error("hunk body does not match its header counts")]
    InconsistentHunk,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct FileCounters {
    pub births: u64,
    pub deaths: u64,
    pub modifications: u64,
    /// Hunks whose leading context overlapped an already processed region.
    pub overlap_skips: u64,
    /// Context or deletion lines whose text differed from the tracked line.
    pub content_mismatches: u64,
}

#[derive(Debug, Clone, Default)]
pub struct FileState {
    pub file_lines: Vec<TrackedLine>,
    pub dead_lines: Vec<TrackedLine>,
    pub line_offsets: LineOffsets,
    pub max_processed_index: usize,
    pub counters: FileCounters,
    next_slot: u64,
}

impl FileState {
    pub fn new() -> Self {
        Self::default()
    }

    /// A new state whose lines are fresh births carrying the live content of
    /// `source`; used for copied files.
    pub fn copied_from(source: &FileState, commit: &CommitStamp) -> Self {
        Self::born_from(
            source
                .file_lines
                .iter()
                .map(|l| (l.content.clone(), l.newline)),
            commit,
        )
    }

    /// A new state holding `lines` (content, trailing newline), all born in
    /// `commit`.
    pub fn born_from<I: IntoIterator<Item = (Vec<u8>, bool)>>(
        lines: I,
        commit: &CommitStamp,
    ) -> Self {
        let mut state = FileState::new();
        for (text, had_newline) in lines {
            let hunk_line = HunkLine {
                kind: LineKind::Addition,
                text,
                had_newline,
            };
            let slot = state.allocate_slot();
            state
                .file_lines
                .push(TrackedLine::born(slot, &hunk_line, commit));
            state.counters.births += 1;
        }
        state
    }

    /// Resets per-commit bookkeeping. Hunk coordinates of the next commit are
    /// already relative to the fully applied previous commit.
    pub fn begin_commit(&mut self) {
        self.line_offsets.clear();
        self.max_processed_index = 0;
    }

    fn allocate_slot(&mut self) -> SlotId {
        let id = SlotId(self.next_slot);
        self.next_slot += 1;
        id
    }

    pub fn apply_hunk(&mut self, hunk: &Hunk, commit: &CommitStamp) -> Result<(), TrackError> {
        if hunk.recount() != (hunk.old_count, hunk.new_count) {
            return Err(TrackError::InconsistentHunk);
        }
        let out_of_bounds = |adjusted: usize, live: usize| TrackError::HunkOutOfBounds {
            old_start: hunk.old_start,
            old_count: hunk.old_count,
            adjusted,
            live,
        };
        let raw = if hunk.old_count == 0 {
            hunk.old_start
        } else {
            hunk.old_start
                .checked_sub(1)
                .ok_or_else(|| out_of_bounds(0, self.file_lines.len()))?
        };
        let mut start = adjust_position(&self.line_offsets, raw);
        let mut body: &[HunkLine] = &hunk.lines;
        let mut old_count = hunk.old_count;

        if start < self.max_processed_index {
            let overlap = self.max_processed_index - start;
            let leading_context = body
                .iter()
                .take_while(|l| l.kind == LineKind::Context)
                .count();
            if leading_context < overlap {
                return Err(out_of_bounds(start, self.file_lines.len()));
            }
            body = &body[overlap..];
            start += overlap;
            old_count -= overlap;
            self.counters.overlap_skips += 1;
        }
        if start + old_count > self.file_lines.len() {
            return Err(out_of_bounds(start, self.file_lines.len()));
        }

        let mut old_lines = self
            .file_lines
            .drain(start..start + old_count)
            .collect::<Vec<_>>()
            .into_iter();
        let mut replacement = Vec::with_capacity(body.len());
        let mut i = 0;
        while i < body.len() {
            if body[i].kind == LineKind::Context {
                let line = old_lines.next().expect("hunk counts validated");
                if line.content != body[i].text {
                    self.counters.content_mismatches += 1;
                }
                replacement.push(line);
                i += 1;
                continue;
            }
            let del_end = i + body[i..]
                .iter()
                .take_while(|l| l.kind == LineKind::Deletion)
                .count();
            let add_end = del_end
                + body[del_end..]
                    .iter()
                    .take_while(|l| l.kind == LineKind::Addition)
                    .count();
            let mut deletions = Vec::with_capacity(del_end - i);
            for expected in &body[i..del_end] {
                let line = old_lines.next().expect("hunk counts validated");
                if line.content != expected.text {
                    self.counters.content_mismatches += 1;
                }
                deletions.push(line);
            }
            let additions: Vec<&HunkLine> = body[del_end..add_end].iter().collect();

            let pairing = pair_edits(deletions, additions);
            for (mut line, added) in pairing.pairs {
                line.modify(added, commit);
                self.counters.modifications += 1;
                replacement.push(line);
            }
            for mut line in pairing.deaths {
                line.death_ts = Some(commit.timestamp);
                self.counters.deaths += 1;
                self.dead_lines.push(line);
            }
            for added in pairing.births {
                let slot = self.allocate_slot();
                self.counters.births += 1;
                replacement.push(TrackedLine::born(slot, added, commit));
            }
            i = add_end;
        }

        let written = replacement.len();
        self.file_lines.splice(start..start, replacement);
        self.line_offsets
            .record(raw, hunk.new_count as isize - hunk.old_count as isize);
        self.max_processed_index = start + written;
        Ok(())
    }

    /// Kills every live line, as when the file is deleted.
    pub fn kill_all(&mut self, timestamp: i64) {
        for mut line in self.file_lines.drain(..) {
            line.death_ts = Some(timestamp);
            self.counters.deaths += 1;
            self.dead_lines.push(line);
        }
    }

    pub fn reconstruct_snapshot(&self) -> Vec<Vec<u8>> {
        self.file_lines.iter().map(|l| l.content.clone()).collect()
    }

    /// The file's bytes as of the last applied commit.
    pub fn render(&self) -> Vec<u8> {
        let mut out = Vec::new();
        for line in &self.file_lines {
            out.extend_from_slice(&line.content);
            if line.newline {
                out.push(b'\n');
            }
        }
        out
    }

    /// One row per live line, numbered from 1.
    pub fn finalize(&self) -> Vec<LineReport> {
        self.file_lines
            .iter()
            .enumerate()
            .map(|(i, line)| LineReport {
                line_number: i + 1,
                content: line.content.clone(),
                mod_count: line.mod_count(),
                birth_ts: line.birth_ts,
                commit_hashes: line.history.iter().map(|r| r.commit.to_string()).collect(),
                timestamps: line.history.iter().map(|r| r.timestamp).collect(),
            })
            .collect()
    }
}
