//! Parsing of `git log -p` patch streams into typed events.
//!
//! The stream is consumed line by line and never buffered as a whole: the
//! only state kept between lines is the pending file header and the hunk
//! currently being read.

mod parser;

pub use parser::{parse_commit_line, parse_hunk_header, parse_log_stream, LogEvents, LogParser};

use std::fmt;

use thiserror::Error;

/// Identity and timestamp line emitted by the configured pretty-format.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CommitHeader {
    pub hash: String,
    /// Committer timestamp, seconds since the Unix epoch.
    pub committer_timestamp: i64,
    pub author_name: String,
    pub author_email: String,
    pub committer_name: String,
    pub committer_email: String,
}

/// How a file changed in one commit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FileChange {
    Added,
    Modified,
    Deleted,
    Renamed,
    Copied,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FileDiffHeader {
    pub old_path: String,
    pub new_path: String,
    pub change: FileChange,
    pub is_binary: bool,
    pub is_rename_or_copy: bool,
}

impl FileDiffHeader {
    /// The path the file has after the commit.
    pub fn path(&self) -> &str {
        if self.change == FileChange::Deleted || self.new_path.is_empty() {
            &self.old_path
        } else {
            &self.new_path
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LineKind {
    Context,
    Deletion,
    Addition,
}

impl LineKind {
    pub fn marker(self) -> u8 {
        match self {
            LineKind::Context => b' ',
            LineKind::Deletion => b'-',
            LineKind::Addition => b'+',
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HunkLine {
    pub kind: LineKind,
    /// Raw bytes without the marker and without the trailing newline.
    pub text: Vec<u8>,
    pub had_newline: bool,
}

/// One `@@ -X,Y +A,B @@` region.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Hunk {
    pub old_start: usize,
    pub old_count: usize,
    pub new_start: usize,
    pub new_count: usize,
    pub lines: Vec<HunkLine>,
}

impl Hunk {
    /// Tallies of (context + deletions, context + additions) from the body.
    pub fn recount(&self) -> (usize, usize) {
        self.lines
            .iter()
            .fold((0, 0), |(old, new), l| match l.kind {
                LineKind::Context => (old + 1, new + 1),
                LineKind::Deletion => (old + 1, new),
                LineKind::Addition => (old, new + 1),
            })
    }

    /// Re-renders the hunk body exactly as it appears in a patch.
    pub fn render_body(&self) -> Vec<u8> {
        let mut out = Vec::new();
        for line in &self.lines {
            out.push(line.kind.marker());
            out.extend_from_slice(&line.text);
            out.push(b'\n');
            if !line.had_newline {
                out.extend_from_slice(b"\\ No newline at end of file\n");
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SkipReason {
    Binary,
}

impl fmt::Display for SkipReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SkipReason::Binary => f.write_str("binary"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LogEvent {
    CommitStart(CommitHeader),
    FileStart(FileDiffHeader),
    HunkEvent(Hunk),
    FileSkipped(SkipReason),
    StreamEnd,
}

#[derive(Debug, Error)]
pub enum ParseError {
    #[error("malformed commit line at byte {offset}: {line:?}")]
    MalformedCommitLine { offset: u64, line: String },
    #[error("malformed hunk header at byte {offset}: {line:?}")]
    MalformedHunkHeader { offset: u64, line: String },
    #[error("unexpected line inside hunk body at byte {offset}: {line:?}")]
    MalformedHunkLine { offset: u64, line: String },
    #[error("stream ended inside a hunk body")]
    TruncatedStream,
    #[error("read error: {0}")]
    Io(#[from] std::io::Error),
}
