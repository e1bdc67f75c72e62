use std::collections::VecDeque;
use std::io::BufRead;

use super::{
    CommitHeader, FileChange, FileDiffHeader, Hunk, HunkLine, LineKind, LogEvent, ParseError,
    SkipReason,
};

const UNIT_SEPARATOR: char = '\x1f';

/// Parses `@@ -X,Y +A,B @@ [section]` into `(X, Y, A, B)`.
///
/// Omitted counts default to 1.
pub fn parse_hunk_header(line: &str) -> Result<(usize, usize, usize, usize), ParseError> {
    let malformed = || ParseError::MalformedHunkHeader {
        offset: 0,
        line: line.to_string(),
    };
    let rest = line.strip_prefix("@@ ").ok_or_else(malformed)?;
    let close = rest.find(" @@").ok_or_else(malformed)?;
    let ranges = &rest[..close];
    let after = &rest[close + 3..];
    if !(after.is_empty() || after.starts_with(' ')) {
        return Err(malformed());
    }
    let mut parts = ranges.split(' ');
    let old = parts
        .next()
        .and_then(|p| p.strip_prefix('-'))
        .ok_or_else(malformed)?;
    let new = parts
        .next()
        .and_then(|p| p.strip_prefix('+'))
        .ok_or_else(malformed)?;
    if parts.next().is_some() {
        return Err(malformed());
    }
    let (x, y) = parse_range(old).ok_or_else(malformed)?;
    let (a, b) = parse_range(new).ok_or_else(malformed)?;
    Ok((x, y, a, b))
}

fn parse_range(s: &str) -> Option<(usize, usize)> {
    let digits = |t: &str| -> Option<usize> {
        if t.is_empty() || !t.bytes().all(|b| b.is_ascii_digit()) {
            return None;
        }
        t.parse().ok()
    };
    match s.split_once(',') {
        Some((start, count)) => Some((digits(start)?, digits(count)?)),
        None => Some((digits(s)?, 1)),
    }
}

/// Parses `commit <hash> <ts> \x1fan\x1fae\x1fcn\x1fce`.
pub fn parse_commit_line(line: &str) -> Result<CommitHeader, ParseError> {
    let malformed = || ParseError::MalformedCommitLine {
        offset: 0,
        line: line.to_string(),
    };
    let mut fields = line.split(UNIT_SEPARATOR);
    let head = fields.next().ok_or_else(malformed)?;
    let mut words = head.split_whitespace();
    if words.next() != Some("commit") {
        return Err(malformed());
    }
    let hash = words.next().ok_or_else(malformed)?;
    let ts = words.next().ok_or_else(malformed)?;
    if words.next().is_some() || hash.is_empty() || !hash.bytes().all(|b| b.is_ascii_hexdigit()) {
        return Err(malformed());
    }
    let committer_timestamp: i64 = ts.parse().map_err(|_| malformed())?;
    if committer_timestamp <= 0 {
        return Err(malformed());
    }
    let ident: Vec<&str> = fields.collect();
    if ident.len() != 4 {
        return Err(malformed());
    }
    Ok(CommitHeader {
        hash: hash.to_string(),
        committer_timestamp,
        author_name: ident[0].to_string(),
        author_email: ident[1].to_string(),
        committer_name: ident[2].to_string(),
        committer_email: ident[3].to_string(),
    })
}

#[derive(Debug)]
struct OpenHunk {
    hunk: Hunk,
    old_left: usize,
    new_left: usize,
}

#[derive(Debug)]
struct PendingFile {
    header: FileDiffHeader,
    emitted: bool,
    skipped: bool,
}

/// Push-mode state machine over the lines of a patch stream.
///
/// Lines are fed without their trailing `\n`. Completed hunks are held back
/// for one line so that a trailing `\ No newline at end of file` marker can
/// still be attached to them.
#[derive(Debug, Default)]
pub struct LogParser {
    offset: u64,
    partial: Vec<u8>,
    seen_commit: bool,
    file: Option<PendingFile>,
    open: Option<OpenHunk>,
    finished: Option<Hunk>,
    ended: bool,
}

impl LogParser {
    pub fn new() -> Self {
        Self::default()
    }

    /// Feeds an arbitrary chunk of bytes; incomplete trailing lines are kept
    /// until the next call or `finish`.
    pub fn feed(&mut self, bytes: &[u8], out: &mut Vec<LogEvent>) -> Result<(), ParseError> {
        let mut rest = bytes;
        while let Some(pos) = rest.iter().position(|&b| b == b'\n') {
            if self.partial.is_empty() {
                self.feed_line(&rest[..pos], out)?;
            } else {
                let mut line = std::mem::take(&mut self.partial);
                line.extend_from_slice(&rest[..pos]);
                self.feed_line(&line, out)?;
            }
            rest = &rest[pos + 1..];
        }
        self.partial.extend_from_slice(rest);
        Ok(())
    }

    pub fn feed_line(&mut self, line: &[u8], out: &mut Vec<LogEvent>) -> Result<(), ParseError> {
        let offset = self.offset;
        self.offset += line.len() as u64 + 1;

        if let Some(open) = self.open.as_mut() {
            let kind = match line.first() {
                None | Some(b' ') => LineKind::Context,
                Some(b'-') => LineKind::Deletion,
                Some(b'+') => LineKind::Addition,
                Some(b'\\') => {
                    if let Some(last) = open.hunk.lines.last_mut() {
                        last.had_newline = false;
                    }
                    return Ok(());
                }
                Some(_) => return Err(hunk_line_error(offset, line)),
            };
            let (old_dec, new_dec) = match kind {
                LineKind::Context => (1, 1),
                LineKind::Deletion => (1, 0),
                LineKind::Addition => (0, 1),
            };
            if open.old_left < old_dec || open.new_left < new_dec {
                return Err(hunk_line_error(offset, line));
            }
            open.old_left -= old_dec;
            open.new_left -= new_dec;
            open.hunk.lines.push(HunkLine {
                kind,
                text: line.get(1..).unwrap_or_default().to_vec(),
                had_newline: true,
            });
            if open.old_left == 0 && open.new_left == 0 {
                self.finished = self.open.take().map(|o| o.hunk);
            }
            return Ok(());
        }

        if let Some(hunk) = self.finished.as_mut() {
            if line.first() == Some(&b'\\') {
                if let Some(last) = hunk.lines.last_mut() {
                    last.had_newline = false;
                }
                return Ok(());
            }
            out.push(LogEvent::HunkEvent(self.finished.take().unwrap()));
        }

        if line.starts_with(b"commit ") {
            self.close_file(out);
            let text = String::from_utf8_lossy(line);
            let header = parse_commit_line(&text).map_err(|e| with_offset(e, offset))?;
            self.seen_commit = true;
            out.push(LogEvent::CommitStart(header));
            return Ok(());
        }
        if line.is_empty() {
            return Ok(());
        }
        if !self.seen_commit {
            return Err(ParseError::MalformedCommitLine {
                offset,
                line: String::from_utf8_lossy(line).into_owned(),
            });
        }
        if let Some(rest) = line.strip_prefix(b"diff --git ") {
            self.close_file(out);
            let (old_path, new_path) = split_diff_paths(&String::from_utf8_lossy(rest));
            self.file = Some(PendingFile {
                header: FileDiffHeader {
                    old_path,
                    new_path,
                    change: FileChange::Modified,
                    is_binary: false,
                    is_rename_or_copy: false,
                },
                emitted: false,
                skipped: false,
            });
            return Ok(());
        }

        let Some(file) = self.file.as_mut() else {
            if let Some(header) = parse_name_status(line) {
                out.push(LogEvent::FileStart(header));
            }
            return Ok(());
        };
        if file.skipped {
            return Ok(());
        }
        if line.starts_with(b"@@") {
            let text = String::from_utf8_lossy(line);
            let (x, y, a, b) = parse_hunk_header(&text).map_err(|e| with_offset(e, offset))?;
            if !file.emitted {
                file.emitted = true;
                out.push(LogEvent::FileStart(file.header.clone()));
            }
            let hunk = Hunk {
                old_start: x,
                old_count: y,
                new_start: a,
                new_count: b,
                lines: Vec::with_capacity(y.max(b).min(1 << 16)),
            };
            if y == 0 && b == 0 {
                self.finished = Some(hunk);
            } else {
                self.open = Some(OpenHunk {
                    hunk,
                    old_left: y,
                    new_left: b,
                });
            }
            return Ok(());
        }
        if file.emitted {
            // Only hunks follow once the header has been emitted.
            return Ok(());
        }
        apply_extended_header(file, line, out);
        Ok(())
    }

    /// Flushes held state and emits `StreamEnd`.
    pub fn finish(&mut self, out: &mut Vec<LogEvent>) -> Result<(), ParseError> {
        if self.ended {
            return Ok(());
        }
        if !self.partial.is_empty() {
            let line = std::mem::take(&mut self.partial);
            self.feed_line(&line, out)?;
        }
        if self.open.is_some() {
            return Err(ParseError::TruncatedStream);
        }
        if let Some(h) = self.finished.take() {
            out.push(LogEvent::HunkEvent(h));
        }
        self.close_file(out);
        self.ended = true;
        out.push(LogEvent::StreamEnd);
        Ok(())
    }

    fn close_file(&mut self, out: &mut Vec<LogEvent>) {
        if let Some(file) = self.file.take() {
            if !file.emitted {
                out.push(LogEvent::FileStart(file.header));
            }
        }
    }
}

fn apply_extended_header(file: &mut PendingFile, line: &[u8], out: &mut Vec<LogEvent>) {
    let text = String::from_utf8_lossy(line);
    let header = &mut file.header;
    if text.starts_with("new file mode") {
        header.change = FileChange::Added;
    } else if text.starts_with("deleted file mode") {
        header.change = FileChange::Deleted;
    } else if let Some(p) = text.strip_prefix("rename from ") {
        header.old_path = unquote(p);
        header.change = FileChange::Renamed;
        header.is_rename_or_copy = true;
    } else if let Some(p) = text.strip_prefix("rename to ") {
        header.new_path = unquote(p);
        header.change = FileChange::Renamed;
        header.is_rename_or_copy = true;
    } else if let Some(p) = text.strip_prefix("copy from ") {
        header.old_path = unquote(p);
        header.change = FileChange::Copied;
        header.is_rename_or_copy = true;
    } else if let Some(p) = text.strip_prefix("copy to ") {
        header.new_path = unquote(p);
        header.change = FileChange::Copied;
        header.is_rename_or_copy = true;
    } else if let Some(p) = text.strip_prefix("--- ") {
        if let Some(path) = strip_side_prefix(p, "a/") {
            header.old_path = path;
        }
    } else if let Some(p) = text.strip_prefix("+++ ") {
        if let Some(path) = strip_side_prefix(p, "b/") {
            header.new_path = path;
        }
    } else if text.starts_with("Binary files ") || text.starts_with("GIT binary patch") {
        header.is_binary = true;
        file.emitted = true;
        file.skipped = true;
        out.push(LogEvent::FileStart(header.clone()));
        out.push(LogEvent::FileSkipped(SkipReason::Binary));
    }
}

fn strip_side_prefix(p: &str, prefix: &str) -> Option<String> {
    let p = p.trim_end_matches('\t');
    if p == "/dev/null" {
        return None;
    }
    let unquoted = unquote(p);
    Some(
        unquoted
            .strip_prefix(prefix)
            .map(str::to_string)
            .unwrap_or(unquoted),
    )
}

fn parse_name_status(line: &[u8]) -> Option<FileDiffHeader> {
    let text = String::from_utf8_lossy(line);
    let mut fields = text.split('\t');
    let status = fields.next()?;
    let code = status.chars().next()?;
    if !status[1..].bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    let first = unquote(fields.next()?);
    let second = fields.next().map(unquote);
    let (change, old_path, new_path) = match (code, second) {
        ('A', None) => (FileChange::Added, first.clone(), first),
        ('M' | 'T', None) => (FileChange::Modified, first.clone(), first),
        ('D', None) => (FileChange::Deleted, first.clone(), first),
        ('R', Some(to)) => (FileChange::Renamed, first, to),
        ('C', Some(to)) => (FileChange::Copied, first, to),
        _ => return None,
    };
    Some(FileDiffHeader {
        is_rename_or_copy: matches!(change, FileChange::Renamed | FileChange::Copied),
        old_path,
        new_path,
        change,
        is_binary: false,
    })
}

/// Splits the `a/<old> b/<new>` part of a `diff --git` line.
fn split_diff_paths(rest: &str) -> (String, String) {
    let strip = |s: &str, prefix: &str| s.strip_prefix(prefix).unwrap_or(s).to_string();
    if rest.starts_with('"') {
        if let Some(end) = quoted_end(rest) {
            let old = unquote(&rest[..end]);
            let new = unquote(rest[end..].trim_start());
            return (strip(&old, "a/"), strip(&new, "b/"));
        }
    }
    if let Some(idx) = rest.find(" \"b/") {
        let old = unquote(&rest[..idx]);
        let new = unquote(&rest[idx + 1..]);
        return (strip(&old, "a/"), strip(&new, "b/"));
    }
    // Unquoted and ambiguous when paths contain " b/": prefer the split that
    // yields identical halves, which is the overwhelmingly common case.
    let bytes = rest.as_bytes();
    if bytes.len() % 2 == 1 {
        let mid = bytes.len() / 2;
        if rest.is_char_boundary(mid) && bytes[mid] == b' ' {
            let (a, b) = (&rest[..mid], &rest[mid + 1..]);
            if a.strip_prefix("a/")
                .is_some_and(|x| Some(x) == b.strip_prefix("b/"))
            {
                return (strip(a, "a/"), strip(b, "b/"));
            }
        }
    }
    match rest.rfind(" b/") {
        Some(idx) => (strip(&rest[..idx], "a/"), strip(&rest[idx + 1..], "b/")),
        None => (rest.to_string(), rest.to_string()),
    }
}

fn quoted_end(s: &str) -> Option<usize> {
    let bytes = s.as_bytes();
    let mut i = 1;
    while i < bytes.len() {
        match bytes[i] {
            b'\\' => i += 2,
            b'"' => return Some(i + 1),
            _ => i += 1,
        }
    }
    None
}

/// Undoes git's C-style path quoting; unquoted input is returned as is.
fn unquote(s: &str) -> String {
    let s = s.trim_end_matches('\t');
    let Some(inner) = s.strip_prefix('"').and_then(|x| x.strip_suffix('"')) else {
        return s.to_string();
    };
    let bytes = inner.as_bytes();
    let mut out = Vec::with_capacity(bytes.len());
    let mut i = 0;
    while i < bytes.len() {
        if bytes[i] != b'\\' || i + 1 >= bytes.len() {
            out.push(bytes[i]);
            i += 1;
            continue;
        }
        let c = bytes[i + 1];
        i += 2;
        match c {
            b'n' => out.push(b'\n'),
            b't' => out.push(b'\t'),
            b'r' => out.push(b'\r'),
            b'a' => out.push(0x07),
            b'b' => out.push(0x08),
            b'f' => out.push(0x0c),
            b'v' => out.push(0x0b),
            b'0'..=b'7' => {
                let mut value = u32::from(c - b'0');
                let mut digits = 1;
                while digits < 3 && i < bytes.len() && (b'0'..=b'7').contains(&bytes[i]) {
                    value = value * 8 + u32::from(bytes[i] - b'0');
                    i += 1;
                    digits += 1;
                }
                out.push(value as u8);
            }
            other => out.push(other),
        }
    }
    String::from_utf8_lossy(&out).into_owned()
}

fn hunk_line_error(offset: u64, line: &[u8]) -> ParseError {
    ParseError::MalformedHunkLine {
        offset,
        line: String::from_utf8_lossy(line).into_owned(),
    }
}

fn with_offset(err: ParseError, at: u64) -> ParseError {
    match err {
        ParseError::MalformedCommitLine { line, .. } => {
            ParseError::MalformedCommitLine { offset: at, line }
        }
        ParseError::MalformedHunkHeader { line, .. } => {
            ParseError::MalformedHunkHeader { offset: at, line }
        }
        other => other,
    }
}

/// Pull-mode iterator over the events of a patch stream.
pub struct LogEvents<R> {
    reader: R,
    parser: LogParser,
    queue: VecDeque<LogEvent>,
    scratch: Vec<LogEvent>,
    buf: Vec<u8>,
    done: bool,
}

/// Streams events from `reader`; memory use is bounded by the largest hunk.
pub fn parse_log_stream<R: BufRead>(reader: R) -> LogEvents<R> {
    LogEvents {
        reader,
        parser: LogParser::new(),
        queue: VecDeque::new(),
        scratch: Vec::new(),
        buf: Vec::new(),
        done: false,
    }
}

impl<R: BufRead> LogEvents<R> {
    fn pump(&mut self) -> Result<(), ParseError> {
        self.buf.clear();
        let n = self.reader.read_until(b'\n', &mut self.buf)?;
        if n == 0 {
            self.done = true;
            self.parser.finish(&mut self.scratch)?;
        } else {
            let line = self.buf.strip_suffix(b"\n").unwrap_or(&self.buf);
            self.parser.feed_line(line, &mut self.scratch)?;
        }
        self.queue.extend(self.scratch.drain(..));
        Ok(())
    }
}

impl<R: BufRead> Iterator for LogEvents<R> {
    type Item = Result<LogEvent, ParseError>;

    fn next(&mut self) -> Option<Self::Item> {
        loop {
            if let Some(ev) = self.queue.pop_front() {
                return Some(Ok(ev));
            }
            if self.done {
                return None;
            }
            if let Err(e) = self.pump() {
                self.done = true;
                return Some(Err(e));
            }
        }
    }
}
