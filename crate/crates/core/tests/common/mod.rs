#![allow(dead_code)]

use std::collections::BTreeMap;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::{Path, PathBuf};
use std::process::{Command, Stdio};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub mod golden;
pub mod oracle;

pub const BASE_TS: i64 = 1_600_000_000;
pub const DAY: i64 = 86_400;

#[derive(Debug, Clone)]
pub struct FixtureCommit {
    pub ts: i64,
    pub committer: (String, String),
    pub author: (String, String),
    /// `None` deletes the path.
    pub changes: Vec<(String, Option<Vec<u8>>)>,
}

impl FixtureCommit {
    pub fn new(ts: i64) -> Self {
        FixtureCommit {
            ts,
            committer: ("Ada".into(), "ada@example.org".into()),
            author: ("Ada".into(), "ada@example.org".into()),
            changes: Vec::new(),
        }
    }

    pub fn by(mut self, name: &str, email: &str) -> Self {
        self.committer = (name.into(), email.into());
        self
    }

    pub fn put(mut self, path: &str, content: impl Into<Vec<u8>>) -> Self {
        self.changes.push((path.into(), Some(content.into())));
        self
    }

    pub fn delete(mut self, path: &str) -> Self {
        self.changes.push((path.into(), None));
        self
    }
}

pub fn git(repo: &Path, args: &[&str]) -> Vec<u8> {
    let out = Command::new("git")
        .arg("-C")
        .arg(repo)
        .args(args)
        .output()
        .expect("run git");
    assert!(
        out.status.success(),
        "git {args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    out.stdout
}

/// Creates a repository at `dir` whose `main` branch holds `commits` in
/// order. Uses fast-import, so thousands of commits take well under a second.
pub fn build_repo(dir: &Path, commits: &[FixtureCommit]) -> PathBuf {
    std::fs::create_dir_all(dir).unwrap();
    git(dir, &["init", "-q"]);
    git(dir, &["symbolic-ref", "HEAD", "refs/heads/main"]);
    let mut child = Command::new("git")
        .arg("-C")
        .arg(dir)
        .args(["fast-import", "--quiet", "--done"])
        .stdin(Stdio::piped())
        .spawn()
        .expect("spawn fast-import");
    {
        let mut w = std::io::BufWriter::new(child.stdin.take().unwrap());
        for (i, c) in commits.iter().enumerate() {
            let msg = format!("commit {i}");
            write!(
                w,
                "commit refs/heads/main\nauthor {} <{}> {} +0000\ncommitter {} <{}> {} +0000\ndata {}\n{}\n",
                c.author.0,
                c.author.1,
                c.ts,
                c.committer.0,
                c.committer.1,
                c.ts,
                msg.len(),
                msg
            )
            .unwrap();
            for (path, content) in &c.changes {
                match content {
                    Some(bytes) => {
                        write!(w, "M 100644 inline {path}\ndata {}\n", bytes.len()).unwrap();
                        w.write_all(bytes).unwrap();
                        w.write_all(b"\n").unwrap();
                    }
                    None => writeln!(w, "D {path}").unwrap(),
                }
            }
            w.write_all(b"\n").unwrap();
        }
        w.write_all(b"done\n").unwrap();
    }
    assert!(child.wait().unwrap().success(), "fast-import failed");
    dir.to_path_buf()
}

/// First-parent commit hashes of HEAD, oldest first.
pub fn commit_hashes(repo: &Path) -> Vec<String> {
    String::from_utf8(git(
        repo,
        &["rev-list", "--first-parent", "--reverse", "HEAD"],
    ))
    .unwrap()
    .lines()
    .map(String::from)
    .collect()
}

/// Contents of `rev:path` objects via one `cat-file --batch` process;
/// `None` where the object is missing.
pub fn cat_files(repo: &Path, specs: &[String]) -> Vec<Option<Vec<u8>>> {
    let mut child = Command::new("git")
        .arg("-C")
        .arg(repo)
        .args(["cat-file", "--batch"])
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .spawn()
        .unwrap();
    let input: String = specs.iter().map(|s| format!("{s}\n")).collect();
    let mut stdin = child.stdin.take().unwrap();
    let writer = std::thread::spawn(move || stdin.write_all(input.as_bytes()).unwrap());
    let mut out = BufReader::new(child.stdout.take().unwrap());
    let mut result = Vec::new();
    for _ in specs {
        let mut header = String::new();
        out.read_line(&mut header).unwrap();
        if header.trim_end().ends_with("missing") {
            result.push(None);
            continue;
        }
        let size: usize = header.split_whitespace().nth(2).unwrap().parse().unwrap();
        let mut body = vec![0; size + 1];
        out.read_exact(&mut body).unwrap();
        body.pop();
        result.push(Some(body));
    }
    writer.join().unwrap();
    child.wait().unwrap();
    result
}

const WORDS: &[&str] = &[
    "alpha",
    "beta",
    "gamma",
    "delta",
    "x = 1",
    "return y;",
    "}",
    "{",
    "",
    "  call(a, b)",
    "# note",
    "version: 2",
];

fn random_line(rng: &mut ChaCha8Rng) -> Vec<u8> {
    let mut s = WORDS[rng.random_range(0..WORDS.len())].to_string();
    if rng.random_bool(0.5) {
        s.push_str(&format!(" {}", rng.random_range(0..50)));
    }
    s.into_bytes()
}

fn join(lines: &[Vec<u8>], trailing_newline: bool) -> Vec<u8> {
    let mut out = Vec::new();
    for (i, l) in lines.iter().enumerate() {
        out.extend_from_slice(l);
        if i + 1 < lines.len() || trailing_newline {
            out.push(b'\n');
        }
    }
    out
}

/// A random history of insertions, modifications and deletions over a few
/// files, including file deletions, re-creations and missing final newlines.
/// Lines never move within a file.
pub fn random_history(seed: u64, n_commits: usize) -> Vec<FixtureCommit> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let paths = ["a.txt", "src/b.rs", "c.cfg", "d/e/f.md"];
    let mut files: BTreeMap<&str, (Vec<Vec<u8>>, bool)> = BTreeMap::new();
    let mut commits = Vec::new();
    for i in 0..n_commits {
        let mut c = FixtureCommit::new(BASE_TS + i as i64 * DAY);
        let touched = rng.random_range(1..=2);
        let mut picked: Vec<&str> = Vec::new();
        for _ in 0..touched {
            let p = paths[rng.random_range(0..paths.len())];
            if !picked.contains(&p) {
                picked.push(p);
            }
        }
        for p in picked {
            if files.contains_key(p) && rng.random_bool(0.05) {
                files.remove(p);
                c = c.delete(p);
                continue;
            }
            let (lines, nl) = files.entry(p).or_insert_with(|| (Vec::new(), true));
            let ops = rng.random_range(1..=3);
            for _ in 0..ops {
                match rng.random_range(0..3) {
                    0 => {
                        let at = rng.random_range(0..=lines.len());
                        let n = rng.random_range(1..=4);
                        for k in 0..n {
                            lines.insert(at + k, random_line(&mut rng));
                        }
                    }
                    1 if !lines.is_empty() => {
                        let at = rng.random_range(0..lines.len());
                        let n = rng.random_range(1..=3).min(lines.len() - at);
                        for l in &mut lines[at..at + n] {
                            *l = random_line(&mut rng);
                        }
                    }
                    2 if lines.len() > 1 => {
                        let at = rng.random_range(0..lines.len());
                        let n = rng.random_range(1..=3).min(lines.len() - at);
                        lines.drain(at..at + n);
                    }
                    _ => lines.push(random_line(&mut rng)),
                }
            }
            if rng.random_bool(0.1) {
                *nl = !*nl;
            }
            c = c.put(p, join(lines, *nl));
        }
        commits.push(c);
    }
    commits
}

/// Twelve lines, of which only the second changes with `i`.
pub fn versions_file(i: usize) -> String {
    let mut s = format!("name = demo\nversion = \"1.0.{i}\"\n");
    for k in 0..10 {
        s.push_str(&format!("key{k} = value{k}\n"));
    }
    s
}

/// 40 commits, ten days apart. `hot` paths are rewritten in every commit
/// (a version line bumps each time); `n_cold` other files are created in the
/// first commit and edited once more. Odd commits are made by a bot.
pub fn planted_hotspot_history(hot: &[&str], n_cold: usize) -> Vec<FixtureCommit> {
    let mut commits = Vec::new();
    for i in 0..40 {
        let mut c = FixtureCommit::new(BASE_TS + i as i64 * 10 * DAY);
        if i % 2 == 1 {
            c = c.by(
                "dependabot[bot]",
                "49699333+dependabot[bot]@users.noreply.github.com",
            );
        }
        for h in hot {
            c = c.put(h, versions_file(i));
        }
        for k in 0..n_cold {
            let path = format!("src/mod{k:02}.py");
            if i == 0 {
                c = c.put(&path, format!("def f{k}():\n    return {k}\n"));
            } else if i == 1 + k % 39 {
                c = c.put(&path, format!("def f{k}():\n    return {}\n", k + 1));
            }
        }
        commits.push(c);
    }
    commits
}

/// A random hunk: (header line, body bytes, old/new ranges). Lines hold
/// arbitrary bytes other than `\n`; the last line may lack a newline.
pub fn random_hunk(rng: &mut ChaCha8Rng) -> (String, Vec<u8>, [usize; 4]) {
    let n = rng.random_range(1..=12);
    let mut body = Vec::new();
    let (mut old, mut new) = (0, 0);
    for i in 0..n {
        let kind = b" -+"[rng.random_range(0..3)];
        match kind {
            b' ' => {
                old += 1;
                new += 1;
            }
            b'-' => old += 1,
            _ => new += 1,
        }
        body.push(kind);
        let len = rng.random_range(0..40);
        for _ in 0..len {
            let mut b: u8 = rng.random();
            if b == b'\n' {
                b = b'~';
            }
            body.push(b);
        }
        body.push(b'\n');
        if i + 1 == n && rng.random_bool(0.1) {
            body.extend_from_slice(b"\\ No newline at end of file\n");
        }
    }
    let old_start = if old == 0 {
        rng.random_range(0..1000)
    } else {
        rng.random_range(1..1000)
    };
    let new_start = if new == 0 {
        rng.random_range(0..1000)
    } else {
        rng.random_range(1..1000)
    };
    let range = |start: usize, count: usize, rng: &mut ChaCha8Rng| {
        if count == 1 && rng.random_bool(0.5) {
            format!("{start}")
        } else {
            format!("{start},{count}")
        }
    };
    let mut header = format!(
        "@@ -{} +{} @@",
        range(old_start, old, rng),
        range(new_start, new, rng)
    );
    if rng.random_bool(0.3) {
        header.push_str(" fn section()");
    }
    (header, body, [old_start, old, new_start, new])
}

pub const MALFORMED_HUNK_HEADERS: &[&str] = &[
    "@@ -x +1 @@",
    "@@ -1,2 +1 @",
    "@@ 1,2 +1,2 @@",
    "@@ -1,2 1,2 @@",
    "@@ -,2 +1,2 @@",
    "@@ -1, +1 @@",
    "@@ -1,2 +1,2",
    "@@ -1,a +1,2 @@",
    "@@ +1,2 -1,2 @@",
    "@@ -1 -1 +1 @@",
    "@@ -99999999999999999999999 +1 @@",
    "@@ @@",
    "@@",
];

/// A large synthetic history: `n_files` files of about 40 lines, five of
/// which are edited in roughly 30% of commits while the rest see one random
/// edit per commit. Commits are one hour apart; every seventh is by a bot.
pub fn large_history(seed: u64, n_commits: usize, n_files: usize) -> Vec<FixtureCommit> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let paths: Vec<String> = (0..n_files)
        .map(|i| match i % 4 {
            0 => format!("src/m{i:03}.rs"),
            1 => format!("pkg/p{i:03}/setup.py"),
            2 => format!("conf/c{i:03}.yaml"),
            _ => format!("docs/d{i:03}.md"),
        })
        .collect();
    let mut contents: Vec<Vec<Vec<u8>>> = (0..n_files)
        .map(|f| {
            (0..40)
                .map(|l| format!("line {l} of file {f}").into_bytes())
                .collect()
        })
        .collect();
    let mut commits = Vec::with_capacity(n_commits);
    for i in 0..n_commits {
        let mut c = FixtureCommit::new(BASE_TS + i as i64 * 3600);
        if i % 7 == 3 {
            c = c.by("release-bot", "release-bot@example.org");
        }
        let mut touched: Vec<usize> = if i == 0 {
            (0..n_files).collect()
        } else {
            Vec::new()
        };
        if i > 0 {
            for hot in 0..5.min(n_files) {
                if rng.random_bool(0.3) {
                    touched.push(hot);
                }
            }
            touched.push(rng.random_range(5.min(n_files - 1)..n_files));
            touched.dedup();
        }
        for f in touched {
            let lines = &mut contents[f];
            if i > 0 {
                if f < 5 {
                    lines[3] = format!("version = \"2.{}.{}\"", i / 100, i % 100).into_bytes();
                }
                match rng.random_range(0..4) {
                    0 => {
                        let at = rng.random_range(0..=lines.len());
                        lines.insert(at, random_line(&mut rng));
                    }
                    1 if lines.len() > 20 => {
                        let at = rng.random_range(5..lines.len());
                        lines.remove(at);
                    }
                    _ => {
                        let at = rng.random_range(5..lines.len());
                        lines[at] = random_line(&mut rng);
                    }
                }
            }
            c = c.put(&paths[f], join(lines, true));
        }
        commits.push(c);
    }
    commits
}
