use std::collections::BTreeMap;
use std::path::Path;

use super::*;
use lineheat::diff::{parse_log_stream, LogEvent};
use lineheat::pipeline::Git;
use lineheat::track::HistoryReplay;

/// Replays the whole first-parent history of `repo` and compares every
/// tracked file against git's own content after each commit. Returns the
/// number of (commit, file) comparisons.
pub fn check_repo(repo: &Path) -> usize {
    let git = Git::new("git", repo);
    let mut proc = git.patch_log(&[]).unwrap();
    let mut replay = HistoryReplay::new();
    let mut snapshots: Vec<BTreeMap<String, Vec<u8>>> = Vec::new();
    let take = |r: &HistoryReplay| r.files().map(|(p, s)| (p.clone(), s.render())).collect();
    let mut started = false;
    for ev in parse_log_stream(&mut proc.stdout) {
        let ev = ev.unwrap();
        if matches!(ev, LogEvent::CommitStart(_)) {
            if started {
                snapshots.push(take(&replay));
            }
            started = true;
        }
        replay.handle(&ev);
    }
    snapshots.push(take(&replay));
    proc.finish().unwrap();
    assert!(replay.failures().is_empty(), "{:?}", replay.failures());

    let hashes = commit_hashes(repo);
    assert_eq!(hashes.len(), snapshots.len());
    let mut specs = Vec::new();
    let mut expected = Vec::new();
    for (hash, snap) in hashes.iter().zip(&snapshots) {
        for (path, content) in snap {
            specs.push(format!("{hash}:{path}"));
            expected.push((hash, path, content));
        }
    }
    let actual = cat_files(repo, &specs);
    for ((hash, path, content), real) in expected.iter().zip(&actual) {
        let real = real.clone().unwrap_or_default();
        assert_eq!(
            String::from_utf8_lossy(content),
            String::from_utf8_lossy(&real),
            "{path} at {hash}"
        );
    }
    // Every file git has at each commit is tracked.
    for (hash, snap) in hashes.iter().zip(&snapshots) {
        let listed = git_ls(repo, hash);
        for p in listed {
            assert!(snap.contains_key(&p), "{p} missing at {hash}");
        }
    }
    specs.len()
}

fn git_ls(repo: &Path, rev: &str) -> Vec<String> {
    String::from_utf8(git(repo, &["ls-tree", "-r", "--name-only", rev]))
        .unwrap()
        .lines()
        .map(String::from)
        .collect()
}

fn block_lines(n: usize, tag: &str) -> Vec<String> {
    (0..n).map(|i| format!("{tag} line {i}")).collect()
}

/// Moves an unmodified 5-line block and returns (deaths, births, reborn
/// lines with history length 1) caused by that commit.
pub fn move_block(from: usize, to: usize) -> (u64, u64, usize) {
    let mut lines = block_lines(30, "body");
    let before = lines.join("\n") + "\n";
    let block: Vec<String> = lines.drain(from..from + 5).collect();
    let to = to.min(lines.len());
    for (k, l) in block.iter().enumerate() {
        lines.insert(to + k, l.clone());
    }
    let after = lines.join("\n") + "\n";
    let dir = tempfile::tempdir().unwrap();
    let repo = build_repo(
        dir.path(),
        &[
            FixtureCommit::new(BASE_TS).put("m.txt", before),
            FixtureCommit::new(BASE_TS + DAY).put("m.txt", after.clone()),
        ],
    );
    let git = Git::new("git", &repo);
    let mut proc = git.patch_log(&["m.txt"]).unwrap();
    let replay = HistoryReplay::new()
        .replay(parse_log_stream(&mut proc.stdout))
        .unwrap();
    proc.finish().unwrap();
    let state = replay.file("m.txt").unwrap();
    assert_eq!(state.render(), after.as_bytes());
    let fresh = state
        .file_lines
        .iter()
        .filter(|l| block.iter().any(|b| b.as_bytes() == l.content.as_slice()))
        .filter(|l| l.history.len() == 1 && l.birth_ts == BASE_TS + DAY)
        .count();
    (state.counters.deaths, state.counters.births - 30, fresh)
}
