//! Acceptance checks. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any fails.

mod common;

use std::collections::BTreeMap;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::time::{Duration, Instant};

use common::golden::GOLDEN;
use common::oracle::{check_repo, move_block};
use common::*;
use lineheat::bots::{bot_share, bot_verdict, BotConfig, LabeledCommit};
use lineheat::churn::{detect_hotspot_files, summarize, HotspotThresholds};
use lineheat::classify::{
    chao1, classify_pair, cohens_kappa, Chao1Input, ClassifierConfig, Pattern, RevisionPair,
};
use lineheat::diff::{parse_log_stream, LogEvent, ParseError};
use lineheat::pipeline::{analyze_repo, AnalysisConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Check = fn() -> Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn snapshot_oracle() -> Result<String, String> {
    let start = Instant::now();
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut checks = 0;
    for seed in 0..60u64 {
        let n = 5 + (seed as usize * 7) % 36;
        let repo = build_repo(
            &dir.path().join(format!("r{seed}")),
            &random_history(1000 + seed, n),
        );
        checks += check_repo(&repo);
    }
    let elapsed = start.elapsed();
    ensure(elapsed < Duration::from_secs(120), || {
        format!("took {elapsed:?}")
    })?;
    Ok(format!(
        "60 repos, {checks} file snapshots equal, {:.1}s",
        elapsed.as_secs_f64()
    ))
}

fn move_semantics() -> Result<String, String> {
    let moves = [
        (2, 20),
        (20, 0),
        (10, 25),
        (0, 25),
        (25, 3),
        (12, 1),
        (3, 17),
    ];
    for (from, to) in moves {
        let got = move_block(from, to);
        ensure(got == (5, 5, 5), || {
            format!("move {from}->{to}: (deaths, births, fresh) = {got:?}")
        })?;
    }
    Ok(format!(
        "{}/{} fixtures: 5 deaths, 5 births, history length 1",
        moves.len(),
        moves.len()
    ))
}

fn chao1_exactness() -> Result<String, String> {
    let est = chao1(Chao1Input {
        s_obs: 15,
        f1: 2,
        f2: 3,
    });
    ensure((est - 15.666_666_666_666_666).abs() < 1e-9, || {
        format!("chao1(15,2,3) = {est}")
    })?;
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..10_000 {
        let s = rng.random_range(0..100_000u64);
        let f2 = rng.random_range(0..=s);
        let got = chao1(Chao1Input {
            s_obs: s,
            f1: 0,
            f2,
        });
        ensure(got == s as f64, || format!("chao1({s},0,{f2}) = {got}"))?;
    }
    Ok(format!(
        "chao1(15,2,3) = {est:.4}; 10000 fuzzed f1=0 inputs return s_obs"
    ))
}

fn golden_taxonomy() -> Result<String, String> {
    let cfg = ClassifierConfig::default();
    let mut wrong = Vec::new();
    for g in GOLDEN {
        let pair = RevisionPair {
            before: g.before.as_bytes(),
            after: g.after.as_bytes(),
            ts_before: BASE_TS,
            ts_after: BASE_TS + DAY,
            file_category: g.category,
            path: g.path,
        };
        let got = classify_pair(&pair, &cfg).map(|c| c.pattern);
        if got != Ok(g.expected) {
            wrong.push(format!("{} -> {got:?}", g.expected));
        }
    }
    ensure(GOLDEN.len() >= 10 && wrong.is_empty(), || wrong.join("; "))?;
    Ok(format!(
        "{}/{} golden pairs exact",
        GOLDEN.len(),
        GOLDEN.len()
    ))
}

/// Mean and population σ by two passes in f64.
fn brute_force(counts: &[u64]) -> (f64, f64) {
    let n = counts.len() as f64;
    let mean = counts.iter().sum::<u64>() as f64 / n;
    let var = counts
        .iter()
        .map(|&c| (c as f64 - mean).powi(2))
        .sum::<f64>()
        / n;
    (mean, var.sqrt())
}

fn dual_filter() -> Result<String, String> {
    let t = HotspotThresholds::default();
    let mut details = Vec::new();
    for n_small in [19usize, 9] {
        let mut counts = BTreeMap::new();
        for i in 0..n_small {
            counts.insert(format!("f{i:02}"), 2u64);
        }
        counts.insert("outlier".to_string(), 100);
        let values: Vec<u64> = counts.values().copied().collect();
        let (mean, sd) = brute_force(&values);
        let expected: Vec<&String> = counts
            .iter()
            .filter(|&(_, &c)| c as f64 > mean + 3.0 * sd + 1e-9 && c as f64 > 12.0)
            .map(|(p, _)| p)
            .collect();
        let got = detect_hotspot_files(&counts, 12.0, &t).map_err(|e| e.to_string())?;
        let got: Vec<&String> = got.files.iter().collect();
        ensure(got == expected, || {
            format!("n={}: got {got:?}, brute force {expected:?}", n_small + 1)
        })?;
        details.push(format!(
            "n={} selects {} (mu+3sd={:.2})",
            n_small + 1,
            got.len(),
            mean + 3.0 * sd
        ));
    }
    Ok(details.join(", "))
}

fn bot_detection() -> Result<String, String> {
    let cfg = BotConfig::default();
    let names = [
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
    ];
    for n in names {
        ensure(bot_verdict(n, "noreply@example.com", &cfg).0, || {
            format!("{n} not flagged")
        })?;
    }
    ensure(
        !bot_verdict("Drobotov", "drobotov@example.com", &cfg).0,
        || "Drobotov flagged".into(),
    )?;
    let entry = |pattern, i: usize, is_bot| LabeledCommit {
        pattern,
        commit: format!("{i:040x}"),
        is_bot,
    };
    let all: Vec<_> = (0..1000)
        .map(|i| entry(Pattern::PinnedVersionBump, i, i < 739))
        .collect();
    let overall = bot_share(&all).overall.ratio;
    ensure((overall - 0.739).abs() < 1e-9, || {
        format!("overall share {overall}")
    })?;
    let meta: Vec<_> = (0..20)
        .map(|i| entry(Pattern::MetadataChange, i, i < 19))
        .collect();
    let share = bot_share(&meta).per_pattern[&Pattern::MetadataChange].ratio;
    ensure((share - 0.95).abs() < 1e-9, || {
        format!("metadata share {share}")
    })?;
    Ok(format!(
        "10/10 names flagged, allowlist honoured, shares {overall:.3} and {share:.2}"
    ))
}

fn quantile(sorted: &[f64], p: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

fn statistics_oracle() -> Result<String, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    for round in 0..1000 {
        let n = rng.random_range(1..300);
        let values: Vec<f64> = (0..n).map(|_| rng.random_range(-1e4..1e4)).collect();
        let mut sorted = values.clone();
        sorted.sort_by(f64::total_cmp);
        let mean = sorted.iter().sum::<f64>() / n as f64;
        let want = [
            sorted[0],
            quantile(&sorted, 0.5),
            mean,
            sorted[n - 1],
            quantile(&sorted, 0.75) - quantile(&sorted, 0.25),
        ];
        let s = summarize(&values).map_err(|e| e.to_string())?;
        let got = [s.min, s.median, s.mean, s.max, s.iqr];
        for (g, w) in got.iter().zip(want) {
            ensure((g - w).abs() <= 1e-9 * w.abs().max(1.0), || {
                format!("round {round}: {got:?} vs {want:?}")
            })?;
        }
    }
    Ok("1000 random vectors match the sort-based reference".into())
}

fn parser_round_trip() -> Result<String, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let mut stream = Vec::new();
    let mut expected = Vec::new();
    let mut commit = 0;
    while expected.len() < 10_000 {
        commit += 1;
        stream.extend_from_slice(
            format!(
                "commit c{commit} {} \x1fA\x1fa@x\x1fC\x1fc@x\n\n",
                BASE_TS + commit
            )
            .as_bytes(),
        );
        stream.extend_from_slice(b"diff --git a/f b/f\n--- a/f\n+++ b/f\n");
        for _ in 0..rng.random_range(1..6) {
            let (header, body, ranges) = random_hunk(&mut rng);
            stream.extend_from_slice(header.as_bytes());
            stream.push(b'\n');
            stream.extend_from_slice(&body);
            expected.push((body, ranges));
        }
    }
    let mut got = 0;
    for ev in parse_log_stream(stream.as_slice()) {
        if let LogEvent::HunkEvent(h) = ev.map_err(|e| e.to_string())? {
            let (body, ranges) = &expected[got];
            ensure(
                h.render_body() == *body
                    && [h.old_start, h.old_count, h.new_start, h.new_count] == *ranges,
                || format!("hunk {got} differs"),
            )?;
            got += 1;
        }
    }
    ensure(got == expected.len(), || {
        format!("parsed {got} of {} hunks", expected.len())
    })?;
    for bad in MALFORMED_HUNK_HEADERS {
        let input = format!("commit ab 17 \x1fa\x1fb\x1fc\x1fd\ndiff --git a/f b/f\n{bad}\n a\n");
        let res: Result<Vec<_>, _> = parse_log_stream(input.as_bytes()).collect();
        ensure(
            matches!(res, Err(ParseError::MalformedHunkHeader { .. })),
            || format!("{bad:?} gave {res:?}"),
        )?;
    }
    Ok(format!(
        "{got} hunks byte-identical, {} malformed headers rejected",
        MALFORMED_HUNK_HEADERS.len()
    ))
}

fn kappa() -> Result<String, String> {
    let (mut a, mut b) = (Vec::new(), Vec::new());
    for (x, y, n) in [("A", "A", 20), ("A", "B", 5), ("B", "A", 5), ("B", "B", 20)] {
        a.extend(std::iter::repeat_n(x, n));
        b.extend(std::iter::repeat_n(y, n));
    }
    let k = cohens_kappa(&a, &b).map_err(|e| e.to_string())?.kappa;
    ensure((k - 0.6).abs() < 1e-9, || format!("kappa {k}"))?;
    let same = cohens_kappa(&a, &a).map_err(|e| e.to_string())?.kappa;
    ensure(same == 1.0, || format!("identical lists gave {same}"))?;
    Ok(format!("2x2 fixture kappa {k:.4}, identical lists 1.0"))
}

fn run_analysis(repo: &Path, out: &Path) -> Result<lineheat::pipeline::RunManifest, String> {
    let mut config = AnalysisConfig::new(repo, out);
    config.emit_plot_data = true;
    analyze_repo(&config).map_err(|e| e.to_string())
}

fn performance() -> Result<String, String> {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let repo = build_repo(&dir.path().join("repo"), &large_history(11, 10_000, 200));
    let start = Instant::now();
    let m = run_analysis(&repo, &dir.path().join("out"))?;
    let elapsed = start.elapsed();
    ensure(
        m.stages.commits == 10_000 && m.stages.files_at_head == 200,
        || format!("{:?}", m.stages),
    )?;
    ensure(
        m.stages.dual_filter_files >= 1 && m.failures.is_empty(),
        || format!("{:?}", m.stages),
    )?;
    ensure(elapsed < Duration::from_secs(300), || {
        format!("took {elapsed:?}")
    })?;
    Ok(format!(
        "10000 commits, 200 files, {} hotspot files, {} hotspot lines in {:.1}s",
        m.stages.dual_filter_files,
        m.stages.hotspot_lines,
        elapsed.as_secs_f64()
    ))
}

fn outputs(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    let mut out = BTreeMap::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in std::fs::read_dir(&d).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else if p.file_name().is_some_and(|n| n != "manifest.json") {
                out.insert(
                    p.strip_prefix(dir).unwrap().display().to_string(),
                    std::fs::read(&p).unwrap(),
                );
            }
        }
    }
    out
}

fn determinism() -> Result<String, String> {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let repo = build_repo(&dir.path().join("repo"), &large_history(3, 3000, 100));
    run_analysis(&repo, &dir.path().join("a"))?;
    run_analysis(&repo, &dir.path().join("b"))?;
    let (a, b) = (
        outputs(&dir.path().join("a")),
        outputs(&dir.path().join("b")),
    );
    let line_files = a.keys().filter(|k| k.starts_with("lines")).count();
    ensure(line_files > 0 && a == b, || {
        format!("{} vs {} files, or contents differ", a.len(), b.len())
    })?;
    Ok(format!(
        "{} output files ({line_files} per-file line reports) byte-identical across runs",
        a.len()
    ))
}

fn main() {
    let checks: &[(&str, Check)] = &[
        ("snapshot-replay oracle", snapshot_oracle),
        ("move semantics", move_semantics),
        ("chao1 exactness", chao1_exactness),
        ("golden taxonomy fixtures", golden_taxonomy),
        ("dual-filter arithmetic", dual_filter),
        ("bot detection", bot_detection),
        ("statistics oracle", statistics_oracle),
        ("parser round-trip", parser_round_trip),
        ("kappa", kappa),
        ("desk-scale performance", performance),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (name, check) in checks {
        let result = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|p| {
            Err(p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panicked".into()))
        });
        match result {
            Ok(detail) => println!("PASS {name}: {detail}"),
            Err(detail) => {
                failed += 1;
                println!("FAIL {name}: {detail}");
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
