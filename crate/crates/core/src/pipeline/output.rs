use std::collections::BTreeMap;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;

use super::{AnalysisResults, PipelineError};
use crate::bots::ShareRow;
use crate::churn::{summarize, DescriptiveStats};
use crate::classify::{chao1_curve, Pattern};
use crate::track::write_line_reports;

/// Flattens a repository path into a single file name. `%` and `/` are
/// percent-encoded so distinct paths never collide.
pub fn escape_path(path: &str) -> String {
    path.replace('%', "%25").replace('/', "%2F")
}

#[derive(Serialize)]
struct Summary<'a> {
    files_at_head: usize,
    hotspot_files: usize,
    hotspot_bearing_files: usize,
    hotspot_file_fraction: f64,
    hotspot_lines: usize,
    bot_commit_share: f64,
    bot_line_edit_share: f64,
    labels: BTreeMap<&'a str, usize>,
    descriptive: Vec<(&'static str, Option<DescriptiveStats>)>,
}

fn writer(path: &Path) -> Result<csv::Writer<BufWriter<File>>, PipelineError> {
    Ok(csv::Writer::from_writer(BufWriter::new(File::create(
        path,
    )?)))
}

fn fmt(x: f64) -> String {
    if x.is_finite() {
        format!("{x}")
    } else {
        String::new()
    }
}

fn share_record(name: &str, row: &ShareRow) -> [String; 7] {
    [
        name.to_string(),
        row.bot_commits.to_string(),
        row.human_commits.to_string(),
        fmt(row.ratio),
        row.bot_line_edits.to_string(),
        row.human_line_edits.to_string(),
        fmt(row.line_edit_ratio),
    ]
}

/// Writes every report below `dir` and returns the written paths.
pub fn emit_reports(
    results: &AnalysisResults,
    dir: &Path,
    plot_data: bool,
) -> Result<Vec<PathBuf>, PipelineError> {
    let lines_dir = dir.join("lines");
    fs::create_dir_all(&lines_dir)?;
    let mut written = Vec::new();

    for f in results
        .files
        .iter()
        .filter(|f| f.failure.is_none() && !f.reports.is_empty())
    {
        let path = lines_dir.join(format!("{}.csv", escape_path(&f.path)));
        let mut out = BufWriter::new(File::create(&path)?);
        write_line_reports(&mut out, &f.reports)?;
        out.flush()?;
        written.push(path);
    }

    let path = dir.join("file_churn.csv");
    let mut w = writer(&path)?;
    w.write_record(["path", "commit_count", "category", "is_hotspot_file"])?;
    for c in &results.churn {
        w.write_record([
            c.path.as_str(),
            &c.commit_touch_count.to_string(),
            c.category.as_str(),
            if results.hotspot_files.contains(&c.path) {
                "true"
            } else {
                "false"
            },
        ])?;
    }
    w.flush()?;
    written.push(path);

    let hotspots: Vec<_> = results
        .files
        .iter()
        .flat_map(|f| f.hotspots.iter().map(move |h| (f, h)))
        .collect();
    let per_file: Vec<f64> = results
        .files
        .iter()
        .filter(|f| !f.hotspots.is_empty())
        .map(|f| f.hotspots.len() as f64)
        .collect();
    let days: Vec<f64> = hotspots.iter().map(|(_, h)| h.lifespan_days).collect();
    let years: Vec<f64> = days
        .iter()
        .map(|d| d / crate::churn::DAYS_PER_YEAR)
        .collect();
    let mods: Vec<f64> = hotspots.iter().map(|(_, h)| h.mod_count as f64).collect();
    let descriptive = vec![
        ("Hotspot lines/file", summarize(&per_file).ok()),
        ("Lifespan (years)", summarize(&years).ok()),
        ("Lifespan (days)", summarize(&days).ok()),
        ("Modification Count", summarize(&mods).ok()),
    ];
    let path = dir.join("summary_stats.csv");
    let mut w = writer(&path)?;
    w.write_record(["metric", "min", "median", "mean", "max", "iqr", "n"])?;
    for (name, stats) in &descriptive {
        match stats {
            Some(s) => w.write_record([
                name.to_string(),
                fmt(s.min),
                fmt(s.median),
                fmt(s.mean),
                fmt(s.max),
                fmt(s.iqr),
                s.n.to_string(),
            ])?,
            None => w.write_record([*name, "", "", "", "", "", "0"])?,
        }
    }
    w.flush()?;
    written.push(path);

    let path = dir.join("labels.csv");
    let mut w = writer(&path)?;
    w.write_record([
        "path",
        "line_number",
        "label",
        "category",
        "confidence",
        "heuristic",
        "oscillation",
        "diagnostics",
    ])?;
    for (f, h) in &hotspots {
        let diagnostics: Vec<&str> = h.diagnostics.iter().map(|p| p.name()).collect();
        w.write_record([
            f.path.as_str(),
            &h.line_number.to_string(),
            h.label.pattern.name(),
            h.label.category.name(),
            &format!("{:.1}", h.label.confidence),
            if h.heuristic { "true" } else { "false" },
            if h.oscillation { "true" } else { "false" },
            &diagnostics.join(";"),
        ])?;
    }
    w.flush()?;
    written.push(path);

    let path = dir.join("committers.csv");
    let mut w = writer(&path)?;
    w.write_record(["name", "email", "commit_count", "is_bot", "match_reason"])?;
    for c in &results.committers {
        w.write_record([
            c.name.as_str(),
            &c.email,
            &c.commit_count.to_string(),
            if c.is_bot { "true" } else { "false" },
            c.match_reason.as_deref().unwrap_or(""),
        ])?;
    }
    w.flush()?;
    written.push(path);

    let path = dir.join("bot_share.csv");
    let mut w = writer(&path)?;
    w.write_record([
        "pattern",
        "bot_commits",
        "human_commits",
        "ratio",
        "bot_line_edits",
        "human_line_edits",
        "line_edit_ratio",
    ])?;
    w.write_record(share_record("ALL", &results.bot_share.overall))?;
    for (p, row) in &results.bot_share.per_pattern {
        w.write_record(share_record(p.name(), row))?;
    }
    w.flush()?;
    written.push(path);

    let mut labels: BTreeMap<&str, usize> = BTreeMap::new();
    for (_, h) in &hotspots {
        *labels.entry(h.label.pattern.name()).or_default() += 1;
    }
    if plot_data {
        let typed: Vec<Pattern> = hotspots
            .iter()
            .map(|(_, h)| h.label.pattern)
            .filter(|p| p.is_hotspot_type())
            .collect();
        let path = dir.join("saturation.csv");
        let mut w = writer(&path)?;
        w.write_record(["k", "s_obs", "s_est"])?;
        for p in chao1_curve(&typed) {
            w.write_record([p.k.to_string(), p.s_obs.to_string(), fmt(p.s_est)])?;
        }
        w.flush()?;
        written.push(path);

        let path = dir.join("pattern_distribution.csv");
        let mut w = writer(&path)?;
        w.write_record(["pattern", "category", "lines", "share"])?;
        let total = hotspots.len().max(1) as f64;
        for p in Pattern::ALL {
            let n = labels.get(p.name()).copied().unwrap_or(0);
            w.write_record([
                p.name(),
                p.category().name(),
                &n.to_string(),
                &fmt(n as f64 / total),
            ])?;
        }
        w.flush()?;
        written.push(path);
    }

    let files_at_head = results.churn.len();
    let bearing = per_file.len();
    let summary = Summary {
        files_at_head,
        hotspot_files: results.hotspot_files.len(),
        hotspot_bearing_files: bearing,
        hotspot_file_fraction: if files_at_head == 0 {
            0.0
        } else {
            bearing as f64 / files_at_head as f64
        },
        hotspot_lines: hotspots.len(),
        bot_commit_share: results.bot_share.overall.ratio,
        bot_line_edit_share: results.bot_share.overall.line_edit_ratio,
        labels,
        descriptive,
    };
    let path = dir.join("summary.json");
    fs::write(&path, serde_json::to_vec_pretty(&summary)?)?;
    written.push(path);
    Ok(written)
}
