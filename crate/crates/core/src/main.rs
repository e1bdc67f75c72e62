use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use lineheat::bots::{BotConfig, IdentityRole};
use lineheat::churn::Deviation;
use lineheat::classify::cohens_kappa;
use lineheat::pipeline::{
    analyze_repo, read_label_file, AnalysisConfig, FileSample, PipelineError, TOOL_VERSION,
};
use lineheat::select::{
    assign_stratum, passes_inclusion, sample_stratified, GitHubClient, InclusionCriteria,
    DEFAULT_API_URL,
};

#[derive(Parser)]
#[command(
    name = "lineheat",
    version,
    about = "Find and classify line-level hotspots in git history"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Analyze one repository and write reports.
    Analyze(AnalyzeArgs),
    /// Filter and sample candidate repositories by hosting metadata.
    Select(SelectArgs),
    /// Agreement between two label files, joined on path and line number.
    Kappa {
        #[arg(long)]
        a: PathBuf,
        #[arg(long)]
        b: PathBuf,
    },
    /// Print tool and git versions.
    Version,
}

#[derive(Args)]
struct AnalyzeArgs {
    #[arg(long)]
    repo: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 3.0)]
    sigma: f64,
    #[arg(long, default_value_t = 1.0)]
    monthly_rate: f64,
    #[arg(long, default_value_t = 3)]
    min_line_mods: usize,
    /// Use the sample standard deviation instead of the population one.
    #[arg(long)]
    sample_sigma: bool,
    #[arg(long)]
    workers: Option<usize>,
    /// Line-track at most N hotspot files, drawn with --seed.
    #[arg(long, requires = "seed")]
    file_sample: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    bot_config: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = IdentityRole::Committer)]
    bot_identity: IdentityRole,
    /// CSV with path,line_number,label columns replacing heuristic labels.
    #[arg(long)]
    labels_override: Option<PathBuf>,
    /// Extra file category rules merged over the built-in table.
    #[arg(long)]
    category_table: Option<PathBuf>,
    #[arg(long)]
    emit_plot_data: bool,
    #[arg(long, default_value = "git")]
    git: PathBuf,
}

#[derive(Args)]
struct SelectArgs {
    /// File with one owner/name per line.
    #[arg(long)]
    repos: PathBuf,
    #[arg(long, default_value_t = 10_000)]
    min_commits: u64,
    #[arg(long, default_value_t = 11)]
    min_popularity: u64,
    #[arg(long)]
    per_stratum: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    cache_dir: Option<PathBuf>,
    #[arg(long, default_value = DEFAULT_API_URL)]
    api_url: String,
    #[arg(long, default_value_t = 4)]
    workers: usize,
    #[arg(long, env = "GITHUB_TOKEN", hide_env_values = true)]
    token: Option<String>,
    /// Write the selection here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn analyze(args: AnalyzeArgs) -> Result<i32> {
    let mut config = AnalysisConfig::new(args.repo, args.out);
    config.thresholds.sigma_multiplier = args.sigma;
    config.thresholds.monthly_rate = args.monthly_rate;
    config.thresholds.min_line_mods = args.min_line_mods;
    if args.sample_sigma {
        config.thresholds.deviation = Deviation::Sample;
    }
    if let Some(w) = args.workers {
        config.worker_count = w;
    }
    if let (Some(count), Some(seed)) = (args.file_sample, args.seed) {
        config.file_sample = Some(FileSample { count, seed });
    }
    if let Some(path) = &args.bot_config {
        config.bot_config = BotConfig::load(path)?;
    }
    config.identity = args.bot_identity;
    config.labels_override = args.labels_override;
    config.category_table = args.category_table;
    config.emit_plot_data = args.emit_plot_data;
    config.git_program = args.git;
    std::fs::create_dir_all(&config.output_dir)
        .with_context(|| format!("creating {}", config.output_dir.display()))?;

    let manifest = analyze_repo(&config)?;
    for w in &manifest.warnings {
        log::warn!("{w}");
    }
    for f in &manifest.failures {
        log::error!("{}: {}", f.path, f.error);
    }
    let s = &manifest.stages;
    println!(
        "{} commits, {} files, {} hotspot files, {} hotspot lines, {} failed",
        s.commits, s.files_at_head, s.dual_filter_files, s.hotspot_lines, s.files_failed
    );
    Ok(manifest.exit_code())
}

fn select(args: SelectArgs) -> Result<i32> {
    if args.per_stratum == 0 {
        bail!("--per-stratum must be at least 1");
    }
    let text = std::fs::read_to_string(&args.repos)
        .with_context(|| format!("reading {}", args.repos.display()))?;
    let names: Vec<String> = text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(String::from)
        .collect();
    let mut client = GitHubClient::new(&args.api_url, args.token)?;
    if let Some(dir) = args.cache_dir {
        client = client.with_cache_dir(dir);
    }
    let criteria = InclusionCriteria {
        min_stars_or_forks: args.min_popularity,
        min_commits: args.min_commits,
        ..InclusionCriteria::default()
    };
    let mut candidates = Vec::new();
    let mut errors = 0;
    for (name, result) in names
        .iter()
        .zip(client.fetch_many(&names, args.workers.max(1)))
    {
        let meta = match result {
            Ok(m) => m,
            Err(e) => {
                log::error!("{name}: {e}");
                errors += 1;
                continue;
            }
        };
        let (ok, failed) = passes_inclusion(&meta, &criteria);
        if !ok {
            log::info!("{name}: excluded ({})", failed.join(", "));
            continue;
        }
        match assign_stratum(meta.popularity()) {
            Some(stratum) => candidates.push((meta, stratum)),
            None => log::info!(
                "{name}: popularity {} outside all strata",
                meta.popularity()
            ),
        }
    }
    let sample = sample_stratified(&candidates, args.per_stratum, args.seed);
    for s in &sample.empty_strata {
        log::warn!("stratum {s} has no candidates");
    }
    let out: Box<dyn Write> = match &args.out {
        Some(p) => Box::new(std::fs::File::create(p)?),
        None => Box::new(std::io::stdout().lock()),
    };
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "repo",
        "stratum",
        "stars",
        "forks",
        "total_commits",
        "created_at",
    ])?;
    for m in &sample.selected {
        let stratum = assign_stratum(m.popularity())
            .map(|s| s.to_string())
            .unwrap_or_default();
        w.write_record([
            m.owner_and_name.as_str(),
            &stratum,
            &m.stars.to_string(),
            &m.forks.to_string(),
            &m.total_commits.to_string(),
            &m.created_at.to_rfc3339(),
        ])?;
    }
    w.flush()?;
    Ok(if errors > 0 { 2 } else { 0 })
}

fn kappa(a: PathBuf, b: PathBuf) -> Result<i32> {
    let read = |p: &PathBuf| -> Result<_> {
        let file = std::fs::File::open(p).with_context(|| format!("opening {}", p.display()))?;
        read_label_file(file).with_context(|| format!("reading {}", p.display()))
    };
    let left: std::collections::BTreeMap<_, _> = read(&a)?.into_iter().collect();
    let right: std::collections::HashMap<_, _> = read(&b)?.into_iter().collect();
    let (mut xs, mut ys) = (Vec::new(), Vec::new());
    for (key, label) in &left {
        if let Some(other) = right.get(key) {
            xs.push(*label);
            ys.push(*other);
        }
    }
    let k = cohens_kappa(&xs, &ys)?;
    println!("items\t{}", xs.len());
    println!("observed\t{:.4}", k.observed_agreement);
    println!("expected\t{:.4}", k.expected_agreement);
    println!("kappa\t{:.4}", k.kappa);
    Ok(0)
}

fn version() -> Result<i32> {
    println!("lineheat {TOOL_VERSION}");
    match lineheat::pipeline::Git::new("git", ".").version() {
        Ok(v) => println!("{v}"),
        Err(e) => println!("git unavailable: {e}"),
    }
    Ok(0)
}

fn main() -> ExitCode {
    let mut logger =
        env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn"));
    if std::env::var_os("NO_COLOR").is_some_and(|v| !v.is_empty()) {
        logger.write_style(env_logger::WriteStyle::Never);
    }
    logger.init();

    let cli = Cli::parse();
    let result = match cli.command {
        Command::Analyze(args) => analyze(args),
        Command::Select(args) => select(args),
        Command::Kappa { a, b } => kappa(a, b),
        Command::Version => version(),
    };
    match result {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            match e.downcast_ref::<PipelineError>() {
                Some(PipelineError::RepoNotFound(_) | PipelineError::EmptyRepository(_)) => {
                    eprintln!("error: {e}")
                }
                _ => eprintln!("error: {e:#}"),
            }
            ExitCode::from(1)
        }
    }
}
