//! Thin CLI over the library: each subcommand runs one pipeline stage with
//! file-based handoff, `run` executes the whole thing. A flat `key = value`
//! config file can supply any flag; explicit flags win.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use votepath::pipeline::{
    run_pipeline, stage_detect, stage_dot, stage_evaluate, stage_link, stage_profile,
    stage_report, stage_simulate_opinion, stage_simulate_temporal, stage_sweep, DetectOpts,
    DotOpts, EvaluateOpts, FileConfig, LinkOpts, PipelineError, ProfileOpts, ReportOpts,
    RunConfig, SimulateOpinionOpts, SimulateTemporalOpts, SweepOpts,
};
use votepath::simulation::{DomainPreference, SimConfig, TemporalPlantConfig};

#[derive(Parser)]
#[command(
    name = "votepath",
    version,
    about = "Detect, track, and profile evolving vote-based user communities"
)]
struct Cli {
    /// Flat `key = value` config file; command-line flags override it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the full pipeline and write every report into one directory.
    Run(RunArgs),
    /// Generate synthetic benchmark corpora.
    #[command(subcommand)]
    Simulate(SimulateCommand),
    /// Error-vs-sigma sweep of detection vs. k-means on the opinion benchmark.
    Sweep(SweepArgs),
    /// Detect per-window communities and dump partitions as JSON-lines.
    Detect(DetectArgs),
    /// Link consecutive windows into an evolution graph and extract paths.
    Link(LinkArgs),
    /// Profile communities (and optionally paths) by representative content.
    Profile(ProfileArgs),
    /// Score path source entropy against a vote-weighted random baseline.
    Evaluate(EvaluateArgs),
    /// Summarize paths as CSV with retention at 1, 2, 6, and 24 windows.
    Report(ReportArgs),
    /// Emit the evolution graph as Graphviz DOT, one rank per window.
    Dot(DotArgs),
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    votes: Option<PathBuf>,
    #[arg(long)]
    articles: Option<PathBuf>,
    #[arg(long)]
    out_dir: Option<PathBuf>,
    #[arg(long)]
    window_days: Option<i64>,
    #[arg(long)]
    step_days: Option<i64>,
    #[arg(long)]
    category: Option<String>,
    #[arg(long)]
    min_shared: Option<usize>,
    #[arg(long)]
    min_size: Option<usize>,
    #[arg(long)]
    secondary_threshold: Option<f64>,
    #[arg(long)]
    n_rep: Option<usize>,
    #[arg(long)]
    n_path_articles: Option<usize>,
    #[arg(long)]
    n_terms: Option<usize>,
    #[arg(long)]
    baseline_repetitions: Option<usize>,
    #[arg(long)]
    global_baseline: bool,
    #[arg(long)]
    stopwords: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum SimulateCommand {
    /// Planted temporal corpus: fixed-size communities with member churn.
    Temporal(SimulateTemporalArgs),
    /// One planted 2-D opinion-space generation in corpus formats.
    Opinion(SimulateOpinionArgs),
}

#[derive(Args)]
struct SimulateTemporalArgs {
    #[arg(long)]
    out_dir: Option<PathBuf>,
    #[arg(long)]
    windows: Option<usize>,
    /// Comma-separated community sizes, e.g. 100,100,100.
    #[arg(long, value_delimiter = ',')]
    community_sizes: Option<Vec<usize>>,
    #[arg(long)]
    churn: Option<f64>,
    #[arg(long)]
    articles_per_community: Option<usize>,
    #[arg(long)]
    vote_probability: Option<f64>,
    #[arg(long)]
    cross_vote_probability: Option<f64>,
    #[arg(long)]
    window_days: Option<i64>,
    #[arg(long)]
    category: Option<String>,
    /// Per-community domain probabilities (domains are auto-named), e.g.
    /// 0.5,0.3,0.2.
    #[arg(long, value_delimiter = ',')]
    domain_probs: Option<Vec<f64>>,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct SimulateOpinionArgs {
    #[arg(long)]
    out_dir: Option<PathBuf>,
    #[arg(long)]
    sigma: Option<f64>,
    #[arg(long)]
    users: Option<usize>,
    #[arg(long)]
    articles_per_user: Option<f64>,
    #[arg(long)]
    article_std: Option<f64>,
    #[arg(long)]
    vote_radius: Option<f64>,
    #[arg(long)]
    vote_probability: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct SweepArgs {
    /// Comma-separated sigma values.
    #[arg(long, value_delimiter = ',')]
    sigmas: Option<Vec<f64>>,
    #[arg(long)]
    runs: Option<usize>,
    #[arg(long)]
    users: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct DetectArgs {
    #[arg(long)]
    votes: Option<PathBuf>,
    #[arg(long)]
    articles: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    window_days: Option<i64>,
    #[arg(long)]
    step_days: Option<i64>,
    #[arg(long)]
    category: Option<String>,
    #[arg(long)]
    min_shared: Option<usize>,
    /// Detect only this window index.
    #[arg(long)]
    window: Option<usize>,
    /// Cut the merge dendrogram at peak Q instead of the first
    /// non-improving merge.
    #[arg(long)]
    peak_q: bool,
    /// Also dump each window's weighted user graph ("u v w" per line)
    /// into this directory.
    #[arg(long)]
    dump_graphs: Option<PathBuf>,
}

#[derive(Args)]
struct LinkArgs {
    #[arg(long)]
    partitions: Option<PathBuf>,
    #[arg(long)]
    evolution_out: Option<PathBuf>,
    #[arg(long)]
    paths_out: Option<PathBuf>,
    #[arg(long)]
    min_size: Option<usize>,
    #[arg(long)]
    secondary_threshold: Option<f64>,
}

#[derive(Args)]
struct ProfileArgs {
    #[arg(long)]
    votes: Option<PathBuf>,
    #[arg(long)]
    articles: Option<PathBuf>,
    #[arg(long)]
    partitions: Option<PathBuf>,
    #[arg(long)]
    paths: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    path_profiles_out: Option<PathBuf>,
    #[arg(long)]
    window_days: Option<i64>,
    #[arg(long)]
    step_days: Option<i64>,
    #[arg(long)]
    category: Option<String>,
    #[arg(long)]
    min_size: Option<usize>,
    #[arg(long)]
    n_rep: Option<usize>,
    #[arg(long)]
    n_path_articles: Option<usize>,
    #[arg(long)]
    n_terms: Option<usize>,
    #[arg(long)]
    stopwords: Option<PathBuf>,
}

#[derive(Args)]
struct EvaluateArgs {
    #[arg(long)]
    votes: Option<PathBuf>,
    #[arg(long)]
    articles: Option<PathBuf>,
    #[arg(long)]
    paths: Option<PathBuf>,
    #[arg(long)]
    path_profiles: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    window_days: Option<i64>,
    #[arg(long)]
    step_days: Option<i64>,
    #[arg(long)]
    category: Option<String>,
    #[arg(long)]
    repetitions: Option<usize>,
    /// Sample the baseline from all windows instead of each path's own.
    #[arg(long)]
    global_baseline: bool,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct ReportArgs {
    #[arg(long)]
    paths: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct DotArgs {
    #[arg(long)]
    partitions: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    min_size: Option<usize>,
    #[arg(long)]
    secondary_threshold: Option<f64>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = u8::from(e.use_stderr());
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            let mut source = std::error::Error::source(&e);
            while let Some(cause) = source {
                eprintln!("  caused by: {cause}");
                source = cause.source();
            }
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn require<T>(value: Option<T>, flag: &str) -> Result<T, PipelineError> {
    value.ok_or_else(|| PipelineError::Config(format!("missing required value: --{flag}")))
}

fn dispatch(cli: Cli) -> Result<(), PipelineError> {
    let file = match &cli.config {
        Some(path) => FileConfig::load(path)?,
        None => FileConfig::empty(),
    };
    match cli.command {
        Command::Run(args) => cmd_run(args, &file),
        Command::Simulate(SimulateCommand::Temporal(args)) => cmd_simulate_temporal(args, &file),
        Command::Simulate(SimulateCommand::Opinion(args)) => cmd_simulate_opinion(args, &file),
        Command::Sweep(args) => cmd_sweep(args, &file),
        Command::Detect(args) => cmd_detect(args, &file),
        Command::Link(args) => cmd_link(args, &file),
        Command::Profile(args) => cmd_profile(args, &file),
        Command::Evaluate(args) => cmd_evaluate(args, &file),
        Command::Report(args) => cmd_report(args, &file),
        Command::Dot(args) => cmd_dot(args, &file),
    }
}

fn cmd_run(args: RunArgs, file: &FileConfig) -> Result<(), PipelineError> {
    let votes = require(file.resolve_opt(args.votes, "votes")?, "votes")?;
    let articles = require(file.resolve_opt(args.articles, "articles")?, "articles")?;
    let out_dir = require(file.resolve_opt(args.out_dir, "out_dir")?, "out-dir")?;
    let mut cfg = RunConfig::new(votes, articles, out_dir);
    cfg.window_days = file.resolve(args.window_days, "window_days", cfg.window_days)?;
    cfg.step_days = file.resolve(args.step_days, "step_days", cfg.step_days)?;
    cfg.category = file.resolve_opt(args.category, "category")?;
    cfg.min_shared = file.resolve(args.min_shared, "min_shared", cfg.min_shared)?;
    cfg.min_size = file.resolve(args.min_size, "min_size", cfg.min_size)?;
    cfg.secondary_threshold = file.resolve(
        args.secondary_threshold,
        "secondary_threshold",
        cfg.secondary_threshold,
    )?;
    cfg.n_rep = file.resolve(args.n_rep, "n_rep", cfg.n_rep)?;
    cfg.n_path_articles = file.resolve(args.n_path_articles, "n_path_articles", cfg.n_path_articles)?;
    cfg.n_terms = file.resolve(args.n_terms, "n_terms", cfg.n_terms)?;
    cfg.baseline_repetitions = file.resolve(
        args.baseline_repetitions,
        "baseline_repetitions",
        cfg.baseline_repetitions,
    )?;
    cfg.global_baseline =
        args.global_baseline || file.get::<bool>("global_baseline")?.unwrap_or(false);
    cfg.stopwords_path = file.resolve_opt(args.stopwords, "stopwords")?;
    cfg.seed = file.resolve(args.seed, "seed", cfg.seed)?;

    let run = run_pipeline(&cfg)?;
    for warning in run.warnings.iter().take(10) {
        eprintln!("warning: {warning}");
    }
    if run.warnings.len() > 10 {
        eprintln!("warning: ... and {} more skipped rows", run.warnings.len() - 10);
    }
    println!(
        "{} windows, {} communities >= min_size, {} paths, {} evaluation rows",
        run.windows.len(),
        run.evolution.node_count(),
        run.paths.len(),
        run.evaluation.len()
    );
    for file in &run.output_files {
        println!("wrote {}", file.display());
    }
    Ok(())
}

fn cmd_simulate_temporal(
    args: SimulateTemporalArgs,
    file: &FileConfig,
) -> Result<(), PipelineError> {
    let out_dir = require(file.resolve_opt(args.out_dir, "out_dir")?, "out-dir")?;
    let windows = file.resolve(args.windows, "windows", 6)?;
    let community_sizes = args
        .community_sizes
        .or(file
            .get::<String>("community_sizes")?
            .map(|s| parse_list(&s, "community_sizes"))
            .transpose()?)
        .unwrap_or_else(|| vec![100, 100, 100]);
    let churn = file.resolve(args.churn, "churn", 0.1)?;
    let seed = file.resolve(args.seed, "seed", 0)?;
    let mut config = TemporalPlantConfig::new(windows, community_sizes, churn, seed);
    config.articles_per_community = file.resolve(
        args.articles_per_community,
        "articles_per_community",
        config.articles_per_community,
    )?;
    config.vote_probability =
        file.resolve(args.vote_probability, "vote_probability", config.vote_probability)?;
    config.cross_vote_probability = file.resolve(
        args.cross_vote_probability,
        "cross_vote_probability",
        config.cross_vote_probability,
    )?;
    config.window_days = file.resolve(args.window_days, "window_days", config.window_days)?;
    config.category = file.resolve(args.category, "category", config.category)?;
    if let Some(probs) = args.domain_probs.or(file
        .get::<String>("domain_probs")?
        .map(|s| parse_list(&s, "domain_probs"))
        .transpose()?)
    {
        config.domain_preferences = (0..config.community_sizes.len())
            .map(|k| {
                probs
                    .iter()
                    .enumerate()
                    .map(|(j, &probability)| DomainPreference {
                        domain: format!("community{:02}-src{j}.example", k),
                        probability,
                    })
                    .collect()
            })
            .collect();
    }

    let opts = SimulateTemporalOpts { config, out_dir };
    let files = stage_simulate_temporal(&opts)?;
    for file in files {
        println!("wrote {}", file.display());
    }
    Ok(())
}

fn cmd_simulate_opinion(
    args: SimulateOpinionArgs,
    file: &FileConfig,
) -> Result<(), PipelineError> {
    let out_dir = require(file.resolve_opt(args.out_dir, "out_dir")?, "out-dir")?;
    let sigma = file.resolve(args.sigma, "sigma", 0.5)?;
    let mut config = SimConfig::with_sigma(sigma);
    config.user_count = file.resolve(args.users, "users", config.user_count)?;
    config.articles_per_user_mean = file.resolve(
        args.articles_per_user,
        "articles_per_user",
        config.articles_per_user_mean,
    )?;
    config.article_std = file.resolve_opt(args.article_std, "article_std")?;
    config.vote_radius = file.resolve(args.vote_radius, "vote_radius", config.vote_radius)?;
    config.vote_probability =
        file.resolve(args.vote_probability, "vote_probability", config.vote_probability)?;
    config.seed = file.resolve(args.seed, "seed", config.seed)?;

    let opts = SimulateOpinionOpts { config, out_dir };
    let files = stage_simulate_opinion(&opts)?;
    for file in files {
        println!("wrote {}", file.display());
    }
    Ok(())
}

fn cmd_sweep(args: SweepArgs, file: &FileConfig) -> Result<(), PipelineError> {
    let out_path = require(file.resolve_opt(args.out, "out")?, "out")?;
    let sigmas = args
        .sigmas
        .or(file
            .get::<String>("sigmas")?
            .map(|s| parse_list(&s, "sigmas"))
            .transpose()?)
        .unwrap_or_else(|| vec![0.1, 0.3, 0.5, 0.7, 0.9, 1.0]);
    let mut config = SimConfig::with_sigma(sigmas.first().copied().unwrap_or(0.1));
    config.user_count = file.resolve(args.users, "users", config.user_count)?;
    config.seed = file.resolve(args.seed, "seed", config.seed)?;
    let runs = file.resolve(args.runs, "runs", config.runs)?;

    let opts = SweepOpts {
        config,
        sigmas,
        runs,
        out_path,
    };
    let rows = stage_sweep(&opts)?;
    for row in &rows {
        println!(
            "sigma {:>4}  {:<8}  mean_error {:.4}  ±{:.4}",
            row.sigma, row.method, row.mean_error, row.two_std
        );
    }
    println!("wrote {}", opts.out_path.display());
    Ok(())
}

fn cmd_detect(args: DetectArgs, file: &FileConfig) -> Result<(), PipelineError> {
    let opts = DetectOpts {
        votes_path: require(file.resolve_opt(args.votes, "votes")?, "votes")?,
        articles_path: require(file.resolve_opt(args.articles, "articles")?, "articles")?,
        out_path: require(file.resolve_opt(args.out, "out")?, "out")?,
        window_days: file.resolve(args.window_days, "window_days", 30)?,
        step_days: file.resolve(args.step_days, "step_days", 14)?,
        category: file.resolve_opt(args.category, "category")?,
        min_shared: file.resolve(args.min_shared, "min_shared", 1)?,
        window: file.resolve_opt(args.window, "window")?,
        peak_q: args.peak_q || file.get::<bool>("peak_q")?.unwrap_or(false),
        dump_graphs: file.resolve_opt(args.dump_graphs, "dump_graphs")?,
    };
    let partitions = stage_detect(&opts)?;
    for partition in &partitions {
        println!(
            "window {:>3}: {} users, {} communities, Q = {}",
            partition.window_index(),
            partition.users().len(),
            partition.community_count(),
            partition
                .modularity_q()
                .map_or("undefined".to_string(), |q| format!("{q:.4}")),
        );
    }
    println!("wrote {}", opts.out_path.display());
    Ok(())
}

fn cmd_link(args: LinkArgs, file: &FileConfig) -> Result<(), PipelineError> {
    let opts = LinkOpts {
        partitions_path: require(file.resolve_opt(args.partitions, "partitions")?, "partitions")?,
        evolution_out: require(
            file.resolve_opt(args.evolution_out, "evolution_out")?,
            "evolution-out",
        )?,
        paths_out: require(file.resolve_opt(args.paths_out, "paths_out")?, "paths-out")?,
        min_size: file.resolve(args.min_size, "min_size", 10)?,
        secondary_threshold: file.resolve(args.secondary_threshold, "secondary_threshold", 0.1)?,
    };
    let (evolution, paths) = stage_link(&opts)?;
    println!(
        "{} nodes, {} links, {} paths",
        evolution.node_count(),
        evolution.links().len(),
        paths.len()
    );
    println!("wrote {}", opts.evolution_out.display());
    println!("wrote {}", opts.paths_out.display());
    Ok(())
}

fn cmd_profile(args: ProfileArgs, file: &FileConfig) -> Result<(), PipelineError> {
    let opts = ProfileOpts {
        votes_path: require(file.resolve_opt(args.votes, "votes")?, "votes")?,
        articles_path: require(file.resolve_opt(args.articles, "articles")?, "articles")?,
        partitions_path: require(file.resolve_opt(args.partitions, "partitions")?, "partitions")?,
        paths_path: file.resolve_opt(args.paths, "paths")?,
        out_profiles: require(file.resolve_opt(args.out, "out")?, "out")?,
        out_path_profiles: file.resolve_opt(args.path_profiles_out, "path_profiles_out")?,
        window_days: file.resolve(args.window_days, "window_days", 30)?,
        step_days: file.resolve(args.step_days, "step_days", 14)?,
        category: file.resolve_opt(args.category, "category")?,
        min_size: file.resolve(args.min_size, "min_size", 10)?,
        n_rep: file.resolve(args.n_rep, "n_rep", 50)?,
        n_path_articles: file.resolve(args.n_path_articles, "n_path_articles", 10)?,
        n_terms: file.resolve(args.n_terms, "n_terms", 10)?,
        stopwords_path: file.resolve_opt(args.stopwords, "stopwords")?,
    };
    let (profiles, path_profiles) = stage_profile(&opts)?;
    println!(
        "{} community profiles, {} path profiles",
        profiles.len(),
        path_profiles.len()
    );
    println!("wrote {}", opts.out_profiles.display());
    if let Some(out) = &opts.out_path_profiles {
        println!("wrote {}", out.display());
    }
    Ok(())
}

fn cmd_evaluate(args: EvaluateArgs, file: &FileConfig) -> Result<(), PipelineError> {
    let opts = EvaluateOpts {
        votes_path: require(file.resolve_opt(args.votes, "votes")?, "votes")?,
        articles_path: require(file.resolve_opt(args.articles, "articles")?, "articles")?,
        paths_path: require(file.resolve_opt(args.paths, "paths")?, "paths")?,
        path_profiles_path: require(
            file.resolve_opt(args.path_profiles, "path_profiles")?,
            "path-profiles",
        )?,
        out_path: require(file.resolve_opt(args.out, "out")?, "out")?,
        window_days: file.resolve(args.window_days, "window_days", 30)?,
        step_days: file.resolve(args.step_days, "step_days", 14)?,
        category: file.resolve_opt(args.category, "category")?,
        repetitions: file.resolve(args.repetitions, "repetitions", 100)?,
        global_baseline: args.global_baseline || file.get::<bool>("global_baseline")?.unwrap_or(false),
        seed: file.resolve(args.seed, "seed", 0)?,
    };
    let rows = stage_evaluate(&opts)?;
    for row in &rows {
        println!(
            "path {:>3}: entropy {:.3} bits, effective sources {:.2}, relative recurrence {:.2}",
            row.path_id, row.entropy_bits, row.effective_sources, row.relative_recurrence
        );
    }
    println!("wrote {}", opts.out_path.display());
    Ok(())
}

fn cmd_report(args: ReportArgs, file: &FileConfig) -> Result<(), PipelineError> {
    let opts = ReportOpts {
        paths_path: require(file.resolve_opt(args.paths, "paths")?, "paths")?,
        out_path: require(file.resolve_opt(args.out, "out")?, "out")?,
    };
    let count = stage_report(&opts)?;
    println!("{count} paths");
    println!("wrote {}", opts.out_path.display());
    Ok(())
}

fn cmd_dot(args: DotArgs, file: &FileConfig) -> Result<(), PipelineError> {
    let opts = DotOpts {
        partitions_path: require(file.resolve_opt(args.partitions, "partitions")?, "partitions")?,
        out_path: require(file.resolve_opt(args.out, "out")?, "out")?,
        min_size: file.resolve(args.min_size, "min_size", 10)?,
        secondary_threshold: file.resolve(args.secondary_threshold, "secondary_threshold", 0.1)?,
    };
    let (nodes, links) = stage_dot(&opts)?;
    println!("{nodes} nodes, {links} links");
    println!("wrote {}", opts.out_path.display());
    Ok(())
}

fn parse_list<T: std::str::FromStr>(raw: &str, key: &str) -> Result<Vec<T>, PipelineError> {
    raw.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse::<T>()
                .map_err(|_| PipelineError::Config(format!("config key {key}: cannot parse {s:?}")))
        })
        .collect()
}
