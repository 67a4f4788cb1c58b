//! End-to-end orchestration with file-based handoff between stages.
//!
//! `run_pipeline` executes corpus → graph → community → evolution →
//! content → evaluation and writes every report into one output directory;
//! the per-stage functions behind the CLI subcommands run exactly one
//! module boundary each, reading and writing the same file formats so any
//! stage can be re-run or cross-checked in isolation. Every output file
//! gets a `<name>.meta.json` sidecar recording the options and seed that
//! produced it.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::community::{
    detect_communities_with, read_partitions, write_partitions, CommunityError, CutRule, Partition,
};
use crate::content::{
    community_profile, path_profile, read_path_profiles, write_path_profiles,
    write_profiles, CommunityContentProfile, CommunityVotes, ContentError, PathProfile,
    TermFrequencies, Tokenizer,
};
use crate::corpus::{
    load_corpus, make_windows, slice_all, Corpus, CorpusError, ParseWarning, WindowParams,
    WindowSlice, WindowSpec,
};
use crate::evaluation::{
    entropy_report, random_baseline, relative_recurrence, write_evaluation_csv, EvaluationError,
    EvaluationRow,
};
use crate::evolution::{
    extract_paths, link_windows, read_paths, transition_matrix, write_dot, write_evolution,
    write_paths, write_paths_csv, EvolutionError, EvolutionGraph, EvolutionPath,
};
use crate::graph::{build_bipartite, project_jaccard};
use crate::simulation::{
    derive_seed, dataset_as_corpus, generate, generate_temporal_plant, sweep_std, write_sweep_csv,
    SimConfig, SimulationError, SweepRow, TemporalPlantConfig,
};

/// Errors from any stage, tagged with the owning module and window where
/// known. `exit_code` distinguishes input errors (1) from internal
/// invariant violations (2).
#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("{module}{}: {source}", window.map(|w| format!(" (window {w})")).unwrap_or_default())]
    Stage {
        module: &'static str,
        window: Option<usize>,
        #[source]
        source: StageError,
    },
    #[error("cannot write {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("invalid configuration: {0}")]
    Config(String),
}

#[derive(Debug, Error)]
pub enum StageError {
    #[error(transparent)]
    Corpus(#[from] CorpusError),
    #[error(transparent)]
    Community(#[from] CommunityError),
    #[error(transparent)]
    Evolution(#[from] EvolutionError),
    #[error(transparent)]
    Content(#[from] ContentError),
    #[error(transparent)]
    Evaluation(#[from] EvaluationError),
    #[error(transparent)]
    Simulation(#[from] SimulationError),
}

impl StageError {
    /// Internal errors signal broken invariants rather than bad input.
    fn is_internal(&self) -> bool {
        match self {
            StageError::Corpus(_) | StageError::Simulation(_) | StageError::Evaluation(_) => false,
            StageError::Community(e) => !matches!(e, CommunityError::Dump(_)),
            StageError::Evolution(e) => !matches!(e, EvolutionError::Dump(_)),
            StageError::Content(e) => !matches!(e, ContentError::Dump(_)),
        }
    }
}

impl PipelineError {
    pub fn exit_code(&self) -> i32 {
        match self {
            PipelineError::Io { .. } | PipelineError::Config(_) => 1,
            PipelineError::Stage { source, .. } => {
                if source.is_internal() {
                    2
                } else {
                    1
                }
            }
        }
    }
}

fn stage<E: Into<StageError>>(module: &'static str, window: Option<usize>) -> impl Fn(E) -> PipelineError {
    move |e| PipelineError::Stage {
        module,
        window,
        source: e.into(),
    }
}

// ---------------------------------------------------------------------------
// flat key=value config files
// ---------------------------------------------------------------------------

/// Flat `key = value` configuration file; `#` starts a comment and dashes
/// in keys normalize to underscores. CLI flags override file values.
#[derive(Debug, Clone, Default)]
pub struct FileConfig(BTreeMap<String, String>);

impl FileConfig {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn load(path: &Path) -> Result<Self, PipelineError> {
        let text = std::fs::read_to_string(path).map_err(|source| PipelineError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let mut map = BTreeMap::new();
        for (idx, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(PipelineError::Config(format!(
                    "{}:{}: expected key = value",
                    path.display(),
                    idx + 1
                )));
            };
            map.insert(normalize_key(key), value.trim().to_string());
        }
        Ok(Self(map))
    }

    pub fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>, PipelineError> {
        match self.0.get(&normalize_key(key)) {
            None => Ok(None),
            Some(raw) => raw.parse::<T>().map(Some).map_err(|_| {
                PipelineError::Config(format!("config key {key}: cannot parse {raw:?}"))
            }),
        }
    }

    /// CLI flag wins over the file value; otherwise the default applies.
    pub fn resolve<T: FromStr>(
        &self,
        flag: Option<T>,
        key: &str,
        default: T,
    ) -> Result<T, PipelineError> {
        Ok(flag.or(self.get(key)?).unwrap_or(default))
    }

    pub fn resolve_opt<T: FromStr>(
        &self,
        flag: Option<T>,
        key: &str,
    ) -> Result<Option<T>, PipelineError> {
        Ok(flag.or(self.get(key)?))
    }
}

fn normalize_key(key: &str) -> String {
    key.trim().to_lowercase().replace('-', "_")
}

// ---------------------------------------------------------------------------
// provenance sidecars
// ---------------------------------------------------------------------------

#[derive(Serialize)]
struct Meta<'a, T: Serialize> {
    options: &'a T,
    seed: Option<u64>,
    notes: &'a [&'a str],
}

/// Writes `<path>.meta.json` describing how `path` was produced.
fn write_meta<T: Serialize>(
    path: &Path,
    options: &T,
    seed: Option<u64>,
    notes: &[&str],
) -> Result<(), PipelineError> {
    let meta_path = PathBuf::from(format!("{}.meta.json", path.display()));
    let meta = Meta {
        options,
        seed,
        notes,
    };
    let text = serde_json::to_string_pretty(&meta).expect("meta serializes");
    std::fs::write(&meta_path, text + "\n").map_err(|source| PipelineError::Io {
        path: meta_path,
        source,
    })
}

fn create_out(path: &Path) -> Result<BufWriter<File>, PipelineError> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent).map_err(|source| PipelineError::Io {
                path: parent.to_path_buf(),
                source,
            })?;
        }
    }
    File::create(path)
        .map(BufWriter::new)
        .map_err(|source| PipelineError::Io {
            path: path.to_path_buf(),
            source,
        })
}

fn io_err(path: &Path) -> impl Fn(std::io::Error) -> PipelineError + '_ {
    move |source| PipelineError::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn open_in(path: &Path) -> Result<BufReader<File>, PipelineError> {
    File::open(path).map(BufReader::new).map_err(io_err(path))
}

const ASSUMED_DEFAULT_NOTES: &[&str] = &[
    "n_rep and n_path_articles are assumed top-n granularity defaults, not empirically fixed",
];
const BASELINE_NOTES: &[&str] = &[
    "baseline samples votes uniformly with replacement from the covered windows",
];
const SIM_NOTES: &[&str] = &[
    "opinion-space parameters beyond user_count=500, four quadrant centers, and 10-run \
     averaging are reconstructions; all are exposed in the config",
];

// ---------------------------------------------------------------------------
// full pipeline
// ---------------------------------------------------------------------------

/// Everything `run_pipeline` needs, with the per-module defaults.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunConfig {
    pub votes_path: PathBuf,
    pub articles_path: PathBuf,
    pub out_dir: PathBuf,
    pub window_days: i64,
    pub step_days: i64,
    pub category: Option<String>,
    pub min_shared: usize,
    pub min_size: usize,
    pub secondary_threshold: f64,
    pub n_rep: usize,
    pub n_path_articles: usize,
    pub n_terms: usize,
    pub baseline_repetitions: usize,
    /// Sample the baseline from all windows instead of each path's own.
    pub global_baseline: bool,
    pub stopwords_path: Option<PathBuf>,
    pub seed: u64,
}

impl RunConfig {
    pub fn new(votes_path: PathBuf, articles_path: PathBuf, out_dir: PathBuf) -> Self {
        Self {
            votes_path,
            articles_path,
            out_dir,
            window_days: 30,
            step_days: 14,
            category: None,
            min_shared: 1,
            min_size: 10,
            secondary_threshold: 0.1,
            n_rep: 50,
            n_path_articles: 10,
            n_terms: 10,
            baseline_repetitions: 100,
            global_baseline: false,
            stopwords_path: None,
            seed: 0,
        }
    }

    pub fn window_params(&self) -> WindowParams {
        WindowParams::from_days(self.window_days, self.step_days)
    }
}

/// The in-memory results of a full run, alongside the files written.
#[derive(Debug)]
pub struct PipelineRun {
    pub config: RunConfig,
    pub warnings: Vec<ParseWarning>,
    pub windows: Vec<WindowSpec>,
    pub partitions: Vec<Partition>,
    pub evolution: EvolutionGraph,
    pub paths: Vec<EvolutionPath>,
    pub profiles: Vec<CommunityContentProfile>,
    pub path_profiles: Vec<PathProfile>,
    pub evaluation: Vec<EvaluationRow>,
    pub output_files: Vec<PathBuf>,
}

fn load_tokenizer(stopwords_path: Option<&Path>) -> Result<Tokenizer, PipelineError> {
    match stopwords_path {
        None => Ok(Tokenizer::new()),
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(io_err(path))?;
            Ok(Tokenizer::with_stopwords(
                text.lines()
                    .map(str::trim)
                    .filter(|l| !l.is_empty() && !l.starts_with('#'))
                    .map(str::to_string),
            ))
        }
    }
}

fn load_filtered_corpus(
    votes_path: &Path,
    articles_path: &Path,
    category: Option<&str>,
) -> Result<Corpus, PipelineError> {
    let corpus = load_corpus(votes_path, articles_path).map_err(stage("corpus", None))?;
    Ok(match category {
        Some(category) => corpus.filter_category(category),
        None => corpus,
    })
}

type DetectedWindows = (Vec<WindowSpec>, Vec<WindowSlice>, Vec<Partition>);

fn detect_all(
    corpus: &Corpus,
    params: WindowParams,
    min_shared: usize,
    cut: CutRule,
) -> Result<DetectedWindows, PipelineError> {
    let Some((first, last)) = corpus.vote_span() else {
        return Ok((Vec::new(), Vec::new(), Vec::new()));
    };
    let windows = make_windows(first, last, params).map_err(stage("corpus", None))?;
    let slices = slice_all(&corpus.votes, &windows);
    let partitions = slices
        .iter()
        .map(|slice| {
            let graph = project_jaccard(&build_bipartite(slice), min_shared);
            detect_communities_with(&graph, cut).with_window_index(slice.window_index)
        })
        .collect();
    Ok((windows, slices, partitions))
}

/// Runs the whole pipeline and writes `partitions.jsonl`,
/// `evolution.jsonl`, `evolution.dot`, `paths.jsonl`, `paths.csv`,
/// `profiles.jsonl`, `path_profiles.jsonl`, `evaluation.csv`, and
/// `run_config.json` into the output directory. Idempotent given the seed:
/// identical config and input produce byte-identical files.
pub fn run_pipeline(cfg: &RunConfig) -> Result<PipelineRun, PipelineError> {
    WindowParams::from_days(cfg.window_days, cfg.step_days)
        .validate()
        .map_err(stage("corpus", None))?;
    let tokenizer = load_tokenizer(cfg.stopwords_path.as_deref())?;
    let corpus = load_filtered_corpus(
        &cfg.votes_path,
        &cfg.articles_path,
        cfg.category.as_deref(),
    )?;
    let mut outputs = Vec::new();

    // corpus → graph → community
    let (windows, slices, partitions) =
        detect_all(&corpus, cfg.window_params(), cfg.min_shared, CutRule::default())?;
    let partitions_path = cfg.out_dir.join("partitions.jsonl");
    {
        let mut out = create_out(&partitions_path)?;
        write_partitions(&mut out, &partitions).map_err(io_err(&partitions_path))?;
        out.flush().map_err(io_err(&partitions_path))?;
    }
    write_meta(&partitions_path, cfg, Some(cfg.seed), &[])?;
    outputs.push(partitions_path);

    // evolution
    let mut matrices = Vec::new();
    for pair in partitions.windows(2) {
        matrices.push(
            transition_matrix(&pair[0], &pair[1])
                .map_err(stage("evolution", Some(pair[0].window_index())))?,
        );
    }
    let evolution = link_windows(&matrices, cfg.min_size, cfg.secondary_threshold)
        .map_err(stage("evolution", None))?;
    let paths = extract_paths(&evolution, &partitions).map_err(stage("evolution", None))?;

    let evolution_path = cfg.out_dir.join("evolution.jsonl");
    {
        let mut out = create_out(&evolution_path)?;
        write_evolution(&mut out, &evolution).map_err(io_err(&evolution_path))?;
        out.flush().map_err(io_err(&evolution_path))?;
    }
    write_meta(&evolution_path, cfg, Some(cfg.seed), &[])?;
    outputs.push(evolution_path);

    let dot_path = cfg.out_dir.join("evolution.dot");
    {
        let mut out = create_out(&dot_path)?;
        let header = format!(
            "window_days={} step_days={} min_size={} secondary_threshold={} seed={}",
            cfg.window_days, cfg.step_days, cfg.min_size, cfg.secondary_threshold, cfg.seed
        );
        write_dot(&mut out, &evolution, &paths, &header).map_err(io_err(&dot_path))?;
        out.flush().map_err(io_err(&dot_path))?;
    }
    write_meta(&dot_path, cfg, Some(cfg.seed), &[])?;
    outputs.push(dot_path);

    let paths_path = cfg.out_dir.join("paths.jsonl");
    {
        let mut out = create_out(&paths_path)?;
        write_paths(&mut out, &paths).map_err(io_err(&paths_path))?;
        out.flush().map_err(io_err(&paths_path))?;
    }
    write_meta(&paths_path, cfg, Some(cfg.seed), &[])?;
    outputs.push(paths_path.clone());

    let paths_csv = cfg.out_dir.join("paths.csv");
    {
        let mut out = create_out(&paths_csv)?;
        write_paths_csv(&mut out, &paths).map_err(io_err(&paths_csv))?;
        out.flush().map_err(io_err(&paths_csv))?;
    }
    write_meta(&paths_csv, cfg, Some(cfg.seed), &[])?;
    outputs.push(paths_csv);

    // content
    let mut profiles = Vec::new();
    for (slice, partition) in slices.iter().zip(&partitions) {
        let window = slice.window_index;
        if slice.is_empty() {
            continue;
        }
        let votes =
            CommunityVotes::new(slice, partition).map_err(stage("content", Some(window)))?;
        let window_terms = TermFrequencies::for_window(slice, &corpus.articles, &tokenizer);
        for community in 0..partition.community_count() {
            if partition.size(community) < cfg.min_size {
                continue;
            }
            profiles.push(
                community_profile(
                    &votes,
                    community,
                    &corpus.articles,
                    &tokenizer,
                    &window_terms,
                    cfg.n_rep,
                    cfg.n_path_articles,
                    cfg.n_terms,
                )
                .map_err(stage("content", Some(window)))?,
            );
        }
    }
    let profiles_path = cfg.out_dir.join("profiles.jsonl");
    {
        let mut out = create_out(&profiles_path)?;
        write_profiles(&mut out, &profiles).map_err(io_err(&profiles_path))?;
        out.flush().map_err(io_err(&profiles_path))?;
    }
    write_meta(&profiles_path, cfg, Some(cfg.seed), ASSUMED_DEFAULT_NOTES)?;
    outputs.push(profiles_path);

    let mut path_profiles = Vec::new();
    for path in &paths {
        path_profiles.push(
            path_profile(path, &profiles, cfg.n_terms, cfg.n_path_articles)
                .map_err(stage("content", None))?,
        );
    }
    let path_profiles_path = cfg.out_dir.join("path_profiles.jsonl");
    {
        let mut out = create_out(&path_profiles_path)?;
        write_path_profiles(&mut out, &path_profiles).map_err(io_err(&path_profiles_path))?;
        out.flush().map_err(io_err(&path_profiles_path))?;
    }
    write_meta(&path_profiles_path, cfg, Some(cfg.seed), ASSUMED_DEFAULT_NOTES)?;
    outputs.push(path_profiles_path);

    // evaluation
    let evaluation = evaluate_paths(
        &paths,
        &path_profiles,
        &slices,
        &corpus.articles,
        cfg.baseline_repetitions,
        cfg.global_baseline,
        cfg.seed,
    )?;
    let evaluation_path = cfg.out_dir.join("evaluation.csv");
    {
        let mut out = create_out(&evaluation_path)?;
        write_evaluation_csv(&mut out, &evaluation).map_err(io_err(&evaluation_path))?;
        out.flush().map_err(io_err(&evaluation_path))?;
    }
    write_meta(&evaluation_path, cfg, Some(cfg.seed), BASELINE_NOTES)?;
    outputs.push(evaluation_path);

    let config_path = cfg.out_dir.join("run_config.json");
    let text = serde_json::to_string_pretty(cfg).expect("config serializes");
    std::fs::write(&config_path, text + "\n").map_err(io_err(&config_path))?;
    outputs.push(config_path);

    Ok(PipelineRun {
        config: cfg.clone(),
        warnings: corpus.warnings,
        windows,
        partitions,
        evolution,
        paths,
        profiles,
        path_profiles,
        evaluation,
        output_files: outputs,
    })
}

/// Entropy/recurrence rows for every path with at least one profiled
/// representative article; paths with empty domain tables are skipped.
#[allow(clippy::too_many_arguments)]
fn evaluate_paths(
    paths: &[EvolutionPath],
    path_profiles: &[PathProfile],
    slices: &[WindowSlice],
    articles: &BTreeMap<String, crate::corpus::ArticleMeta>,
    repetitions: usize,
    global_baseline: bool,
    seed: u64,
) -> Result<Vec<EvaluationRow>, PipelineError> {
    let mut rows = Vec::new();
    for (path, profile) in paths.iter().zip(path_profiles) {
        let sample_size = profile.domain_observations();
        if sample_size == 0 {
            continue;
        }
        let counts: Vec<(&str, usize)> = profile
            .domains
            .iter()
            .map(|d| (d.domain.as_str(), d.count))
            .collect();
        let path_report = entropy_report(&format!("path-{}", path.id), &counts)
            .map_err(stage("evaluation", None))?;

        let covered: Vec<WindowSlice> = if global_baseline {
            slices.to_vec()
        } else {
            let windows: Vec<usize> = path.nodes.iter().map(|n| n.window).collect();
            slices
                .iter()
                .filter(|s| windows.contains(&s.window_index))
                .cloned()
                .collect()
        };
        let baseline_seed = derive_seed(seed, 0x6261_7365, path.id as u64);
        let baseline = random_baseline(
            &format!("baseline-{}", path.id),
            &covered,
            articles,
            sample_size,
            repetitions,
            baseline_seed,
        )
        .map_err(stage("evaluation", None))?;
        let stats = baseline.baseline.as_ref().expect("baseline stats present");
        rows.push(EvaluationRow {
            path_id: path.id,
            entropy_bits: path_report.entropy_bits,
            effective_sources: path_report.effective_sources,
            baseline_mean_entropy: stats.mean,
            baseline_std: stats.std_dev,
            relative_recurrence: relative_recurrence(&path_report, &baseline),
            sample_size,
            repetitions,
            seed: baseline_seed,
        });
    }
    Ok(rows)
}

// ---------------------------------------------------------------------------
// single-stage entry points (the CLI subcommands)
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize)]
pub struct DetectOpts {
    pub votes_path: PathBuf,
    pub articles_path: PathBuf,
    pub out_path: PathBuf,
    pub window_days: i64,
    pub step_days: i64,
    pub category: Option<String>,
    pub min_shared: usize,
    /// Detect only this window index.
    pub window: Option<usize>,
    /// Cut the merge dendrogram at peak Q instead of the first
    /// non-improving merge.
    pub peak_q: bool,
    /// Also dump every window's weighted user graph as `u v w` edge-list
    /// text files into this directory.
    pub dump_graphs: Option<PathBuf>,
}

pub fn stage_detect(opts: &DetectOpts) -> Result<Vec<Partition>, PipelineError> {
    let corpus = load_filtered_corpus(
        &opts.votes_path,
        &opts.articles_path,
        opts.category.as_deref(),
    )?;
    let cut = if opts.peak_q {
        CutRule::PeakQ
    } else {
        CutRule::FirstNonPositive
    };
    let params = WindowParams::from_days(opts.window_days, opts.step_days);
    let (_, slices, mut partitions) = detect_all(&corpus, params, opts.min_shared, cut)?;
    if let Some(window) = opts.window {
        partitions.retain(|p| p.window_index() == window);
    }
    if let Some(dir) = &opts.dump_graphs {
        std::fs::create_dir_all(dir).map_err(io_err(dir))?;
        for slice in &slices {
            if opts.window.is_some_and(|w| w != slice.window_index) {
                continue;
            }
            let graph = project_jaccard(&build_bipartite(slice), opts.min_shared);
            let path = dir.join(format!("user_graph_w{:03}.txt", slice.window_index));
            let mut out = create_out(&path)?;
            graph.write_edge_list(&mut out).map_err(io_err(&path))?;
            out.flush().map_err(io_err(&path))?;
        }
    }
    let mut out = create_out(&opts.out_path)?;
    write_partitions(&mut out, &partitions).map_err(io_err(&opts.out_path))?;
    out.flush().map_err(io_err(&opts.out_path))?;
    write_meta(&opts.out_path, opts, None, &[])?;
    Ok(partitions)
}

#[derive(Debug, Clone, Serialize)]
pub struct LinkOpts {
    pub partitions_path: PathBuf,
    pub evolution_out: PathBuf,
    pub paths_out: PathBuf,
    pub min_size: usize,
    pub secondary_threshold: f64,
}

pub fn stage_link(opts: &LinkOpts) -> Result<(EvolutionGraph, Vec<EvolutionPath>), PipelineError> {
    let partitions =
        read_partitions(open_in(&opts.partitions_path)?).map_err(stage("community", None))?;
    let mut matrices = Vec::new();
    for pair in partitions.windows(2) {
        matrices.push(
            transition_matrix(&pair[0], &pair[1])
                .map_err(stage("evolution", Some(pair[0].window_index())))?,
        );
    }
    let evolution = link_windows(&matrices, opts.min_size, opts.secondary_threshold)
        .map_err(stage("evolution", None))?;
    let paths = extract_paths(&evolution, &partitions).map_err(stage("evolution", None))?;

    let mut out = create_out(&opts.evolution_out)?;
    write_evolution(&mut out, &evolution).map_err(io_err(&opts.evolution_out))?;
    out.flush().map_err(io_err(&opts.evolution_out))?;
    write_meta(&opts.evolution_out, opts, None, &[])?;

    let mut out = create_out(&opts.paths_out)?;
    write_paths(&mut out, &paths).map_err(io_err(&opts.paths_out))?;
    out.flush().map_err(io_err(&opts.paths_out))?;
    write_meta(&opts.paths_out, opts, None, &[])?;
    Ok((evolution, paths))
}

#[derive(Debug, Clone, Serialize)]
pub struct DotOpts {
    pub partitions_path: PathBuf,
    pub out_path: PathBuf,
    pub min_size: usize,
    pub secondary_threshold: f64,
}

/// Renders partitions straight to DOT; returns (nodes, links) drawn.
pub fn stage_dot(opts: &DotOpts) -> Result<(usize, usize), PipelineError> {
    let partitions =
        read_partitions(open_in(&opts.partitions_path)?).map_err(stage("community", None))?;
    let mut matrices = Vec::new();
    for pair in partitions.windows(2) {
        matrices.push(
            transition_matrix(&pair[0], &pair[1])
                .map_err(stage("evolution", Some(pair[0].window_index())))?,
        );
    }
    let evolution = link_windows(&matrices, opts.min_size, opts.secondary_threshold)
        .map_err(stage("evolution", None))?;
    let paths = extract_paths(&evolution, &partitions).map_err(stage("evolution", None))?;
    let mut out = create_out(&opts.out_path)?;
    let header = format!(
        "min_size={} secondary_threshold={}",
        opts.min_size, opts.secondary_threshold
    );
    write_dot(&mut out, &evolution, &paths, &header).map_err(io_err(&opts.out_path))?;
    out.flush().map_err(io_err(&opts.out_path))?;
    write_meta(&opts.out_path, opts, None, &[])?;
    Ok((evolution.node_count(), evolution.links().len()))
}

#[derive(Debug, Clone, Serialize)]
pub struct ProfileOpts {
    pub votes_path: PathBuf,
    pub articles_path: PathBuf,
    pub partitions_path: PathBuf,
    pub paths_path: Option<PathBuf>,
    pub out_profiles: PathBuf,
    pub out_path_profiles: Option<PathBuf>,
    pub window_days: i64,
    pub step_days: i64,
    pub category: Option<String>,
    pub min_size: usize,
    pub n_rep: usize,
    pub n_path_articles: usize,
    pub n_terms: usize,
    pub stopwords_path: Option<PathBuf>,
}

pub fn stage_profile(
    opts: &ProfileOpts,
) -> Result<(Vec<CommunityContentProfile>, Vec<PathProfile>), PipelineError> {
    let corpus = load_filtered_corpus(
        &opts.votes_path,
        &opts.articles_path,
        opts.category.as_deref(),
    )?;
    let tokenizer = load_tokenizer(opts.stopwords_path.as_deref())?;
    let partitions =
        read_partitions(open_in(&opts.partitions_path)?).map_err(stage("community", None))?;

    let params = WindowParams::from_days(opts.window_days, opts.step_days);
    params.validate().map_err(stage("corpus", None))?;
    let Some((first, last)) = corpus.vote_span() else {
        return Err(PipelineError::Config(
            "profile stage needs a non-empty corpus".into(),
        ));
    };
    let windows = make_windows(first, last, params).map_err(stage("corpus", None))?;
    let slices = slice_all(&corpus.votes, &windows);

    let mut profiles = Vec::new();
    for partition in &partitions {
        let window = partition.window_index();
        let slice = slices.get(window).ok_or_else(|| {
            PipelineError::Config(format!(
                "partitions reference window {window} outside the {} windows derived from \
                 the corpus; check --window-days/--step-days",
                slices.len()
            ))
        })?;
        let votes =
            CommunityVotes::new(slice, partition).map_err(stage("content", Some(window)))?;
        let window_terms = TermFrequencies::for_window(slice, &corpus.articles, &tokenizer);
        for community in 0..partition.community_count() {
            if partition.size(community) < opts.min_size {
                continue;
            }
            profiles.push(
                community_profile(
                    &votes,
                    community,
                    &corpus.articles,
                    &tokenizer,
                    &window_terms,
                    opts.n_rep,
                    opts.n_path_articles,
                    opts.n_terms,
                )
                .map_err(stage("content", Some(window)))?,
            );
        }
    }
    let mut out = create_out(&opts.out_profiles)?;
    write_profiles(&mut out, &profiles).map_err(io_err(&opts.out_profiles))?;
    out.flush().map_err(io_err(&opts.out_profiles))?;
    write_meta(&opts.out_profiles, opts, None, ASSUMED_DEFAULT_NOTES)?;

    let mut path_profiles = Vec::new();
    if let (Some(paths_path), Some(out_path)) = (&opts.paths_path, &opts.out_path_profiles) {
        let paths = read_paths(open_in(paths_path)?).map_err(stage("evolution", None))?;
        for path in &paths {
            path_profiles.push(
                path_profile(path, &profiles, opts.n_terms, opts.n_path_articles)
                    .map_err(stage("content", None))?,
            );
        }
        let mut out = create_out(out_path)?;
        write_path_profiles(&mut out, &path_profiles).map_err(io_err(out_path))?;
        out.flush().map_err(io_err(out_path))?;
        write_meta(out_path, opts, None, ASSUMED_DEFAULT_NOTES)?;
    }
    Ok((profiles, path_profiles))
}

#[derive(Debug, Clone, Serialize)]
pub struct EvaluateOpts {
    pub votes_path: PathBuf,
    pub articles_path: PathBuf,
    pub paths_path: PathBuf,
    pub path_profiles_path: PathBuf,
    pub out_path: PathBuf,
    pub window_days: i64,
    pub step_days: i64,
    pub category: Option<String>,
    pub repetitions: usize,
    pub global_baseline: bool,
    pub seed: u64,
}

pub fn stage_evaluate(opts: &EvaluateOpts) -> Result<Vec<EvaluationRow>, PipelineError> {
    let corpus = load_filtered_corpus(
        &opts.votes_path,
        &opts.articles_path,
        opts.category.as_deref(),
    )?;
    let paths = read_paths(open_in(&opts.paths_path)?).map_err(stage("evolution", None))?;
    let mut path_profiles =
        read_path_profiles(open_in(&opts.path_profiles_path)?).map_err(stage("content", None))?;
    path_profiles.sort_by_key(|p| p.path_id);
    let by_id: BTreeMap<usize, usize> = path_profiles
        .iter()
        .enumerate()
        .map(|(i, p)| (p.path_id, i))
        .collect();
    let ordered: Vec<PathProfile> = paths
        .iter()
        .map(|path| {
            by_id
                .get(&path.id)
                .map(|&i| path_profiles[i].clone())
                .ok_or_else(|| {
                    PipelineError::Config(format!("no path profile for path {}", path.id))
                })
        })
        .collect::<Result<_, _>>()?;

    let params = WindowParams::from_days(opts.window_days, opts.step_days);
    params.validate().map_err(stage("corpus", None))?;
    let Some((first, last)) = corpus.vote_span() else {
        return Err(PipelineError::Config(
            "evaluate stage needs a non-empty corpus".into(),
        ));
    };
    let windows = make_windows(first, last, params).map_err(stage("corpus", None))?;
    let slices = slice_all(&corpus.votes, &windows);

    let rows = evaluate_paths(
        &paths,
        &ordered,
        &slices,
        &corpus.articles,
        opts.repetitions,
        opts.global_baseline,
        opts.seed,
    )?;
    let mut out = create_out(&opts.out_path)?;
    write_evaluation_csv(&mut out, &rows).map_err(io_err(&opts.out_path))?;
    out.flush().map_err(io_err(&opts.out_path))?;
    write_meta(&opts.out_path, opts, Some(opts.seed), BASELINE_NOTES)?;
    Ok(rows)
}

#[derive(Debug, Clone, Serialize)]
pub struct ReportOpts {
    pub paths_path: PathBuf,
    pub out_path: PathBuf,
}

pub fn stage_report(opts: &ReportOpts) -> Result<usize, PipelineError> {
    let paths = read_paths(open_in(&opts.paths_path)?).map_err(stage("evolution", None))?;
    let mut out = create_out(&opts.out_path)?;
    write_paths_csv(&mut out, &paths).map_err(io_err(&opts.out_path))?;
    out.flush().map_err(io_err(&opts.out_path))?;
    write_meta(&opts.out_path, opts, None, &[])?;
    Ok(paths.len())
}

#[derive(Debug, Clone, Serialize)]
pub struct SimulateTemporalOpts {
    pub config: TemporalPlantConfig,
    pub out_dir: PathBuf,
}

/// Writes `votes.tsv`, `articles.jsonl`, and `truth.jsonl` for a planted
/// temporal corpus; returns the file paths.
pub fn stage_simulate_temporal(
    opts: &SimulateTemporalOpts,
) -> Result<[PathBuf; 3], PipelineError> {
    let plant = generate_temporal_plant(&opts.config).map_err(stage("simulation", None))?;
    std::fs::create_dir_all(&opts.out_dir).map_err(io_err(&opts.out_dir))?;
    let votes_path = opts.out_dir.join("votes.tsv");
    let articles_path = opts.out_dir.join("articles.jsonl");
    let truth_path = opts.out_dir.join("truth.jsonl");
    plant
        .write_files(&votes_path, &articles_path, &truth_path)
        .map_err(io_err(&opts.out_dir))?;
    write_meta(&votes_path, opts, Some(opts.config.seed), &[])?;
    write_meta(&articles_path, opts, Some(opts.config.seed), &[])?;
    write_meta(&truth_path, opts, Some(opts.config.seed), &[])?;
    Ok([votes_path, articles_path, truth_path])
}

#[derive(Debug, Clone, Serialize)]
pub struct SimulateOpinionOpts {
    pub config: SimConfig,
    pub out_dir: PathBuf,
}

#[derive(Serialize)]
struct OpinionTruthRecord<'a> {
    user_id: &'a str,
    center: usize,
}

/// Writes one opinion-space generation in corpus formats plus per-user
/// ground-truth labels.
pub fn stage_simulate_opinion(opts: &SimulateOpinionOpts) -> Result<[PathBuf; 3], PipelineError> {
    let dataset = generate(&opts.config).map_err(stage("simulation", None))?;
    let (votes, articles) = dataset_as_corpus(&dataset);
    std::fs::create_dir_all(&opts.out_dir).map_err(io_err(&opts.out_dir))?;

    let votes_path = opts.out_dir.join("votes.tsv");
    let mut out = create_out(&votes_path)?;
    writeln!(out, "# user_id\tarticle_id\ttimestamp").map_err(io_err(&votes_path))?;
    for vote in &votes {
        writeln!(out, "{}\t{}\t{}", vote.user_id, vote.article_id, vote.timestamp)
            .map_err(io_err(&votes_path))?;
    }
    out.flush().map_err(io_err(&votes_path))?;

    let articles_path = opts.out_dir.join("articles.jsonl");
    let mut out = create_out(&articles_path)?;
    crate::jsonl::write_records(&mut out, &articles).map_err(io_err(&articles_path))?;
    out.flush().map_err(io_err(&articles_path))?;

    let truth_path = opts.out_dir.join("truth.jsonl");
    let mut out = create_out(&truth_path)?;
    let ids: Vec<String> = (0..dataset.truth_labels.len()).map(|i| format!("u{i:05}")).collect();
    let records = dataset
        .truth_labels
        .iter()
        .enumerate()
        .map(|(i, &center)| OpinionTruthRecord {
            user_id: &ids[i],
            center,
        });
    crate::jsonl::write_records(&mut out, records).map_err(io_err(&truth_path))?;
    out.flush().map_err(io_err(&truth_path))?;

    for path in [&votes_path, &articles_path, &truth_path] {
        write_meta(path, opts, Some(opts.config.seed), SIM_NOTES)?;
    }
    Ok([votes_path, articles_path, truth_path])
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepOpts {
    pub config: SimConfig,
    pub sigmas: Vec<f64>,
    pub runs: usize,
    pub out_path: PathBuf,
}

pub fn stage_sweep(opts: &SweepOpts) -> Result<Vec<SweepRow>, PipelineError> {
    let rows = sweep_std(&opts.config, &opts.sigmas, opts.runs).map_err(stage("simulation", None))?;
    let mut out = create_out(&opts.out_path)?;
    write_sweep_csv(&mut out, &rows).map_err(io_err(&opts.out_path))?;
    out.flush().map_err(io_err(&opts.out_path))?;
    write_meta(&opts.out_path, opts, Some(opts.config.seed), SIM_NOTES)?;
    Ok(rows)
}
