//! Synthetic benchmarks: a planted 2-D opinion space scored against a
//! k-means oracle, and a planted temporal corpus for end-to-end pipeline
//! tests.
//!
//! Users sit in a two-dimensional opinion space, normally scattered around
//! one of four quadrant centers; the center index is the ground truth. Each
//! user posts a Poisson number of articles near itself and votes for
//! articles within `vote_radius` with probability `vote_probability`.
//! Running the vote → Jaccard → community pipeline on the generated votes
//! and comparing pair error against k-means on the (otherwise unobserved)
//! true positions reproduces the error-vs-σ curve.
//!
//! All randomness flows from explicit seeds through named, portable
//! samplers (Marsaglia polar for Gaussians, Knuth multiplication for
//! Poisson), so reruns are bit-identical and reimplementations can match
//! the distributions statistically.

use std::io::{self, BufRead, Write};
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::community::detect_communities;
use crate::corpus::{slice_window, ArticleMeta, VoteRecord, WindowSpec, DAY_SECONDS};
use crate::graph::{build_bipartite, project_jaccard};
use crate::jsonl;

#[derive(Debug, Error)]
pub enum SimulationError {
    #[error("invalid simulation config: {0}")]
    InvalidConfig(String),
    #[error("k-means needs at least {k} users, got {users}")]
    TooFewUsers { users: usize, k: usize },
    #[error("label vectors differ in length: {left} vs {right}")]
    LabelMismatch { left: usize, right: usize },
}

// ---------------------------------------------------------------------------
// portable samplers
// ---------------------------------------------------------------------------

/// Standard normal variate via the Marsaglia polar method: draw (u, v)
/// uniform on (−1, 1)² until 0 < s = u² + v² < 1, return
/// `u · sqrt(−2 ln s / s)`.
pub fn sample_standard_normal<R: Rng>(rng: &mut R) -> f64 {
    loop {
        let u = rng.random::<f64>() * 2.0 - 1.0;
        let v = rng.random::<f64>() * 2.0 - 1.0;
        let s = u * u + v * v;
        if s > 0.0 && s < 1.0 {
            return u * (-2.0 * s.ln() / s).sqrt();
        }
    }
}

/// Poisson variate via Knuth's multiplication method: multiply uniforms
/// until the product drops below e^(−mean).
pub fn sample_poisson<R: Rng>(rng: &mut R, mean: f64) -> u64 {
    let threshold = (-mean).exp();
    let mut k = 0u64;
    let mut product = 1.0f64;
    loop {
        product *= rng.random::<f64>();
        if product <= threshold {
            return k;
        }
        k += 1;
    }
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = x;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Mixes a base seed with two indices into an independent stream seed.
pub fn derive_seed(base: u64, a: u64, b: u64) -> u64 {
    splitmix64(splitmix64(base ^ splitmix64(a)) ^ b)
}

// ---------------------------------------------------------------------------
// opinion-space benchmark
// ---------------------------------------------------------------------------

/// Configuration of the opinion-space generator. `article_std` of `None`
/// derives as half the position σ.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub user_count: usize,
    pub cluster_centers: Vec<[f64; 2]>,
    pub position_std: f64,
    pub articles_per_user_mean: f64,
    pub article_std: Option<f64>,
    pub vote_radius: f64,
    pub vote_probability: f64,
    /// Generations averaged per sweep point.
    pub runs: usize,
    pub seed: u64,
}

impl SimConfig {
    /// 500 users around the four quadrant corners (±1, ±1) with the given
    /// position σ.
    pub fn with_sigma(position_std: f64) -> Self {
        Self {
            user_count: 500,
            cluster_centers: vec![[1.0, 1.0], [-1.0, 1.0], [-1.0, -1.0], [1.0, -1.0]],
            position_std,
            articles_per_user_mean: 2.0,
            article_std: None,
            vote_radius: 1.0,
            vote_probability: 0.5,
            runs: 10,
            seed: 0,
        }
    }

    pub fn effective_article_std(&self) -> f64 {
        self.article_std.unwrap_or(self.position_std / 2.0)
    }

    pub fn validate(&self) -> Result<(), SimulationError> {
        if self.cluster_centers.is_empty() {
            return Err(SimulationError::InvalidConfig("no cluster centers".into()));
        }
        if self.position_std < 0.0 || self.effective_article_std() < 0.0 {
            return Err(SimulationError::InvalidConfig("negative std".into()));
        }
        if self.vote_radius <= 0.0 {
            return Err(SimulationError::InvalidConfig("vote_radius must be positive".into()));
        }
        if !(0.0..=1.0).contains(&self.vote_probability) {
            return Err(SimulationError::InvalidConfig(
                "vote_probability outside [0, 1]".into(),
            ));
        }
        if !(0.0..100.0).contains(&self.articles_per_user_mean) {
            return Err(SimulationError::InvalidConfig(
                "articles_per_user_mean outside [0, 100)".into(),
            ));
        }
        if self.user_count == 0 || self.runs == 0 {
            return Err(SimulationError::InvalidConfig(
                "user_count and runs must be positive".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimArticle {
    pub position: [f64; 2],
    pub poster: usize,
}

/// One generated opinion-space world: positions, ground-truth labels,
/// articles, and the realized vote set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticDataset {
    pub user_positions: Vec<[f64; 2]>,
    pub truth_labels: Vec<usize>,
    pub articles: Vec<SimArticle>,
    pub votes: Vec<(usize, usize)>,
}

fn squared_distance(a: [f64; 2], b: [f64; 2]) -> f64 {
    let dx = a[0] - b[0];
    let dy = a[1] - b[1];
    dx * dx + dy * dy
}

/// Generates one dataset. Users split equally over the centers (remainder
/// to the lowest center indices), votes obey the radius gate exactly, and a
/// fixed seed reproduces the dataset bit for bit.
pub fn generate(cfg: &SimConfig) -> Result<SyntheticDataset, SimulationError> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let k = cfg.cluster_centers.len();
    let base = cfg.user_count / k;
    let remainder = cfg.user_count % k;

    let mut truth_labels = Vec::with_capacity(cfg.user_count);
    for (center, _) in cfg.cluster_centers.iter().enumerate() {
        let size = base + usize::from(center < remainder);
        truth_labels.extend(std::iter::repeat_n(center, size));
    }

    let mut user_positions = Vec::with_capacity(cfg.user_count);
    for &label in &truth_labels {
        let center = cfg.cluster_centers[label];
        user_positions.push([
            center[0] + sample_standard_normal(&mut rng) * cfg.position_std,
            center[1] + sample_standard_normal(&mut rng) * cfg.position_std,
        ]);
    }

    let article_std = cfg.effective_article_std();
    let mut articles = Vec::new();
    for (poster, position) in user_positions.iter().enumerate() {
        let count = sample_poisson(&mut rng, cfg.articles_per_user_mean);
        for _ in 0..count {
            articles.push(SimArticle {
                position: [
                    position[0] + sample_standard_normal(&mut rng) * article_std,
                    position[1] + sample_standard_normal(&mut rng) * article_std,
                ],
                poster,
            });
        }
    }

    let radius_sq = cfg.vote_radius * cfg.vote_radius;
    let mut votes = Vec::new();
    for (user, user_pos) in user_positions.iter().enumerate() {
        for (article, meta) in articles.iter().enumerate() {
            if squared_distance(*user_pos, meta.position) <= radius_sq
                && rng.random::<f64>() < cfg.vote_probability
            {
                votes.push((user, article));
            }
        }
    }

    Ok(SyntheticDataset {
        user_positions,
        truth_labels,
        articles,
        votes,
    })
}

fn synthetic_user_id(index: usize) -> String {
    format!("u{index:05}")
}

/// Converts a generated dataset into corpus-format rows (synthetic ids, all
/// timestamps at the window origin, one shared category).
pub fn dataset_as_corpus(dataset: &SyntheticDataset) -> (Vec<VoteRecord>, Vec<ArticleMeta>) {
    let votes = dataset
        .votes
        .iter()
        .map(|&(user, article)| VoteRecord {
            user_id: synthetic_user_id(user),
            article_id: format!("a{article:05}"),
            timestamp: 0,
        })
        .collect();
    let articles = dataset
        .articles
        .iter()
        .enumerate()
        .map(|(i, a)| ArticleMeta {
            article_id: format!("a{i:05}"),
            posted_at: 0,
            category: "simulated".into(),
            url: format!("http://sim.example/a{i:05}"),
            title: format!("simulated article by u{:05}", a.poster),
            summary: String::new(),
        })
        .collect();
    (votes, articles)
}

/// Runs the vote → Jaccard → greedy-modularity pipeline on the dataset's
/// votes and returns one label per user. Users without votes (absent from
/// the window) become fresh singletons.
pub fn detect_opinion_labels(dataset: &SyntheticDataset) -> Vec<usize> {
    let (votes, _) = dataset_as_corpus(dataset);
    let slice = slice_window(
        &votes,
        0,
        WindowSpec {
            start: 0,
            length: 1,
            step: 1,
        },
    );
    let graph = project_jaccard(&build_bipartite(&slice), 1);
    let partition = detect_communities(&graph);
    let mut next = partition.community_count();
    (0..dataset.user_positions.len())
        .map(|i| {
            partition.community_of(&synthetic_user_id(i)).unwrap_or_else(|| {
                let fresh = next;
                next += 1;
                fresh
            })
        })
        .collect()
}

/// Lloyd's k-means over the true user positions, best of `restarts` by
/// within-cluster sum of squares. Empty clusters reseed at the point
/// farthest from its assigned center.
pub fn kmeans_oracle(
    dataset: &SyntheticDataset,
    k: usize,
    restarts: usize,
    seed: u64,
) -> Result<Vec<usize>, SimulationError> {
    let points = &dataset.user_positions;
    let n = points.len();
    if k == 0 || restarts == 0 {
        return Err(SimulationError::InvalidConfig(
            "k and restarts must be positive".into(),
        ));
    }
    if n < k {
        return Err(SimulationError::TooFewUsers { users: n, k });
    }

    let mut best: Option<(f64, Vec<usize>)> = None;
    for restart in 0..restarts {
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, 0x6b6d, restart as u64));
        let init = rand::seq::index::sample(&mut rng, n, k);
        let mut centers: Vec<[f64; 2]> = init.iter().map(|i| points[i]).collect();
        let mut assignment = vec![0usize; n];

        for _ in 0..100 {
            let mut changed = false;
            for (i, point) in points.iter().enumerate() {
                let mut best_c = 0;
                let mut best_d = f64::INFINITY;
                for (c, center) in centers.iter().enumerate() {
                    let d = squared_distance(*point, *center);
                    if d < best_d {
                        best_d = d;
                        best_c = c;
                    }
                }
                if assignment[i] != best_c {
                    assignment[i] = best_c;
                    changed = true;
                }
            }

            let mut counts = vec![0usize; k];
            let mut sums = vec![[0.0f64; 2]; k];
            for (i, point) in points.iter().enumerate() {
                counts[assignment[i]] += 1;
                sums[assignment[i]][0] += point[0];
                sums[assignment[i]][1] += point[1];
            }
            for c in 0..k {
                if counts[c] > 0 {
                    centers[c] = [sums[c][0] / counts[c] as f64, sums[c][1] / counts[c] as f64];
                } else {
                    // reseed at the point farthest from its assigned center
                    let far = (0..n)
                        .max_by(|&i, &j| {
                            let di = squared_distance(points[i], centers[assignment[i]]);
                            let dj = squared_distance(points[j], centers[assignment[j]]);
                            di.partial_cmp(&dj).expect("distances are finite")
                        })
                        .expect("points exist");
                    centers[c] = points[far];
                    changed = true;
                }
            }
            if !changed {
                break;
            }
        }

        let wcss: f64 = points
            .iter()
            .enumerate()
            .map(|(i, p)| squared_distance(*p, centers[assignment[i]]))
            .sum();
        if best.as_ref().is_none_or(|(b, _)| wcss < *b) {
            best = Some((wcss, assignment));
        }
    }
    Ok(best.expect("at least one restart").1)
}

/// Fraction of unordered user pairs whose same/different-community relation
/// disagrees between the two labelings.
pub fn pair_error(predicted: &[usize], truth: &[usize]) -> Result<f64, SimulationError> {
    if predicted.len() != truth.len() {
        return Err(SimulationError::LabelMismatch {
            left: predicted.len(),
            right: truth.len(),
        });
    }
    let n = predicted.len();
    if n < 2 {
        return Ok(0.0);
    }
    let mut disagreements = 0u64;
    for i in 0..n {
        for j in i + 1..n {
            let together_predicted = predicted[i] == predicted[j];
            let together_truth = truth[i] == truth[j];
            if together_predicted != together_truth {
                disagreements += 1;
            }
        }
    }
    let pairs = (n as u64) * (n as u64 - 1) / 2;
    Ok(disagreements as f64 / pairs as f64)
}

/// One aggregated sweep measurement.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub sigma: f64,
    pub method: String,
    pub mean_error: f64,
    /// Two sample standard deviations over the runs.
    pub two_std: f64,
}

/// Sweeps the position σ: for each value, `runs` independent generations
/// are scored by pair error for both the vote-graph pipeline and the
/// k-means oracle. Per-run seeds derive from the base config seed, the σ
/// index, and the run index.
pub fn sweep_std(
    base: &SimConfig,
    sigmas: &[f64],
    runs: usize,
) -> Result<Vec<SweepRow>, SimulationError> {
    if runs == 0 {
        return Err(SimulationError::InvalidConfig("runs must be positive".into()));
    }
    let mut rows = Vec::new();
    for (sigma_index, &sigma) in sigmas.iter().enumerate() {
        let mut pipeline_errors = Vec::with_capacity(runs);
        let mut kmeans_errors = Vec::with_capacity(runs);
        for run in 0..runs {
            let mut cfg = base.clone();
            cfg.position_std = sigma;
            cfg.seed = derive_seed(base.seed, sigma_index as u64, run as u64);
            let dataset = generate(&cfg)?;

            let detected = detect_opinion_labels(&dataset);
            pipeline_errors.push(pair_error(&detected, &dataset.truth_labels)?);

            let k = cfg.cluster_centers.len();
            let kmeans_seed = derive_seed(base.seed ^ 0x6b6d_6561_6e73, sigma_index as u64, run as u64);
            let oracle = kmeans_oracle(&dataset, k, 10, kmeans_seed)?;
            kmeans_errors.push(pair_error(&oracle, &dataset.truth_labels)?);
        }
        rows.push(summarize(sigma, "pipeline", &pipeline_errors));
        rows.push(summarize(sigma, "kmeans", &kmeans_errors));
    }
    Ok(rows)
}

fn summarize(sigma: f64, method: &str, errors: &[f64]) -> SweepRow {
    let mean = errors.iter().sum::<f64>() / errors.len() as f64;
    let std = if errors.len() < 2 {
        0.0
    } else {
        let var = errors.iter().map(|e| (e - mean) * (e - mean)).sum::<f64>()
            / (errors.len() - 1) as f64;
        var.sqrt()
    };
    SweepRow {
        sigma,
        method: method.to_string(),
        mean_error: mean,
        two_std: 2.0 * std,
    }
}

pub fn write_sweep_csv<W: Write>(out: &mut W, rows: &[SweepRow]) -> io::Result<()> {
    writeln!(out, "sigma,method,mean_error,two_std")?;
    for row in rows {
        writeln!(
            out,
            "{},{},{},{}",
            row.sigma, row.method, row.mean_error, row.two_std
        )?;
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// planted temporal benchmark
// ---------------------------------------------------------------------------

/// Letter-only community themes so planted titles tokenize into distinct
/// terms.
const THEMES: [&str; 12] = [
    "alpha", "bravo", "charlie", "delta", "echo", "foxtrot", "golf", "hotel", "india", "juliett",
    "kilo", "lima",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DomainPreference {
    pub domain: String,
    pub probability: f64,
}

/// Planted temporal corpus: fixed-size communities whose members churn at a
/// constant rate between windows and vote on their own community's
/// articles, each article sourced from the community's domain preference
/// distribution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TemporalPlantConfig {
    pub windows: usize,
    pub community_sizes: Vec<usize>,
    /// Per-step probability that a member leaves (and is replaced).
    pub churn: f64,
    pub domain_preferences: Vec<Vec<DomainPreference>>,
    pub articles_per_community: usize,
    pub vote_probability: f64,
    /// Probability of voting an article from another community.
    pub cross_vote_probability: f64,
    pub window_days: i64,
    pub category: String,
    pub seed: u64,
}

impl TemporalPlantConfig {
    /// Three domains per community at probabilities 0.5 / 0.3 / 0.2.
    pub fn default_domain_preferences(communities: usize) -> Vec<Vec<DomainPreference>> {
        (0..communities)
            .map(|k| {
                let theme = THEMES[k % THEMES.len()];
                [(0.5, "daily"), (0.3, "herald"), (0.2, "wire")]
                    .iter()
                    .map(|&(probability, kind)| DomainPreference {
                        domain: format!("{theme}-{kind}.example"),
                        probability,
                    })
                    .collect()
            })
            .collect()
    }

    pub fn new(windows: usize, community_sizes: Vec<usize>, churn: f64, seed: u64) -> Self {
        let domain_preferences = Self::default_domain_preferences(community_sizes.len());
        Self {
            windows,
            community_sizes,
            churn,
            domain_preferences,
            articles_per_community: 30,
            vote_probability: 0.5,
            cross_vote_probability: 0.0,
            window_days: 30,
            category: "politics".into(),
            seed,
        }
    }

    pub fn validate(&self) -> Result<(), SimulationError> {
        if self.windows == 0 {
            return Err(SimulationError::InvalidConfig("windows must be positive".into()));
        }
        if self.community_sizes.is_empty() || self.community_sizes.contains(&0) {
            return Err(SimulationError::InvalidConfig(
                "community sizes must be positive".into(),
            ));
        }
        if !(0.0..1.0).contains(&self.churn) {
            return Err(SimulationError::InvalidConfig("churn outside [0, 1)".into()));
        }
        if self.domain_preferences.len() != self.community_sizes.len() {
            return Err(SimulationError::InvalidConfig(
                "one domain preference list per community required".into(),
            ));
        }
        for prefs in &self.domain_preferences {
            let total: f64 = prefs.iter().map(|p| p.probability).sum();
            if (total - 1.0).abs() > 1e-9 || prefs.iter().any(|p| p.probability < 0.0) {
                return Err(SimulationError::InvalidConfig(
                    "domain preferences must sum to 1".into(),
                ));
            }
        }
        if self.articles_per_community == 0 {
            return Err(SimulationError::InvalidConfig(
                "articles_per_community must be positive".into(),
            ));
        }
        for p in [self.vote_probability, self.cross_vote_probability] {
            if !(0.0..=1.0).contains(&p) {
                return Err(SimulationError::InvalidConfig("vote probability outside [0, 1]".into()));
            }
        }
        if self.window_days <= 0 {
            return Err(SimulationError::InvalidConfig("window_days must be positive".into()));
        }
        Ok(())
    }

    pub fn window_seconds(&self) -> i64 {
        self.window_days * DAY_SECONDS
    }
}

/// Ground truth of a planted corpus.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlantedCommunity {
    pub community: usize,
    pub domains: Vec<DomainPreference>,
    pub members_per_window: Vec<Vec<String>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlantTruth {
    pub communities: Vec<PlantedCommunity>,
}

impl PlantTruth {
    /// Retention of the planted membership at lag `delta`, averaged over
    /// starting windows — the oracle for pipeline retention checks.
    pub fn planted_retention(&self, community: usize, delta: usize) -> f64 {
        let windows = &self.communities[community].members_per_window;
        if delta >= windows.len() {
            return 0.0;
        }
        let mut total = 0.0;
        let steps = windows.len() - delta;
        for i in 0..steps {
            let now: std::collections::BTreeSet<&String> = windows[i].iter().collect();
            let later: std::collections::BTreeSet<&String> = windows[i + delta].iter().collect();
            total += now.intersection(&later).count() as f64 / now.len() as f64;
        }
        total / steps as f64
    }

    pub fn planted_domains(&self, community: usize) -> Vec<&str> {
        self.communities[community]
            .domains
            .iter()
            .map(|d| d.domain.as_str())
            .collect()
    }
}

/// A generated planted corpus, in corpus-module formats.
#[derive(Debug, Clone, PartialEq)]
pub struct TemporalPlant {
    pub votes: Vec<VoteRecord>,
    pub articles: Vec<ArticleMeta>,
    pub truth: PlantTruth,
}

impl TemporalPlant {
    /// Writes the corpus files and the truth record (JSON-lines, one record
    /// per planted community).
    pub fn write_files(
        &self,
        votes_path: &Path,
        articles_path: &Path,
        truth_path: &Path,
    ) -> io::Result<()> {
        let mut votes = io::BufWriter::new(std::fs::File::create(votes_path)?);
        writeln!(votes, "# user_id\tarticle_id\ttimestamp")?;
        for vote in &self.votes {
            writeln!(votes, "{}\t{}\t{}", vote.user_id, vote.article_id, vote.timestamp)?;
        }
        votes.flush()?;

        let mut articles = io::BufWriter::new(std::fs::File::create(articles_path)?);
        jsonl::write_records(&mut articles, &self.articles)?;
        articles.flush()?;

        let mut truth = io::BufWriter::new(std::fs::File::create(truth_path)?);
        jsonl::write_records(&mut truth, &self.truth.communities)?;
        truth.flush()
    }
}

pub fn read_truth<R: BufRead>(input: R) -> Result<PlantTruth, String> {
    Ok(PlantTruth {
        communities: jsonl::read_records(input)?,
    })
}

fn draw_domain<'a>(prefs: &'a [DomainPreference], rng: &mut ChaCha8Rng) -> &'a str {
    let roll: f64 = rng.random();
    let mut cumulative = 0.0;
    for pref in prefs {
        cumulative += pref.probability;
        if roll < cumulative {
            return &pref.domain;
        }
    }
    &prefs.last().expect("non-empty preferences").domain
}

/// Generates the planted temporal corpus: per window, each community emits
/// `articles_per_community` articles (domains drawn from its preference
/// distribution) and each member votes each own-community article with
/// `vote_probability`. Between windows each member independently leaves
/// with probability `churn` and is replaced, so community sizes stay fixed
/// and expected retention at lag Δ is (1 − churn)^Δ.
pub fn generate_temporal_plant(cfg: &TemporalPlantConfig) -> Result<TemporalPlant, SimulationError> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let window_seconds = cfg.window_seconds();
    let communities = cfg.community_sizes.len();

    let mut next_user_id = vec![0usize; communities];
    let mut members: Vec<Vec<String>> = (0..communities)
        .map(|k| {
            (0..cfg.community_sizes[k])
                .map(|_| {
                    let id = format!("c{k:02}u{:05}", next_user_id[k]);
                    next_user_id[k] += 1;
                    id
                })
                .collect()
        })
        .collect();

    let mut votes: Vec<VoteRecord> = Vec::new();
    let mut articles: Vec<ArticleMeta> = Vec::new();
    let mut truth: Vec<PlantedCommunity> = (0..communities)
        .map(|k| PlantedCommunity {
            community: k,
            domains: cfg.domain_preferences[k].clone(),
            members_per_window: Vec::new(),
        })
        .collect();

    for window in 0..cfg.windows {
        if window > 0 {
            for (k, pool) in members.iter_mut().enumerate() {
                for slot in pool.iter_mut() {
                    if rng.random::<f64>() < cfg.churn {
                        *slot = format!("c{k:02}u{:05}", next_user_id[k]);
                        next_user_id[k] += 1;
                    }
                }
            }
        }
        for k in 0..communities {
            truth[k].members_per_window.push(members[k].clone());
        }

        let window_start = window as i64 * window_seconds;
        let mut window_articles: Vec<Vec<String>> = vec![Vec::new(); communities];
        for k in 0..communities {
            let theme = THEMES[k % THEMES.len()];
            for i in 0..cfg.articles_per_community {
                let article_id = format!("w{window:03}c{k:02}a{i:03}");
                let domain = draw_domain(&cfg.domain_preferences[k], &mut rng).to_string();
                let posted_at = window_start + rng.random_range(0..window_seconds);
                articles.push(ArticleMeta {
                    article_id: article_id.clone(),
                    posted_at,
                    category: cfg.category.clone(),
                    url: format!("http://{domain}/{article_id}"),
                    title: format!("{theme} dispatch from {domain}"),
                    summary: format!("ongoing {theme} coverage"),
                });
                window_articles[k].push(article_id);
            }
        }

        for (k, pool) in members.iter().enumerate() {
            for member in pool {
                for (other, community_articles) in window_articles.iter().enumerate() {
                    let p = if other == k {
                        cfg.vote_probability
                    } else {
                        cfg.cross_vote_probability
                    };
                    if p == 0.0 {
                        continue;
                    }
                    for article_id in community_articles {
                        if rng.random::<f64>() < p {
                            votes.push(VoteRecord {
                                user_id: member.clone(),
                                article_id: article_id.clone(),
                                timestamp: window_start + rng.random_range(0..window_seconds),
                            });
                        }
                    }
                }
            }
        }
    }

    Ok(TemporalPlant {
        votes,
        articles,
        truth: PlantTruth { communities: truth },
    })
}
