//! Entropy-based path coherence: source entropy, effective number of
//! sources, a vote-weighted random baseline, and relative recurrence.
//!
//! For a multiset of publication domains with empirical probabilities `p_i`,
//!
//! ```text
//! Entropy = −Σ p_i log2(p_i)        effective sources = 2^Entropy
//! ```
//!
//! A path whose representative articles keep coming from a few domains has
//! low entropy. The baseline samples *votes* (not articles) uniformly with
//! replacement, so heavily voted articles are proportionally likely to be
//! drawn, and
//!
//! ```text
//! relative recurrence = 2^Entropy(random) / 2^Entropy(path)
//! ```
//!
//! is the factor by which the path concentrates its sources beyond chance.

use std::collections::BTreeMap;
use std::io::{self, Write};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::content::extract_domain;
use crate::corpus::{ArticleMeta, WindowSlice};

#[derive(Debug, Error)]
pub enum EvaluationError {
    #[error("cannot compute entropy of an empty domain multiset")]
    EmptyDomains,
    #[error("no votes with article metadata available in the covered windows")]
    NoVotes,
    #[error("baseline sample_size must be at least 1")]
    ZeroSampleSize,
    #[error("baseline repetitions must be at least 1")]
    ZeroRepetitions,
}

/// Spread statistics of repeated baseline draws.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaselineStats {
    pub repetitions: usize,
    pub sample_size: usize,
    pub seed: u64,
    /// Per-repetition entropies, in repetition order.
    pub values: Vec<f64>,
    pub mean: f64,
    /// Sample standard deviation (0 for a single repetition).
    pub std_dev: f64,
}

/// Source-diversity report for a path or a random baseline.
///
/// For baselines `entropy_bits` is the mean per-repetition entropy and the
/// probability table pools every drawn sample.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntropyReport {
    pub subject: String,
    pub domain_probabilities: BTreeMap<String, f64>,
    pub entropy_bits: f64,
    pub effective_sources: f64,
    pub baseline: Option<BaselineStats>,
}

impl EntropyReport {
    pub fn distinct_domains(&self) -> usize {
        self.domain_probabilities.len()
    }
}

/// Shannon entropy (bits) of a domain multiset given as counts.
pub fn source_entropy_from_counts<S: AsRef<str>>(
    counts: &[(S, usize)],
) -> Result<f64, EvaluationError> {
    let total: usize = counts.iter().map(|(_, c)| c).sum();
    if total == 0 {
        return Err(EvaluationError::EmptyDomains);
    }
    let mut entropy = 0.0;
    for (_, count) in counts {
        if *count == 0 {
            continue; // 0·log 0 = 0
        }
        let p = *count as f64 / total as f64;
        entropy -= p * p.log2();
    }
    Ok(entropy.max(0.0))
}

/// Shannon entropy (bits) of a raw domain multiset.
pub fn source_entropy<S: AsRef<str>>(domains: &[S]) -> Result<f64, EvaluationError> {
    let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
    for d in domains {
        *counts.entry(d.as_ref()).or_insert(0) += 1;
    }
    let counts: Vec<(&str, usize)> = counts.into_iter().collect();
    source_entropy_from_counts(&counts)
}

/// Builds the report for a subject with a fixed domain count table.
pub fn entropy_report<S: AsRef<str>>(
    subject: &str,
    domain_counts: &[(S, usize)],
) -> Result<EntropyReport, EvaluationError> {
    let entropy = source_entropy_from_counts(domain_counts)?;
    let total: usize = domain_counts.iter().map(|(_, c)| c).sum();
    let domain_probabilities = domain_counts
        .iter()
        .filter(|(_, c)| *c > 0)
        .map(|(d, c)| (d.as_ref().to_string(), *c as f64 / total as f64))
        .collect();
    Ok(EntropyReport {
        subject: subject.to_string(),
        domain_probabilities,
        entropy_bits: entropy,
        effective_sources: entropy.exp2(),
        baseline: None,
    })
}

/// Draws `repetitions` baseline samples of `sample_size` votes (uniformly,
/// with replacement) from all votes in the covered windows, maps each vote
/// to its article's domain, and reports the per-repetition entropies.
///
/// Votes to articles without metadata carry no domain and are excluded from
/// the pool. The generator is seeded per repetition from `seed`, so reports
/// are bit-identical across runs and repetitions are independent.
pub fn random_baseline(
    subject: &str,
    slices: &[WindowSlice],
    articles: &BTreeMap<String, ArticleMeta>,
    sample_size: usize,
    repetitions: usize,
    seed: u64,
) -> Result<EntropyReport, EvaluationError> {
    if sample_size == 0 {
        return Err(EvaluationError::ZeroSampleSize);
    }
    if repetitions == 0 {
        return Err(EvaluationError::ZeroRepetitions);
    }
    // domain per vote, window by window
    let pool: Vec<String> = slices
        .iter()
        .flat_map(|slice| slice.votes.iter())
        .filter_map(|(_, article)| articles.get(article))
        .map(|meta| extract_domain(&meta.url))
        .collect();
    if pool.is_empty() {
        return Err(EvaluationError::NoVotes);
    }

    let mut values = Vec::with_capacity(repetitions);
    let mut pooled: BTreeMap<String, usize> = BTreeMap::new();
    for rep in 0..repetitions {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(rep as u64);
        let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
        for _ in 0..sample_size {
            let domain = pool[rng.random_range(0..pool.len())].as_str();
            *counts.entry(domain).or_insert(0) += 1;
        }
        for (domain, count) in &counts {
            *pooled.entry((*domain).to_string()).or_insert(0) += count;
        }
        let counts: Vec<(&str, usize)> = counts.into_iter().collect();
        values.push(source_entropy_from_counts(&counts)?);
    }

    let mean = values.iter().sum::<f64>() / values.len() as f64;
    let std_dev = if values.len() < 2 {
        0.0
    } else {
        let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>()
            / (values.len() - 1) as f64;
        var.sqrt()
    };
    let pooled_total: usize = pooled.values().sum();
    Ok(EntropyReport {
        subject: subject.to_string(),
        domain_probabilities: pooled
            .into_iter()
            .map(|(d, c)| (d, c as f64 / pooled_total as f64))
            .collect(),
        entropy_bits: mean,
        effective_sources: mean.exp2(),
        baseline: Some(BaselineStats {
            repetitions,
            sample_size,
            seed,
            values,
            mean,
            std_dev,
        }),
    })
}

/// Ratio of effective source counts, baseline over path; above 1 the path
/// is preferential toward fewer sources than chance.
pub fn relative_recurrence(path: &EntropyReport, baseline: &EntropyReport) -> f64 {
    baseline.effective_sources / path.effective_sources
}

/// One row of the evaluation CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationRow {
    pub path_id: usize,
    pub entropy_bits: f64,
    pub effective_sources: f64,
    pub baseline_mean_entropy: f64,
    pub baseline_std: f64,
    pub relative_recurrence: f64,
    pub sample_size: usize,
    pub repetitions: usize,
    pub seed: u64,
}

pub fn write_evaluation_csv<W: Write>(out: &mut W, rows: &[EvaluationRow]) -> io::Result<()> {
    writeln!(
        out,
        "path_id,entropy_bits,effective_sources,baseline_mean_entropy,baseline_std,\
         relative_recurrence,sample_size,repetitions,seed"
    )?;
    for row in rows {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{}",
            row.path_id,
            row.entropy_bits,
            row.effective_sources,
            row.baseline_mean_entropy,
            row.baseline_std,
            row.relative_recurrence,
            row.sample_size,
            row.repetitions,
            row.seed
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{slice_window, VoteRecord, WindowSpec};
    use proptest::prelude::*;

    #[test]
    fn entropy_of_uniform_domains() {
        let domains: Vec<String> = (0..4).map(|i| format!("d{i}")).collect();
        assert_eq!(source_entropy(&domains).unwrap(), 2.0);
    }

    #[test]
    fn entropy_of_single_domain_is_zero() {
        let domains = vec!["only.example"; 17];
        assert_eq!(source_entropy(&domains).unwrap(), 0.0);
    }

    #[test]
    fn entropy_of_half_quarter_quarter() {
        let domains = ["a", "a", "b", "c"];
        assert_eq!(source_entropy(&domains).unwrap(), 1.5);
    }

    #[test]
    fn entropy_rejects_empty_multiset() {
        assert!(matches!(
            source_entropy::<&str>(&[]),
            Err(EvaluationError::EmptyDomains)
        ));
    }

    #[test]
    fn entropy_ignores_zero_counts() {
        let counts = [("a", 2usize), ("gone", 0), ("b", 1), ("c", 1)];
        assert_eq!(source_entropy_from_counts(&counts).unwrap(), 1.5);
    }

    #[test]
    fn report_effective_sources_is_two_to_entropy() {
        let report = entropy_report("p", &[("a", 2usize), ("b", 1), ("c", 1)]).unwrap();
        assert_eq!(report.entropy_bits, 1.5);
        assert!((report.effective_sources - 1.5f64.exp2()).abs() < 1e-12);
        let prob_sum: f64 = report.domain_probabilities.values().sum();
        assert!((prob_sum - 1.0).abs() < 1e-9);
    }

    fn slice_with_articles(n_articles: usize) -> (WindowSlice, BTreeMap<String, ArticleMeta>) {
        let votes: Vec<VoteRecord> = (0..n_articles)
            .map(|i| VoteRecord {
                user_id: format!("u{i}"),
                article_id: format!("a{i}"),
                timestamp: 0,
            })
            .collect();
        let slice = slice_window(
            &votes,
            0,
            WindowSpec {
                start: 0,
                length: 10,
                step: 10,
            },
        );
        let articles = (0..n_articles)
            .map(|i| {
                (
                    format!("a{i}"),
                    ArticleMeta {
                        article_id: format!("a{i}"),
                        posted_at: 0,
                        category: "politics".into(),
                        url: format!("http://domain{i}.example/x"),
                        title: String::new(),
                        summary: String::new(),
                    },
                )
            })
            .collect();
        (slice, articles)
    }

    #[test]
    fn baseline_single_domain_is_zero_everywhere() {
        let (slice, mut articles) = slice_with_articles(5);
        for meta in articles.values_mut() {
            meta.url = "http://same.example/x".into();
        }
        let report =
            random_baseline("b", std::slice::from_ref(&slice), &articles, 50, 10, 1).unwrap();
        assert!(report.baseline.as_ref().unwrap().values.iter().all(|&v| v == 0.0));
        assert_eq!(report.entropy_bits, 0.0);
    }

    #[test]
    fn baseline_converges_to_uniform_entropy() {
        // 8 single-vote articles from 8 domains; large samples approach 3 bits
        let (slice, articles) = slice_with_articles(8);
        let report =
            random_baseline("b", std::slice::from_ref(&slice), &articles, 10_000, 10, 7).unwrap();
        assert!((report.entropy_bits - 3.0).abs() < 0.1, "{}", report.entropy_bits);
    }

    #[test]
    fn baseline_is_deterministic_for_a_seed() {
        let (slice, articles) = slice_with_articles(6);
        let a = random_baseline("b", std::slice::from_ref(&slice), &articles, 100, 20, 99).unwrap();
        let b = random_baseline("b", std::slice::from_ref(&slice), &articles, 100, 20, 99).unwrap();
        assert_eq!(a, b);
        let c = random_baseline("b", std::slice::from_ref(&slice), &articles, 100, 20, 98).unwrap();
        assert_ne!(a.baseline.unwrap().values, c.baseline.unwrap().values);
    }

    #[test]
    fn baseline_rejects_empty_pool_and_zero_sizes() {
        let (slice, articles) = slice_with_articles(3);
        assert!(matches!(
            random_baseline("b", &[], &articles, 10, 10, 0),
            Err(EvaluationError::NoVotes)
        ));
        assert!(matches!(
            random_baseline("b", std::slice::from_ref(&slice), &articles, 0, 10, 0),
            Err(EvaluationError::ZeroSampleSize)
        ));
        assert!(matches!(
            random_baseline("b", std::slice::from_ref(&slice), &articles, 10, 0, 0),
            Err(EvaluationError::ZeroRepetitions)
        ));
    }

    #[test]
    fn recurrence_ratio_of_effective_sources() {
        let baseline = entropy_report("b", &[("a", 1usize), ("b", 1), ("c", 1), ("d", 1), ("e", 1), ("f", 1), ("g", 1), ("h", 1)]).unwrap();
        let path = entropy_report("p", &[("a", 1usize), ("b", 1)]).unwrap();
        assert_eq!(relative_recurrence(&path, &baseline), 4.0);
    }

    #[test]
    fn recurrence_of_identical_distributions_is_one() {
        let a = entropy_report("a", &[("x", 3usize), ("y", 1)]).unwrap();
        let b = entropy_report("b", &[("x", 3usize), ("y", 1)]).unwrap();
        assert!((relative_recurrence(&a, &b) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn evaluation_csv_shape() {
        let rows = vec![EvaluationRow {
            path_id: 3,
            entropy_bits: 1.5,
            effective_sources: 2.8284271247461903,
            baseline_mean_entropy: 3.0,
            baseline_std: 0.05,
            relative_recurrence: 2.83,
            sample_size: 60,
            repetitions: 100,
            seed: 42,
        }];
        let mut buf = Vec::new();
        write_evaluation_csv(&mut buf, &rows).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert!(lines.next().unwrap().starts_with("path_id,entropy_bits"));
        assert!(lines.next().unwrap().starts_with("3,1.5,2.8284271247461903,3,0.05,2.83,60,100,42"));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        /// Entropy is permutation-invariant and bounded by log2 of the
        /// distinct-domain count; effective sources never exceed it.
        #[test]
        fn entropy_bounds_and_permutation_invariance(
            mut domains in proptest::collection::vec(0u8..10, 1..80),
        ) {
            let named: Vec<String> = domains.iter().map(|d| format!("d{d}")).collect();
            let h = source_entropy(&named).unwrap();
            domains.reverse();
            let reversed: Vec<String> = domains.iter().map(|d| format!("d{d}")).collect();
            prop_assert_eq!(h, source_entropy(&reversed).unwrap());

            let distinct = {
                let mut d = domains.clone();
                d.sort_unstable();
                d.dedup();
                d.len()
            };
            prop_assert!(h >= 0.0);
            prop_assert!(h <= (distinct as f64).log2() + 1e-9);
            prop_assert!(h.exp2() <= distinct as f64 + 1e-9);
        }
    }
}
