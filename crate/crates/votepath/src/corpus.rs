//! Vote/article log loading, category filtering, and sliding time windows.
//!
//! A corpus is two flat files: a tab-separated votes log (`user_id`,
//! `article_id`, `timestamp`) and a JSON-lines article metadata file. Windows
//! are half-open intervals `[start, start + length)` anchored at the first
//! vote timestamp and slid by `step`; votes are deduplicated to set
//! membership per window so the downstream Jaccard projection sees sets.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const DAY_SECONDS: i64 = 86_400;

/// One row of the votes log: a user's positive preference signal for an
/// article at a point in time.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VoteRecord {
    pub user_id: String,
    pub article_id: String,
    /// Seconds since epoch; never negative in a well-formed log.
    pub timestamp: i64,
}

/// Article metadata as posted to the site.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ArticleMeta {
    pub article_id: String,
    pub posted_at: i64,
    pub category: String,
    pub url: String,
    pub title: String,
    pub summary: String,
}

/// Window length and slide step, in seconds. `0 < step <= length`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct WindowParams {
    pub length: i64,
    pub step: i64,
}

impl WindowParams {
    pub fn from_days(window_days: i64, step_days: i64) -> Self {
        Self {
            length: window_days * DAY_SECONDS,
            step: step_days * DAY_SECONDS,
        }
    }

    pub fn validate(&self) -> Result<(), CorpusError> {
        if self.length <= 0 || self.step <= 0 || self.step > self.length {
            return Err(CorpusError::InvalidWindowParams {
                length: self.length,
                step: self.step,
            });
        }
        Ok(())
    }
}

impl Default for WindowParams {
    /// 30-day windows slid 14 days at a time.
    fn default() -> Self {
        Self::from_days(30, 14)
    }
}

/// One concrete window: the half-open interval `[start, start + length)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct WindowSpec {
    pub start: i64,
    pub length: i64,
    pub step: i64,
}

impl WindowSpec {
    pub fn end(&self) -> i64 {
        self.start + self.length
    }

    pub fn contains(&self, ts: i64) -> bool {
        ts >= self.start && ts < self.end()
    }
}

/// The deduplicated votes of one window, with the user and article sets that
/// are exactly the endpoints of those votes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WindowSlice {
    pub window_index: usize,
    pub spec: WindowSpec,
    pub votes: BTreeSet<(String, String)>,
    pub users: BTreeSet<String>,
    pub articles: BTreeSet<String>,
}

impl WindowSlice {
    pub fn is_empty(&self) -> bool {
        self.votes.is_empty()
    }
}

/// A skipped input row, with its location and reason.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseWarning {
    pub file: PathBuf,
    pub line: usize,
    pub message: String,
}

impl fmt::Display for ParseWarning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}: {}", self.file.display(), self.line, self.message)
    }
}

/// A loaded vote/article corpus. Malformed rows are skipped and surfaced as
/// warnings; votes referencing articles absent from the metadata file are
/// kept (they still carry co-preference signal) and counted.
#[derive(Debug, Default)]
pub struct Corpus {
    pub votes: Vec<VoteRecord>,
    pub articles: BTreeMap<String, ArticleMeta>,
    pub warnings: Vec<ParseWarning>,
    pub unknown_article_votes: usize,
}

impl Corpus {
    /// Earliest and latest vote timestamps, or `None` for an empty log.
    pub fn vote_span(&self) -> Option<(i64, i64)> {
        let first = self.votes.iter().map(|v| v.timestamp).min()?;
        let last = self.votes.iter().map(|v| v.timestamp).max()?;
        Some((first, last))
    }

    pub fn filter_category(&self, category: &str) -> Corpus {
        let (votes, articles) = filter_category(&self.votes, &self.articles, category);
        let unknown = votes
            .iter()
            .filter(|v| !articles.contains_key(&v.article_id))
            .count();
        Corpus {
            votes,
            articles,
            warnings: self.warnings.clone(),
            unknown_article_votes: unknown,
        }
    }
}

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("invalid window parameters: length {length}s, step {step}s (need 0 < step <= length)")]
    InvalidWindowParams { length: i64, step: i64 },
    #[error("inverted window range: first timestamp {first} exceeds last {last}")]
    InvertedRange { first: i64, last: i64 },
}

/// Loads the votes log and article metadata.
///
/// Votes file: UTF-8 text, one vote per line, tab-separated
/// `user_id<TAB>article_id<TAB>timestamp`; lines starting with `#` and blank
/// lines are ignored. Articles file: UTF-8 JSON-lines with keys
/// `article_id`, `posted_at`, `category`, `url`, `title`, `summary`.
pub fn load_corpus(votes_path: &Path, articles_path: &Path) -> Result<Corpus, CorpusError> {
    let mut warnings = Vec::new();

    let articles = load_articles(articles_path, &mut warnings)?;
    let votes = load_votes(votes_path, &mut warnings)?;
    let unknown_article_votes = votes
        .iter()
        .filter(|v| !articles.contains_key(&v.article_id))
        .count();

    Ok(Corpus {
        votes,
        articles,
        warnings,
        unknown_article_votes,
    })
}

fn open_lines(path: &Path) -> Result<BufReader<File>, CorpusError> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|source| CorpusError::Io {
            path: path.to_path_buf(),
            source,
        })
}

fn load_votes(path: &Path, warnings: &mut Vec<ParseWarning>) -> Result<Vec<VoteRecord>, CorpusError> {
    let reader = open_lines(path)?;
    let mut votes = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line.map_err(|source| CorpusError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let line = line.trim_end_matches('\r');
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        match parse_vote_line(line) {
            Ok(vote) => votes.push(vote),
            Err(message) => warnings.push(ParseWarning {
                file: path.to_path_buf(),
                line: idx + 1,
                message,
            }),
        }
    }
    Ok(votes)
}

fn parse_vote_line(line: &str) -> Result<VoteRecord, String> {
    let mut fields = line.split('\t');
    let user_id = fields.next().unwrap_or("");
    let article_id = fields.next().ok_or("missing article_id field")?;
    let ts_text = fields.next().ok_or("missing timestamp field")?;
    if fields.next().is_some() {
        return Err("too many fields (expected 3)".into());
    }
    if user_id.is_empty() || article_id.is_empty() {
        return Err("empty user_id or article_id".into());
    }
    let timestamp: i64 = ts_text
        .parse()
        .map_err(|_| format!("unparseable timestamp {ts_text:?}"))?;
    if timestamp < 0 {
        return Err(format!("negative timestamp {timestamp}"));
    }
    Ok(VoteRecord {
        user_id: user_id.to_string(),
        article_id: article_id.to_string(),
        timestamp,
    })
}

fn load_articles(
    path: &Path,
    warnings: &mut Vec<ParseWarning>,
) -> Result<BTreeMap<String, ArticleMeta>, CorpusError> {
    let reader = open_lines(path)?;
    let mut articles = BTreeMap::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line.map_err(|source| CorpusError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let meta: ArticleMeta = match serde_json::from_str(&line) {
            Ok(meta) => meta,
            Err(e) => {
                warnings.push(ParseWarning {
                    file: path.to_path_buf(),
                    line: idx + 1,
                    message: format!("malformed article record: {e}"),
                });
                continue;
            }
        };
        if articles.contains_key(&meta.article_id) {
            warnings.push(ParseWarning {
                file: path.to_path_buf(),
                line: idx + 1,
                message: format!("duplicate article_id {:?} (keeping first)", meta.article_id),
            });
            continue;
        }
        articles.insert(meta.article_id.clone(), meta);
    }
    Ok(articles)
}

/// Keeps only votes whose article's category equals `category` exactly
/// (case-sensitive), and the matching articles. Votes to articles without
/// metadata have no category and are dropped.
pub fn filter_category(
    votes: &[VoteRecord],
    articles: &BTreeMap<String, ArticleMeta>,
    category: &str,
) -> (Vec<VoteRecord>, BTreeMap<String, ArticleMeta>) {
    let kept_articles: BTreeMap<String, ArticleMeta> = articles
        .iter()
        .filter(|(_, meta)| meta.category == category)
        .map(|(id, meta)| (id.clone(), meta.clone()))
        .collect();
    let kept_votes = votes
        .iter()
        .filter(|v| kept_articles.contains_key(&v.article_id))
        .cloned()
        .collect();
    (kept_votes, kept_articles)
}

/// Builds the window sequence anchored at `first_ts`.
///
/// Starts are `first_ts, first_ts + step, ...`; the count is
/// `floor(max(0, last_ts - first_ts - 1) / step) + 1`, i.e. a window is
/// emitted for every start strictly before `last_ts`, and a degenerate span
/// (`first_ts == last_ts`) still yields one window.
pub fn make_windows(
    first_ts: i64,
    last_ts: i64,
    params: WindowParams,
) -> Result<Vec<WindowSpec>, CorpusError> {
    params.validate()?;
    if first_ts > last_ts {
        return Err(CorpusError::InvertedRange {
            first: first_ts,
            last: last_ts,
        });
    }
    let span_minus_one = (last_ts - first_ts - 1).max(0);
    let count = (span_minus_one / params.step) as usize + 1;
    Ok((0..count)
        .map(|k| WindowSpec {
            start: first_ts + k as i64 * params.step,
            length: params.length,
            step: params.step,
        })
        .collect())
}

/// Collects the deduplicated `(user, article)` pairs whose timestamps fall
/// in the window's half-open interval.
pub fn slice_window(votes: &[VoteRecord], window_index: usize, spec: WindowSpec) -> WindowSlice {
    let mut pairs = BTreeSet::new();
    let mut users = BTreeSet::new();
    let mut articles = BTreeSet::new();
    for vote in votes {
        if spec.contains(vote.timestamp)
            && pairs.insert((vote.user_id.clone(), vote.article_id.clone()))
        {
            users.insert(vote.user_id.clone());
            articles.insert(vote.article_id.clone());
        }
    }
    WindowSlice {
        window_index,
        spec,
        votes: pairs,
        users,
        articles,
    }
}

pub fn slice_all(votes: &[VoteRecord], windows: &[WindowSpec]) -> Vec<WindowSlice> {
    windows
        .iter()
        .enumerate()
        .map(|(idx, spec)| slice_window(votes, idx, *spec))
        .collect()
}
