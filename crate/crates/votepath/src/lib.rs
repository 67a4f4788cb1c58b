//! Detect evolving vote-based user communities in social-news event logs.
//!
//! `votepath` ingests a log of votes (user → article preference signals),
//! slices it into overlapping time windows, projects each window's bipartite
//! vote graph onto a Jaccard-weighted user similarity graph, and finds
//! communities by greedy modularity maximization. Communities in consecutive
//! windows are linked by membership transition probabilities into an
//! evolution graph whose maximal chains are *evolution paths*. Each community
//! and path is then profiled by its most over-represented articles, deviating
//! terms, and publication domains, and every path's source concentration is
//! scored against a vote-weighted random baseline (relative recurrence).
//!
//! The crate ships a synthetic benchmark (a planted 2-D opinion space and a
//! planted temporal corpus) so the whole pipeline can be validated without
//! any proprietary data.
//!
//! Start with the runnable examples (`cargo run --example <name>`):
//!
//! - `window_slicing` — load a corpus and slice overlapping windows
//! - `jaccard_projection` — bipartite vote graph → weighted user graph
//! - `detect_communities` — greedy modularity maximization vs. brute force
//! - `evolution_paths` — transition matrices, events, paths, retention
//! - `content_profiles` — representative articles, terms, and domains
//! - `entropy_recurrence` — source entropy and relative recurrence
//! - `opinion_benchmark` — planted 2-D benchmark, detection vs. k-means
//! - `error_sweep` — error-vs-σ curve over the opinion benchmark
//! - `end_to_end` — planted temporal corpus through the full pipeline
//!
//! The same functionality is exposed as a thin CLI (`votepath <subcommand>`)
//! with file-based handoff between stages; see the README.

pub mod community;
pub mod content;
pub mod corpus;
pub mod evaluation;
pub mod evolution;
pub mod graph;
pub mod pipeline;
pub mod simulation;

mod jsonl;

pub use community::Partition;
pub use corpus::{ArticleMeta, Corpus, VoteRecord, WindowParams, WindowSlice, WindowSpec};
pub use evolution::{EvolutionGraph, EvolutionPath};
pub use graph::{BipartiteVoteGraph, UserGraph};
pub use pipeline::RunConfig;
