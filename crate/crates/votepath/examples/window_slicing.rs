//! Load a vote corpus and slice it into overlapping time windows.
//!
//! Generates a small planted corpus on disk first, so the example is
//! self-contained, then walks the corpus module: loading with warnings,
//! category filtering, window construction, and slicing.
//!
//! Run with: `cargo run --example window_slicing`

use votepath::corpus::{load_corpus, make_windows, slice_all, WindowParams, DAY_SECONDS};
use votepath::simulation::{generate_temporal_plant, TemporalPlantConfig};

fn main() {
    let dir = tempfile::tempdir().expect("tempdir");
    let cfg = TemporalPlantConfig::new(5, vec![25, 25], 0.1, 7);
    let plant = generate_temporal_plant(&cfg).expect("generate");
    let votes_path = dir.path().join("votes.tsv");
    let articles_path = dir.path().join("articles.jsonl");
    plant
        .write_files(&votes_path, &articles_path, &dir.path().join("truth.jsonl"))
        .expect("write");

    let corpus = load_corpus(&votes_path, &articles_path).expect("load");
    println!(
        "loaded {} votes over {} articles ({} parse warnings, {} votes without metadata)",
        corpus.votes.len(),
        corpus.articles.len(),
        corpus.warnings.len(),
        corpus.unknown_article_votes
    );

    let (politics, _) = votepath::corpus::filter_category(&corpus.votes, &corpus.articles, "politics");
    println!("category filter 'politics' keeps {} votes", politics.len());

    let (first, last) = corpus.vote_span().expect("non-empty corpus");
    println!(
        "vote span: day {} to day {}",
        first / DAY_SECONDS,
        last / DAY_SECONDS
    );

    // overlapping 30-day windows slid 14 days at a time
    let params = WindowParams::default();
    let windows = make_windows(first, last, params).expect("windows");
    let slices = slice_all(&corpus.votes, &windows);
    println!("\n{} overlapping windows (30d length, 14d step):", windows.len());
    for slice in &slices {
        println!(
            "  window {:>2} [day {:>3}..{:>3}): {:>5} votes, {:>3} users, {:>3} articles",
            slice.window_index,
            slice.spec.start / DAY_SECONDS,
            slice.spec.end() / DAY_SECONDS,
            slice.votes.len(),
            slice.users.len(),
            slice.articles.len()
        );
    }

    // with step == length the windows partition time instead
    let disjoint = make_windows(first, last, WindowParams::from_days(30, 30)).expect("windows");
    println!("\nnon-overlapping alternative: {} windows at 30d/30d", disjoint.len());
}
