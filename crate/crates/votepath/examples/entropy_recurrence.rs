//! Source entropy, effective number of sources, and relative recurrence
//! against a vote-weighted random baseline.
//!
//! Run with: `cargo run --example entropy_recurrence`

use votepath::corpus::{load_corpus, make_windows, slice_all, WindowParams};
use votepath::evaluation::{entropy_report, random_baseline, relative_recurrence, source_entropy};
use votepath::simulation::{generate_temporal_plant, TemporalPlantConfig};

fn main() {
    println!("entropy of hand-picked domain multisets:");
    for (label, domains) in [
        ("four uniform", vec!["a", "b", "c", "d"]),
        ("single source", vec!["a", "a", "a", "a"]),
        ("half/quarter/quarter", vec!["a", "a", "b", "c"]),
    ] {
        let entropy = source_entropy(&domains).expect("non-empty");
        println!(
            "  {label:<22} {entropy:.3} bits → {:.2} effective sources",
            entropy.exp2()
        );
    }

    // a planted path that loves three domains, against the whole corpus
    let dir = tempfile::tempdir().expect("tempdir");
    let cfg = TemporalPlantConfig::new(6, vec![60, 60, 60], 0.1, 99);
    let plant = generate_temporal_plant(&cfg).expect("generate");
    let votes_path = dir.path().join("votes.tsv");
    let articles_path = dir.path().join("articles.jsonl");
    plant
        .write_files(&votes_path, &articles_path, &dir.path().join("truth.jsonl"))
        .expect("write");
    let corpus = load_corpus(&votes_path, &articles_path).expect("load");
    let (first, last) = corpus.vote_span().expect("votes exist");
    let windows = make_windows(first, last, WindowParams::from_days(30, 30)).expect("windows");
    let slices = slice_all(&corpus.votes, &windows);

    // pretend profiling gave us 60 articles drawn from community 0's
    // planted preferences: count its domains directly
    let mut domain_counts = std::collections::BTreeMap::new();
    for article in corpus.articles.values().filter(|a| a.article_id.contains("c00")) {
        let domain = votepath::content::extract_domain(&article.url);
        *domain_counts.entry(domain).or_insert(0usize) += 1;
    }
    let counts: Vec<(String, usize)> = domain_counts.into_iter().collect();
    let path_report = entropy_report("community-0 articles", &counts).expect("non-empty");
    println!(
        "\npath-like subject: {:.3} bits, {:.2} effective sources over {} domains",
        path_report.entropy_bits,
        path_report.effective_sources,
        path_report.distinct_domains()
    );

    let sample_size = counts.iter().map(|(_, c)| c).sum();
    let baseline = random_baseline(
        "vote-weighted baseline",
        &slices,
        &corpus.articles,
        sample_size,
        100,
        7,
    )
    .expect("votes available");
    let stats = baseline.baseline.as_ref().expect("baseline stats");
    println!(
        "random baseline ({} reps × {} votes): {:.3} ± {:.3} bits, {:.2} effective sources",
        stats.repetitions, stats.sample_size, stats.mean, stats.std_dev, baseline.effective_sources
    );

    println!(
        "\nrelative recurrence = {:.2}  (> 1 means the subject repeats sources beyond chance)",
        relative_recurrence(&path_report, &baseline)
    );
}
