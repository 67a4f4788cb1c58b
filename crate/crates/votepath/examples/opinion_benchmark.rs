//! One planted opinion-space generation: vote-graph community detection
//! against the k-means oracle on true positions.
//!
//! Run with: `cargo run --example opinion_benchmark`

use votepath::simulation::{
    detect_opinion_labels, generate, kmeans_oracle, pair_error, SimConfig,
};

fn main() {
    for sigma in [0.2, 0.6, 1.0] {
        let mut cfg = SimConfig::with_sigma(sigma);
        cfg.user_count = 200;
        cfg.seed = 2024;
        let dataset = generate(&cfg).expect("valid config");

        let detected = detect_opinion_labels(&dataset);
        let pipeline_error = pair_error(&detected, &dataset.truth_labels).expect("same users");

        let kmeans = kmeans_oracle(&dataset, 4, 10, 55).expect("enough users");
        let kmeans_error = pair_error(&kmeans, &dataset.truth_labels).expect("same users");

        let communities = detected.iter().collect::<std::collections::BTreeSet<_>>().len();
        println!(
            "sigma {sigma:.1}: {} articles, {} votes → {} communities",
            dataset.articles.len(),
            dataset.votes.len(),
            communities
        );
        println!("  vote-graph pipeline pair error: {pipeline_error:.4}");
        println!("  k-means oracle pair error:      {kmeans_error:.4}");
    }
    println!("\n(the k-means oracle sees the true 2-D positions, so it bounds the");
    println!(" error the vote graph can hope for; both fail once clusters overlap)");
}
