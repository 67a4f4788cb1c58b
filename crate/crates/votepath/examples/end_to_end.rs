//! The whole pipeline on a planted temporal corpus: generate, detect,
//! link, profile, evaluate, and check the results against the plant.
//!
//! Run with: `cargo run --example end_to_end`

use votepath::evolution::retention;
use votepath::pipeline::{run_pipeline, RunConfig};
use votepath::simulation::{generate_temporal_plant, TemporalPlantConfig};

fn main() {
    let dir = tempfile::tempdir().expect("tempdir");
    let plant_cfg = TemporalPlantConfig::new(6, vec![100, 100, 100], 0.1, 42);
    let plant = generate_temporal_plant(&plant_cfg).expect("generate");
    let votes_path = dir.path().join("votes.tsv");
    let articles_path = dir.path().join("articles.jsonl");
    plant
        .write_files(&votes_path, &articles_path, &dir.path().join("truth.jsonl"))
        .expect("write");
    println!(
        "planted corpus: {} votes, {} articles, 3 communities of 100 users, churn 0.1",
        plant.votes.len(),
        plant.articles.len()
    );

    let mut cfg = RunConfig::new(votes_path, articles_path, dir.path().join("out"));
    cfg.window_days = plant_cfg.window_days;
    cfg.step_days = plant_cfg.window_days; // align windows with plant epochs
    cfg.category = Some("politics".into());
    cfg.seed = 7;
    let run = run_pipeline(&cfg).expect("pipeline");

    println!(
        "\npipeline: {} windows → {} communities ≥ min_size → {} paths",
        run.windows.len(),
        run.evolution.node_count(),
        run.paths.len()
    );

    for path in &run.paths {
        let profile = run
            .path_profiles
            .iter()
            .find(|p| p.path_id == path.id)
            .expect("profile per path");
        let evaluation = run.evaluation.iter().find(|r| r.path_id == path.id);
        println!("\npath {} (length {}, mean size {:.0}):", path.id, path.len(), path.mean_size());
        println!("  retention Δ=1: {:.3}", retention(path, 1).expect("length > 1"));
        let domains: Vec<String> = profile
            .domains
            .iter()
            .take(3)
            .map(|d| format!("{} ×{}", d.domain, d.count))
            .collect();
        println!("  top domains: {}", domains.join(", "));
        let terms: Vec<&str> = profile.top_terms.iter().take(4).map(|t| t.term.as_str()).collect();
        println!("  top terms: {terms:?}");
        if let Some(row) = evaluation {
            println!(
                "  entropy {:.3} bits vs baseline {:.3} → relative recurrence {:.2}",
                row.entropy_bits, row.baseline_mean_entropy, row.relative_recurrence
            );
        }
    }

    println!("\noutput files:");
    for file in &run.output_files {
        println!("  {}", file.display());
    }
}
