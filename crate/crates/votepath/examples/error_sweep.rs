//! A miniature error-vs-σ sweep (the CLI `sweep` subcommand runs the
//! full-size version with 500 users and 10 runs per σ).
//!
//! Run with: `cargo run --example error_sweep`

use votepath::simulation::{sweep_std, write_sweep_csv, SimConfig};

fn main() {
    let mut base = SimConfig::with_sigma(0.1);
    base.user_count = 120;
    base.seed = 31;
    let sigmas = [0.1, 0.5, 1.0];
    let rows = sweep_std(&base, &sigmas, 3).expect("sweep runs");

    println!("{:<8} {:<10} {:>12} {:>10}", "sigma", "method", "mean_error", "2·std");
    for row in &rows {
        println!(
            "{:<8} {:<10} {:>12.4} {:>10.4}",
            row.sigma, row.method, row.mean_error, row.two_std
        );
    }

    println!("\nCSV form (what `votepath sweep --out sweep.csv` writes):");
    let mut csv = Vec::new();
    write_sweep_csv(&mut csv, &rows).expect("in-memory write");
    print!("{}", String::from_utf8(csv).expect("utf8"));
}
