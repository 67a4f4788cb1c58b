//! Link communities across windows, tag evolution events, extract paths,
//! and measure user retention.
//!
//! Builds three windows by hand: a large community absorbs a small one
//! (merge) while a short-lived community is born and dies.
//!
//! Run with: `cargo run --example evolution_paths`

use votepath::community::Partition;
use votepath::evolution::{
    extract_paths, link_windows, retention, transition_matrix, write_dot,
};

fn partition(window: usize, communities: &[Vec<String>]) -> Partition {
    let mut pairs: Vec<(String, usize)> = Vec::new();
    for (c, members) in communities.iter().enumerate() {
        for m in members {
            pairs.push((m.clone(), c));
        }
    }
    pairs.sort();
    let users: Vec<String> = pairs.iter().map(|(u, _)| u.clone()).collect();
    let labels: Vec<usize> = pairs.iter().map(|(_, c)| *c).collect();
    Partition::from_labels(window, users, &labels, None)
}

fn names(prefix: &str, n: usize) -> Vec<String> {
    (0..n).map(|i| format!("{prefix}{i:03}")).collect()
}

fn main() {
    let big = names("big", 40);
    let small = names("small", 15);
    let flash = names("flash", 12);
    let merged: Vec<String> = big.iter().chain(small.iter()).cloned().collect();

    let partitions = vec![
        partition(0, &[big.clone(), small.clone()]),
        partition(1, &[merged.clone(), flash.clone()]),
        partition(2, std::slice::from_ref(&merged)),
    ];

    let matrices: Vec<_> = partitions
        .windows(2)
        .map(|pair| transition_matrix(&pair[0], &pair[1]).expect("consecutive"))
        .collect();
    println!("transition rows (window 0 → 1):");
    for row in &matrices[0].rows {
        let flows: Vec<String> = row
            .overlaps
            .keys()
            .map(|&t| format!("→c{t} {:.2}", row.probability(t)))
            .collect();
        println!(
            "  community {} ({} users): {} (attrition {:.2})",
            row.source,
            row.source_size,
            flows.join(", "),
            row.attrition()
        );
    }

    let graph = link_windows(&matrices, 10, 0.1).expect("consecutive matrices");
    println!("\nevolution graph: {} nodes, {} links", graph.node_count(), graph.links().len());
    for node in graph.nodes() {
        println!(
            "  window {} community {} (size {:>2}): {:?}",
            node.id.window, node.id.community, node.size, node.events
        );
    }

    let paths = extract_paths(&graph, &partitions).expect("partitions cover nodes");
    println!("\n{} paths:", paths.len());
    for path in &paths {
        let steps: Vec<String> = path
            .nodes
            .iter()
            .map(|n| format!("w{}c{}", n.window, n.community))
            .collect();
        println!("  path {}: {} (length {})", path.id, steps.join(" → "), path.len());
        for delta in 0..path.len() {
            print!("    retention Δ={delta}: {:.3}  ", retention(path, delta).unwrap());
        }
        println!();
    }

    println!("\nDOT snippet (pipe the full pipeline's evolution.dot into graphviz):");
    let mut dot = Vec::new();
    write_dot(&mut dot, &graph, &paths, "hand-built example").expect("in-memory write");
    let text = String::from_utf8(dot).expect("utf8");
    for line in text.lines().take(12) {
        println!("  {line}");
    }
    println!("  ...");
}
