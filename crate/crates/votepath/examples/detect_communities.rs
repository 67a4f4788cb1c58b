//! Greedy weighted-modularity community detection, cross-checked against
//! the exhaustive brute-force optimum on a planted two-clique graph.
//!
//! Run with: `cargo run --example detect_communities`

use votepath::community::{brute_force_partition, detect_communities, modularity};
use votepath::graph::UserGraph;

fn main() {
    // two unit-weight 4-cliques joined by a single bridge edge
    let users: Vec<String> = (0..8).map(|i| format!("user{i}")).collect();
    let mut edges = Vec::new();
    for base in [0usize, 4] {
        for i in base..base + 4 {
            for j in i + 1..base + 4 {
                edges.push((i, j, 1.0));
            }
        }
    }
    edges.push((3, 4, 1.0));
    let graph = UserGraph::new(users, edges);
    println!(
        "planted graph: {} vertices, {} edges, W = {}",
        graph.vertex_count(),
        graph.edges().len(),
        graph.total_weight()
    );

    let detected = detect_communities(&graph);
    println!("\ngreedy agglomeration found {} communities:", detected.community_count());
    for c in 0..detected.community_count() {
        let members: Vec<&str> = detected.member_ids(c).collect();
        println!("  community {c}: {members:?}");
    }
    println!("modularity Q = {:.6}", detected.modularity_q().expect("weighted graph"));

    // the exhaustive oracle enumerates all 4140 partitions of 8 vertices
    let oracle = brute_force_partition(&graph).expect("small graph");
    println!(
        "\nbrute force over all partitions agrees: Q* = {:.6}, same assignment: {}",
        oracle.modularity_q().expect("weighted graph"),
        oracle.labels() == detected.labels()
    );

    // modularity of some other assignments, for contrast
    let everyone = votepath::community::Partition::from_labels(
        0,
        graph.user_ids().to_vec(),
        &[0; 8],
        None,
    );
    let singletons = votepath::community::Partition::from_labels(
        0,
        graph.user_ids().to_vec(),
        &[0, 1, 2, 3, 4, 5, 6, 7],
        None,
    );
    println!("\nfor contrast:");
    println!("  all-in-one Q   = {:.6}", modularity(&graph, &everyone).unwrap());
    println!("  singletons Q   = {:.6}", modularity(&graph, &singletons).unwrap());
}
