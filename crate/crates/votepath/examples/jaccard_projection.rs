//! Project a bipartite vote graph onto a Jaccard-weighted user graph.
//!
//! Run with: `cargo run --example jaccard_projection`

use votepath::corpus::{slice_window, VoteRecord, WindowSpec};
use votepath::graph::{build_bipartite, graph_summary, project_jaccard};

fn main() {
    // three users with overlapping tastes and one loner
    let votes: Vec<VoteRecord> = [
        ("ada", "a1"),
        ("ada", "a2"),
        ("ada", "a3"),
        ("ben", "a2"),
        ("ben", "a3"),
        ("ben", "a4"),
        ("cyn", "a1"),
        ("cyn", "a2"),
        ("dee", "a9"),
    ]
    .into_iter()
    .map(|(user, article)| VoteRecord {
        user_id: user.into(),
        article_id: article.into(),
        timestamp: 100,
    })
    .collect();

    let slice = slice_window(
        &votes,
        0,
        WindowSpec {
            start: 0,
            length: 1_000,
            step: 1_000,
        },
    );
    let bipartite = build_bipartite(&slice);
    println!(
        "bipartite graph: {} users, {} articles, {} vote edges",
        bipartite.user_count(),
        bipartite.article_count(),
        bipartite.edge_count()
    );

    let graph = project_jaccard(&bipartite, 1);
    println!("\nweighted user graph (w = |X ∩ Y| / |X ∪ Y|):");
    let mut edge_list = Vec::new();
    graph.write_edge_list(&mut edge_list).expect("in-memory write");
    print!("{}", String::from_utf8(edge_list).expect("utf8"));
    println!("(dee shares no article, so she stays an isolated vertex)");

    let summary = graph_summary(&graph);
    println!(
        "\nsummary: {} vertices, {} edges, total weight W = {:.4}",
        summary.vertex_count, summary.edge_count, summary.total_weight
    );
    println!("strength quantiles (min/q25/median/q75/max): {:?}", summary.strength_quantiles);
}
