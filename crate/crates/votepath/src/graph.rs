//! Per-window bipartite vote graph and its Jaccard-weighted user projection.
//!
//! The edge weight between two users is the Jaccard index of their voted
//! article sets, `|X ∩ Y| / |X ∪ Y|`. Pair enumeration goes through
//! per-article voter lists, never over all user pairs, so the cost is
//! proportional to the sum of squared article degrees rather than the
//! square of the user count.

use std::collections::HashMap;
use std::io::{self, Write};

use crate::corpus::WindowSlice;

/// Two-sided graph of users and articles, one edge per deduplicated vote.
#[derive(Debug, Clone)]
pub struct BipartiteVoteGraph {
    users: Vec<String>,
    articles: Vec<String>,
    /// Per article (by index), the sorted indices of its voters.
    article_voters: Vec<Vec<u32>>,
    /// Per user (by index), the number of articles it voted for.
    user_degrees: Vec<u32>,
    edge_count: usize,
}

impl BipartiteVoteGraph {
    pub fn user_count(&self) -> usize {
        self.users.len()
    }

    pub fn article_count(&self) -> usize {
        self.articles.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    pub fn users(&self) -> &[String] {
        &self.users
    }

    pub fn articles(&self) -> &[String] {
        &self.articles
    }

    pub fn voters(&self, article_index: usize) -> &[u32] {
        &self.article_voters[article_index]
    }

    pub fn user_degree(&self, user_index: usize) -> u32 {
        self.user_degrees[user_index]
    }
}

/// Builds the bipartite vote graph of a window slice. Vertex sets equal the
/// slice's users and articles; both are free of isolated vertices because a
/// slice only records vote endpoints.
pub fn build_bipartite(slice: &WindowSlice) -> BipartiteVoteGraph {
    let users: Vec<String> = slice.users.iter().cloned().collect();
    let articles: Vec<String> = slice.articles.iter().cloned().collect();
    let user_index: HashMap<&str, u32> = users
        .iter()
        .enumerate()
        .map(|(i, u)| (u.as_str(), i as u32))
        .collect();
    let article_index: HashMap<&str, u32> = articles
        .iter()
        .enumerate()
        .map(|(i, a)| (a.as_str(), i as u32))
        .collect();

    let mut article_voters = vec![Vec::new(); articles.len()];
    let mut user_degrees = vec![0u32; users.len()];
    for (user, article) in &slice.votes {
        let u = user_index[user.as_str()];
        let a = article_index[article.as_str()];
        article_voters[a as usize].push(u);
        user_degrees[u as usize] += 1;
    }
    for voters in &mut article_voters {
        voters.sort_unstable();
    }

    BipartiteVoteGraph {
        users,
        articles,
        article_voters,
        user_degrees,
        edge_count: slice.votes.len(),
    }
}

/// One undirected weighted edge, stored with `a < b`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeightedEdge {
    pub a: usize,
    pub b: usize,
    pub weight: f64,
}

/// Weighted undirected user similarity graph.
///
/// Vertices are users in sorted id order; users sharing no article stay as
/// isolated vertices so total user counts are preserved downstream.
/// Strengths and the total weight are accumulated from the canonical edge
/// order, so recomputing them from the edge list reproduces the stored
/// values exactly.
#[derive(Debug, Clone)]
pub struct UserGraph {
    users: Vec<String>,
    edges: Vec<WeightedEdge>,
    strengths: Vec<f64>,
    total_weight: f64,
}

impl UserGraph {
    /// Assembles a graph from raw `(a, b, weight)` edges over `users`.
    ///
    /// Panics on self-loops, non-positive weights, out-of-range vertex
    /// indices, or duplicate pairs — those are construction bugs, not data
    /// conditions.
    pub fn new(users: Vec<String>, raw_edges: Vec<(usize, usize, f64)>) -> Self {
        let mut edges: Vec<WeightedEdge> = raw_edges
            .into_iter()
            .map(|(a, b, weight)| {
                assert!(a != b, "self-loop on vertex {a}");
                assert!(weight > 0.0, "non-positive weight {weight} on ({a}, {b})");
                assert!(a < users.len() && b < users.len(), "edge out of range");
                let (a, b) = if a < b { (a, b) } else { (b, a) };
                WeightedEdge { a, b, weight }
            })
            .collect();
        edges.sort_by_key(|e| (e.a, e.b));
        edges.windows(2).for_each(|w| {
            assert!(
                (w[0].a, w[0].b) != (w[1].a, w[1].b),
                "duplicate edge ({}, {})",
                w[0].a,
                w[0].b
            )
        });

        let mut strengths = vec![0.0; users.len()];
        let mut total_weight = 0.0;
        for e in &edges {
            strengths[e.a] += e.weight;
            strengths[e.b] += e.weight;
            total_weight += e.weight;
        }
        Self {
            users,
            edges,
            strengths,
            total_weight,
        }
    }

    pub fn vertex_count(&self) -> usize {
        self.users.len()
    }

    pub fn user_ids(&self) -> &[String] {
        &self.users
    }

    pub fn user_id(&self, index: usize) -> &str {
        &self.users[index]
    }

    pub fn index_of(&self, user_id: &str) -> Option<usize> {
        self.users.binary_search_by(|u| u.as_str().cmp(user_id)).ok()
    }

    pub fn edges(&self) -> &[WeightedEdge] {
        &self.edges
    }

    pub fn strength(&self, index: usize) -> f64 {
        self.strengths[index]
    }

    pub fn strengths(&self) -> &[f64] {
        &self.strengths
    }

    /// Sum of all edge weights (W).
    pub fn total_weight(&self) -> f64 {
        self.total_weight
    }

    /// Neighbor lists with weights, indexed by vertex.
    pub fn adjacency(&self) -> Vec<Vec<(usize, f64)>> {
        let mut adj = vec![Vec::new(); self.users.len()];
        for e in &self.edges {
            adj[e.a].push((e.b, e.weight));
            adj[e.b].push((e.a, e.weight));
        }
        adj
    }

    /// Debug dump: one `u v w` line per edge, user ids space-separated.
    pub fn write_edge_list<W: Write>(&self, out: &mut W) -> io::Result<()> {
        for e in &self.edges {
            writeln!(out, "{} {} {}", self.users[e.a], self.users[e.b], e.weight)?;
        }
        Ok(())
    }
}

/// Projects the bipartite graph onto users.
///
/// For every user pair sharing at least `min_shared` articles (clamped to a
/// minimum of 1), adds an edge weighted by the Jaccard index of the two
/// voted-article sets. Disjoint pairs get no edge.
pub fn project_jaccard(bipartite: &BipartiteVoteGraph, min_shared: usize) -> UserGraph {
    let min_shared = min_shared.max(1) as u32;
    let mut shared: HashMap<(u32, u32), u32> = HashMap::new();
    for voters in &bipartite.article_voters {
        for (i, &u) in voters.iter().enumerate() {
            for &v in &voters[i + 1..] {
                *shared.entry((u, v)).or_insert(0) += 1;
            }
        }
    }

    let edges = shared
        .into_iter()
        .filter(|&(_, count)| count >= min_shared)
        .map(|((u, v), count)| {
            let union =
                bipartite.user_degrees[u as usize] + bipartite.user_degrees[v as usize] - count;
            (u as usize, v as usize, f64::from(count) / f64::from(union))
        })
        .collect();
    UserGraph::new(bipartite.users.clone(), edges)
}

/// Headline statistics of a user graph.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct GraphSummary {
    pub vertex_count: usize,
    pub edge_count: usize,
    pub total_weight: f64,
    /// Strength distribution at quantiles 0, 0.25, 0.5, 0.75, 1 (zeros for
    /// an empty graph).
    pub strength_quantiles: [f64; 5],
}

pub fn graph_summary(g: &UserGraph) -> GraphSummary {
    let mut sorted = g.strengths.clone();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("strengths are finite"));
    let quantile = |q: f64| -> f64 {
        if sorted.is_empty() {
            return 0.0;
        }
        let pos = q * (sorted.len() - 1) as f64;
        sorted[pos.round() as usize]
    };
    GraphSummary {
        vertex_count: g.vertex_count(),
        edge_count: g.edges.len(),
        total_weight: g.total_weight,
        strength_quantiles: [
            quantile(0.0),
            quantile(0.25),
            quantile(0.5),
            quantile(0.75),
            quantile(1.0),
        ],
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{slice_window, VoteRecord, WindowSpec};
    use num_rational::Ratio;
    use proptest::prelude::*;
    use std::collections::{BTreeMap, BTreeSet};

    fn slice_from(pairs: &[(&str, &str)]) -> WindowSlice {
        let votes: Vec<VoteRecord> = pairs
            .iter()
            .map(|(u, a)| VoteRecord {
                user_id: (*u).into(),
                article_id: (*a).into(),
                timestamp: 0,
            })
            .collect();
        slice_window(
            &votes,
            0,
            WindowSpec {
                start: 0,
                length: 1,
                step: 1,
            },
        )
    }

    /// All-pairs Jaccard from the raw voted-article sets; the projection
    /// must match it exactly.
    fn brute_force_jaccard(pairs: &[(&str, &str)]) -> BTreeMap<(String, String), f64> {
        let mut sets: BTreeMap<&str, BTreeSet<&str>> = BTreeMap::new();
        for (u, a) in pairs {
            sets.entry(u).or_default().insert(a);
        }
        let users: Vec<&str> = sets.keys().copied().collect();
        let mut weights = BTreeMap::new();
        for i in 0..users.len() {
            for j in i + 1..users.len() {
                let x = &sets[users[i]];
                let y = &sets[users[j]];
                let inter = x.intersection(y).count();
                if inter > 0 {
                    let union = x.union(y).count();
                    weights.insert(
                        (users[i].to_string(), users[j].to_string()),
                        inter as f64 / union as f64,
                    );
                }
            }
        }
        weights
    }

    fn projected(pairs: &[(&str, &str)]) -> (UserGraph, BTreeMap<(String, String), f64>) {
        let g = project_jaccard(&build_bipartite(&slice_from(pairs)), 1);
        let mut weights = BTreeMap::new();
        for e in g.edges() {
            weights.insert(
                (g.user_id(e.a).to_string(), g.user_id(e.b).to_string()),
                e.weight,
            );
        }
        (g, weights)
    }

    #[test]
    fn bipartite_counts_votes_and_vertices() {
        let bip = build_bipartite(&slice_from(&[("u1", "a"), ("u2", "a")]));
        assert_eq!(bip.user_count(), 2);
        assert_eq!(bip.article_count(), 1);
        assert_eq!(bip.edge_count(), 2);
    }

    #[test]
    fn bipartite_empty_slice() {
        let bip = build_bipartite(&slice_from(&[]));
        assert_eq!(bip.user_count(), 0);
        assert_eq!(bip.article_count(), 0);
        assert_eq!(bip.edge_count(), 0);
    }

    #[test]
    fn bipartite_user_degree() {
        let bip = build_bipartite(&slice_from(&[("u", "a"), ("u", "b"), ("u", "c")]));
        assert_eq!(bip.user_degree(0), 3);
    }

    #[test]
    fn jaccard_identical_sets_weight_one() {
        let (_, w) = projected(&[("x", "a"), ("x", "b"), ("y", "a"), ("y", "b")]);
        assert_eq!(w[&("x".to_string(), "y".to_string())], 1.0);
    }

    #[test]
    fn jaccard_disjoint_sets_no_edge() {
        let (g, w) = projected(&[("x", "a"), ("x", "b"), ("y", "c")]);
        assert!(w.is_empty());
        assert_eq!(g.vertex_count(), 2); // isolated vertices kept
    }

    #[test]
    fn jaccard_partial_overlap() {
        let (_, w) = projected(&[
            ("x", "a"),
            ("x", "b"),
            ("x", "c"),
            ("y", "b"),
            ("y", "c"),
            ("y", "d"),
        ]);
        assert_eq!(w[&("x".to_string(), "y".to_string())], 0.5);
    }

    #[test]
    fn min_shared_prunes_weak_pairs() {
        let pairs = [
            ("x", "a"),
            ("x", "b"),
            ("y", "a"),
            ("y", "c"),
            ("z", "a"),
            ("z", "b"),
        ];
        let bip = build_bipartite(&slice_from(&pairs));
        assert_eq!(project_jaccard(&bip, 1).edges().len(), 3);
        assert_eq!(project_jaccard(&bip, 2).edges().len(), 1); // only (x, z)
    }

    #[test]
    fn summary_single_edge() {
        let g = UserGraph::new(vec!["a".into(), "b".into()], vec![(0, 1, 0.5)]);
        let s = graph_summary(&g);
        assert_eq!(s.total_weight, 0.5);
        assert_eq!(g.strength(0), 0.5);
        assert_eq!(g.strength(1), 0.5);
    }

    #[test]
    fn summary_empty_graph() {
        let g = UserGraph::new(Vec::new(), Vec::new());
        let s = graph_summary(&g);
        assert_eq!(s.vertex_count, 0);
        assert_eq!(s.total_weight, 0.0);
        assert_eq!(s.strength_quantiles, [0.0; 5]);
    }

    #[test]
    fn summary_unit_triangle() {
        let users = vec!["a".into(), "b".into(), "c".into()];
        let g = UserGraph::new(users, vec![(0, 1, 1.0), (1, 2, 1.0), (0, 2, 1.0)]);
        let s = graph_summary(&g);
        assert_eq!(s.total_weight, 3.0);
        assert!(g.strengths().iter().all(|&s| s == 2.0));
    }

    #[test]
    fn edge_list_dump_is_sorted() {
        let g = UserGraph::new(
            vec!["a".into(), "b".into(), "c".into()],
            vec![(2, 0, 0.25), (0, 1, 0.5)],
        );
        let mut buf = Vec::new();
        g.write_edge_list(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "a b 0.5\na c 0.25\n");
    }

    /// Strategy: up to 20 users voting over a small article universe.
    fn vote_pairs() -> impl Strategy<Value = Vec<(u8, u8)>> {
        proptest::collection::vec((0u8..20, 0u8..12), 0..120)
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        /// Projection matches the all-pairs brute force exactly, and weights
        /// stay in (0, 1].
        #[test]
        fn projection_matches_brute_force(pairs in vote_pairs()) {
            let named: Vec<(String, String)> = pairs
                .iter()
                .map(|(u, a)| (format!("u{u:02}"), format!("a{a:02}")))
                .collect();
            let borrowed: Vec<(&str, &str)> =
                named.iter().map(|(u, a)| (u.as_str(), a.as_str())).collect();
            let (g, got) = projected(&borrowed);
            let want = brute_force_jaccard(&borrowed);
            prop_assert_eq!(&got, &want);
            for e in g.edges() {
                prop_assert!(e.weight > 0.0 && e.weight <= 1.0);
            }
        }

        /// Strength/total-weight bookkeeping agrees with an exact rational
        /// recomputation: sum of strengths equals twice the total weight.
        #[test]
        fn strength_sum_is_twice_total_weight(pairs in vote_pairs()) {
            let named: Vec<(String, String)> = pairs
                .iter()
                .map(|(u, a)| (format!("u{u:02}"), format!("a{a:02}")))
                .collect();
            let borrowed: Vec<(&str, &str)> =
                named.iter().map(|(u, a)| (u.as_str(), a.as_str())).collect();
            let bip = build_bipartite(&slice_from(&borrowed));
            let g = project_jaccard(&bip, 1);

            // exact route: rationals from the integer intersection/union pairs
            let mut rational_total = Ratio::new(0u128, 1u128);
            for e in g.edges() {
                let (u, v) = (e.a, e.b);
                let mut inter = 0u128;
                for article in 0..bip.article_count() {
                    let vs = bip.voters(article);
                    if vs.binary_search(&(u as u32)).is_ok() && vs.binary_search(&(v as u32)).is_ok() {
                        inter += 1;
                    }
                }
                let union =
                    u128::from(bip.user_degree(u)) + u128::from(bip.user_degree(v)) - inter;
                rational_total += Ratio::new(inter, union);
            }
            let expect_2w = rational_total * Ratio::new(2u128, 1u128);
            let expect =
                *expect_2w.numer() as f64 / *expect_2w.denom() as f64;
            let strength_sum: f64 = g.strengths().iter().sum();
            prop_assert!((strength_sum - 2.0 * g.total_weight()).abs() <= 1e-12);
            prop_assert!((2.0 * g.total_weight() - expect).abs() <= 1e-9);
        }

        /// Adding a shared vote never decreases the pair weight when the
        /// union is pinned by pre-padding both users to a fixed degree.
        #[test]
        fn shared_vote_monotonicity(shared_before in 1u8..5) {
            // x and y each vote 6 articles; k of them are common.
            let build = |k: u8| {
                let mut pairs: Vec<(String, String)> = Vec::new();
                for i in 0..6u8 {
                    let a = if i < k { format!("common{i}") } else { format!("x_only{i}") };
                    pairs.push(("x".into(), a));
                    let a = if i < k { format!("common{i}") } else { format!("y_only{i}") };
                    pairs.push(("y".into(), a));
                }
                let borrowed: Vec<(&str, &str)> =
                    pairs.iter().map(|(u, a)| (u.as_str(), a.as_str())).collect();
                let (_, w) = projected(&borrowed);
                w[&("x".to_string(), "y".to_string())]
            };
            prop_assert!(build(shared_before + 1) >= build(shared_before));
        }
    }
}
