//! Weighted-modularity community detection per window.
//!
//! Modularity of a weighted graph, summed over ordered vertex pairs
//! including the diagonal:
//!
//! ```text
//! Q = (1 / 2W) Σ_ij (W_ij − s_i s_j / 2W) δ(C_i, C_j)
//! ```
//!
//! where `W_ij` is the edge weight between vertices `i` and `j` (zero on the
//! diagonal), `s_i` the vertex strength, and `W` the total edge weight.
//! Detection is greedy agglomeration: start from singletons and repeatedly
//! merge the community pair with the largest modularity gain
//! `ΔQ(a, b) = w_ab / W − S_a S_b / 2W²`, stopping when no merge gains.
//! Ties break toward the lexicographically smallest community-id pair so a
//! given graph always yields the same partition.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashMap};
use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::UserGraph;
use crate::jsonl;

/// Maximum vertex count accepted by [`brute_force_partition`]; Bell(12) is
/// ~4.2M partitions and already takes a few seconds.
pub const BRUTE_FORCE_MAX_VERTICES: usize = 12;

/// A user → community assignment for one window.
///
/// Community ids are dense `0..k`, numbered by first appearance over the
/// canonically sorted user list. `modularity_q` is `None` when the graph has
/// no edges (W = 0 leaves Q undefined).
#[derive(Debug, Clone, PartialEq)]
pub struct Partition {
    window_index: usize,
    users: Vec<String>,
    labels: Vec<usize>,
    members: Vec<Vec<usize>>,
    modularity_q: Option<f64>,
}

impl Partition {
    /// Builds a partition from per-user labels, renumbering communities
    /// densely by first appearance. `users` must be sorted.
    pub fn from_labels(
        window_index: usize,
        users: Vec<String>,
        raw_labels: &[usize],
        modularity_q: Option<f64>,
    ) -> Self {
        assert_eq!(users.len(), raw_labels.len(), "one label per user");
        debug_assert!(users.windows(2).all(|w| w[0] < w[1]), "users sorted unique");
        let mut renumber: HashMap<usize, usize> = HashMap::new();
        let mut labels = Vec::with_capacity(raw_labels.len());
        let mut members: Vec<Vec<usize>> = Vec::new();
        for (user_index, &raw) in raw_labels.iter().enumerate() {
            let next_id = renumber.len();
            let id = *renumber.entry(raw).or_insert(next_id);
            if id == members.len() {
                members.push(Vec::new());
            }
            members[id].push(user_index);
            labels.push(id);
        }
        Self {
            window_index,
            users,
            labels,
            members,
            modularity_q,
        }
    }

    pub fn with_window_index(mut self, window_index: usize) -> Self {
        self.window_index = window_index;
        self
    }

    pub fn window_index(&self) -> usize {
        self.window_index
    }

    pub fn users(&self) -> &[String] {
        &self.users
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn community_count(&self) -> usize {
        self.members.len()
    }

    pub fn size(&self, community: usize) -> usize {
        self.members[community].len()
    }

    pub fn member_ids(&self, community: usize) -> impl Iterator<Item = &str> {
        self.members[community].iter().map(|&i| self.users[i].as_str())
    }

    pub fn community_of(&self, user_id: &str) -> Option<usize> {
        self.users
            .binary_search_by(|u| u.as_str().cmp(user_id))
            .ok()
            .map(|i| self.labels[i])
    }

    pub fn modularity_q(&self) -> Option<f64> {
        self.modularity_q
    }

    pub fn is_empty(&self) -> bool {
        self.users.is_empty()
    }
}

#[derive(Debug, Error)]
pub enum CommunityError {
    #[error("modularity is undefined on a graph with no edge weight")]
    UndefinedModularity,
    #[error("partition does not cover the graph's vertex set: {0}")]
    PartitionMismatch(String),
    #[error("brute force supports at most {max} vertices, got {count}")]
    TooManyVertices { count: usize, max: usize },
    #[error("malformed partition dump: {0}")]
    Dump(String),
}

/// Evaluates Q for `partition` over `graph`.
///
/// The partition must cover exactly the graph's vertex set and the graph
/// must carry positive total weight.
pub fn modularity(graph: &UserGraph, partition: &Partition) -> Result<f64, CommunityError> {
    if graph.total_weight() <= 0.0 {
        return Err(CommunityError::UndefinedModularity);
    }
    if partition.users() != graph.user_ids() {
        return Err(CommunityError::PartitionMismatch(format!(
            "partition has {} users, graph has {} vertices",
            partition.users().len(),
            graph.vertex_count()
        )));
    }
    Ok(modularity_from_labels(graph, partition.labels()))
}

/// Q from per-vertex labels, grouped by community: for each community c,
/// `w_in(c)/W − (S_c / 2W)²`. Equal to the ordered-pair double sum.
fn modularity_from_labels(graph: &UserGraph, labels: &[usize]) -> f64 {
    let total = graph.total_weight();
    let communities = labels.iter().copied().max().map_or(0, |m| m + 1);
    let mut internal = vec![0.0f64; communities];
    let mut strength = vec![0.0f64; communities];
    for e in graph.edges() {
        if labels[e.a] == labels[e.b] {
            internal[labels[e.a]] += e.weight;
        }
    }
    for (vertex, &label) in labels.iter().enumerate() {
        strength[label] += graph.strength(vertex);
    }
    let mut q = 0.0;
    for c in 0..communities {
        let frac = strength[c] / (2.0 * total);
        q += internal[c] / total - frac * frac;
    }
    q
}

/// How the greedy merge sequence is cut into the returned partition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CutRule {
    /// Stop at the first step where the best merge no longer increases Q.
    #[default]
    FirstNonPositive,
    /// Run the full dendrogram (forcing non-improving merges) and cut at
    /// the maximum Q reached, earliest such point on ties.
    PeakQ,
}

/// Greedy agglomerative modularity maximization with default cut rule.
pub fn detect_communities(graph: &UserGraph) -> Partition {
    detect_communities_with(graph, CutRule::FirstNonPositive)
}

pub fn detect_communities_with(graph: &UserGraph, cut: CutRule) -> Partition {
    let n = graph.vertex_count();
    if n == 0 {
        return Partition::from_labels(0, Vec::new(), &[], None);
    }
    if graph.total_weight() <= 0.0 {
        // no edges: everyone is a singleton and Q is undefined
        let labels: Vec<usize> = (0..n).collect();
        return Partition::from_labels(0, graph.user_ids().to_vec(), &labels, None);
    }

    let merges = greedy_merge_sequence(graph);
    let singleton_q = modularity_from_labels(graph, &(0..n).collect::<Vec<_>>());
    let cut_len = match cut {
        CutRule::FirstNonPositive => merges.iter().take_while(|m| m.gain > 0.0).count(),
        CutRule::PeakQ => {
            let mut best_q = singleton_q;
            let mut best_len = 0;
            let mut q = singleton_q;
            for (idx, m) in merges.iter().enumerate() {
                q += m.gain;
                if q > best_q {
                    best_q = q;
                    best_len = idx + 1;
                }
            }
            best_len
        }
    };

    // replay the kept merges through a union-find
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    for m in &merges[..cut_len] {
        let (ra, rb) = (find(&mut parent, m.a), find(&mut parent, m.b));
        let (keep, drop) = if ra < rb { (ra, rb) } else { (rb, ra) };
        parent[drop] = keep;
    }
    let labels: Vec<usize> = (0..n).map(|v| find(&mut parent, v)).collect();
    let mut partition = Partition::from_labels(0, graph.user_ids().to_vec(), &labels, None);
    partition.modularity_q = Some(modularity_from_labels(graph, partition.labels()));
    partition
}

struct Merge {
    a: usize,
    b: usize,
    gain: f64,
}

/// Candidate merge for the lazy max-heap: highest gain first, then the
/// lexicographically smallest `(a, b)` pair.
#[derive(PartialEq)]
struct Candidate {
    gain: f64,
    a: usize,
    b: usize,
}

impl Eq for Candidate {}

impl Ord for Candidate {
    fn cmp(&self, other: &Self) -> Ordering {
        self.gain
            .partial_cmp(&other.gain)
            .expect("gains are finite")
            .then_with(|| other.a.cmp(&self.a))
            .then_with(|| other.b.cmp(&self.b))
    }
}

impl PartialOrd for Candidate {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

fn pair_key(a: usize, b: usize) -> (usize, usize) {
    if a < b {
        (a, b)
    } else {
        (b, a)
    }
}

/// Runs the full greedy merge sequence (all n−1 possible merges of the
/// connected structure, in gain order with deterministic tie-breaks),
/// maintaining inter-community weights and strengths incrementally.
fn greedy_merge_sequence(graph: &UserGraph) -> Vec<Merge> {
    let n = graph.vertex_count();
    let total = graph.total_weight();
    let mut strength: Vec<f64> = graph.strengths().to_vec();
    let mut active = vec![true; n];
    let mut pair_weight: HashMap<(usize, usize), f64> = HashMap::new();
    let mut neighbors: Vec<Vec<usize>> = vec![Vec::new(); n];
    for e in graph.edges() {
        pair_weight.insert((e.a, e.b), e.weight);
        neighbors[e.a].push(e.b);
        neighbors[e.b].push(e.a);
    }

    let gain = |w_ab: f64, s_a: f64, s_b: f64| w_ab / total - s_a * s_b / (2.0 * total * total);

    let mut heap: BinaryHeap<Candidate> = pair_weight
        .iter()
        .map(|(&(a, b), &w)| Candidate {
            gain: gain(w, strength[a], strength[b]),
            a,
            b,
        })
        .collect();

    let mut merges = Vec::new();
    while let Some(cand) = heap.pop() {
        if !active[cand.a] || !active[cand.b] {
            continue;
        }
        let key = pair_key(cand.a, cand.b);
        let Some(&w_ab) = pair_weight.get(&key) else {
            continue;
        };
        let current = gain(w_ab, strength[cand.a], strength[cand.b]);
        if current != cand.gain {
            continue; // stale entry; a refreshed one is in the heap
        }

        // merge b into a, a keeps the smaller id
        let (a, b) = key;
        merges.push(Merge {
            a,
            b,
            gain: cand.gain,
        });
        active[b] = false;
        pair_weight.remove(&key);

        let b_neighbors = std::mem::take(&mut neighbors[b]);
        for k in b_neighbors {
            if !active[k] || k == a {
                continue;
            }
            let w_bk = pair_weight
                .remove(&pair_key(b, k))
                .expect("neighbor entry exists");
            let entry = pair_weight.entry(pair_key(a, k)).or_insert_with(|| {
                neighbors[a].push(k);
                neighbors[k].push(a);
                0.0
            });
            *entry += w_bk;
        }
        strength[a] += strength[b];

        // refresh candidates for every pair now touching a
        let mut a_neighbors = std::mem::take(&mut neighbors[a]);
        a_neighbors.retain(|&k| active[k] && pair_weight.contains_key(&pair_key(a, k)));
        a_neighbors.sort_unstable();
        a_neighbors.dedup();
        for &k in &a_neighbors {
            let w = pair_weight[&pair_key(a, k)];
            heap.push(Candidate {
                gain: gain(w, strength[a], strength[k]),
                a: pair_key(a, k).0,
                b: pair_key(a, k).1,
            });
        }
        neighbors[a] = a_neighbors;
    }
    merges
}

/// Exhaustive maximum-modularity search, the test oracle for
/// [`detect_communities`].
///
/// Enumerates every set partition (restricted-growth strings) of up to
/// [`BRUTE_FORCE_MAX_VERTICES`] vertices and returns the best; ties prefer
/// fewer communities, then the lexicographically smallest assignment.
pub fn brute_force_partition(graph: &UserGraph) -> Result<Partition, CommunityError> {
    let n = graph.vertex_count();
    if n > BRUTE_FORCE_MAX_VERTICES {
        return Err(CommunityError::TooManyVertices {
            count: n,
            max: BRUTE_FORCE_MAX_VERTICES,
        });
    }
    if graph.total_weight() <= 0.0 {
        return Err(CommunityError::UndefinedModularity);
    }

    let mut best_labels: Vec<usize> = vec![0; n];
    let mut best_q = f64::NEG_INFINITY;
    let mut best_count = usize::MAX;
    enumerate_restricted_growth(n, &mut |labels| {
        let q = modularity_from_labels(graph, labels);
        let count = labels.iter().copied().max().map_or(0, |m| m + 1);
        // RGS enumeration is lexicographic, so on full ties the first stays
        if q > best_q + 1e-15 || ((q - best_q).abs() <= 1e-15 && count < best_count) {
            best_q = q;
            best_count = count;
            best_labels = labels.to_vec();
        }
    });
    Ok(Partition::from_labels(
        0,
        graph.user_ids().to_vec(),
        &best_labels,
        Some(modularity_from_labels(graph, &best_labels)),
    ))
}

/// Calls `visit` with every restricted-growth string of length `n`, in
/// lexicographic order.
fn enumerate_restricted_growth(n: usize, visit: &mut dyn FnMut(&[usize])) {
    if n == 0 {
        visit(&[]);
        return;
    }
    let mut labels = vec![0usize; n];
    fn recurse(labels: &mut Vec<usize>, pos: usize, max_used: usize, visit: &mut dyn FnMut(&[usize])) {
        if pos == labels.len() {
            visit(labels);
            return;
        }
        for label in 0..=max_used + 1 {
            labels[pos] = label;
            recurse(labels, pos + 1, max_used.max(label), visit);
        }
    }
    // first vertex is always community 0
    recurse(&mut labels, 1, 0, visit);
}

/// One community record of the JSON-lines partition dump.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CommunityRecord {
    pub window_index: usize,
    pub community_id: usize,
    pub size: usize,
    pub modularity_q: Option<f64>,
    pub members: Vec<String>,
}

pub fn partition_records(partition: &Partition) -> Vec<CommunityRecord> {
    (0..partition.community_count())
        .map(|c| CommunityRecord {
            window_index: partition.window_index(),
            community_id: c,
            size: partition.size(c),
            modularity_q: partition.modularity_q(),
            members: partition.member_ids(c).map(str::to_string).collect(),
        })
        .collect()
}

/// Writes partitions as JSON-lines, one record per community.
pub fn write_partitions<W: Write>(out: &mut W, partitions: &[Partition]) -> std::io::Result<()> {
    for partition in partitions {
        jsonl::write_records(out, partition_records(partition))?;
    }
    Ok(())
}

/// Reads a partition dump back into per-window partitions, sorted by window
/// index.
pub fn read_partitions<R: BufRead>(input: R) -> Result<Vec<Partition>, CommunityError> {
    let records: Vec<CommunityRecord> =
        jsonl::read_records(input).map_err(CommunityError::Dump)?;
    let mut by_window: HashMap<usize, Vec<CommunityRecord>> = HashMap::new();
    for record in records {
        by_window.entry(record.window_index).or_default().push(record);
    }
    let mut windows: Vec<usize> = by_window.keys().copied().collect();
    windows.sort_unstable();

    let mut partitions = Vec::with_capacity(windows.len());
    for window in windows {
        let mut records = by_window.remove(&window).unwrap();
        records.sort_by_key(|r| r.community_id);
        let modularity_q = records.first().and_then(|r| r.modularity_q);
        let mut pairs: Vec<(String, usize)> = Vec::new();
        for record in &records {
            for member in &record.members {
                pairs.push((member.clone(), record.community_id));
            }
        }
        pairs.sort();
        if pairs.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(CommunityError::Dump(format!(
                "window {window}: a user appears in two communities"
            )));
        }
        let users: Vec<String> = pairs.iter().map(|(u, _)| u.clone()).collect();
        let labels: Vec<usize> = pairs.iter().map(|(_, c)| *c).collect();
        partitions.push(Partition::from_labels(window, users, &labels, modularity_q));
    }
    Ok(partitions)
}
