//! Cross-window community linking: transition probabilities, evolution
//! events, maximal paths, and user retention.
//!
//! For communities `C_i` at window t and `C_j` at window t+1 the transition
//! probability conditions on the users still present at t+1:
//!
//! ```text
//! P_ij = |C_i(t) ∩ C_j(t+1)| / |C_i(t) ∩ U(t+1)|
//! ```
//!
//! so every non-empty row is stochastic, and the fraction of departed users
//! is reported separately as attrition. Each node links forward to its
//! highest-probability successor (the *argmax* link); links above a
//! threshold are kept as dashed *secondary* context. Paths follow argmax
//! links, and where two paths point at the same successor the one
//! contributing more members continues through it.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::io::{self, BufRead, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::community::Partition;
use crate::jsonl;

#[derive(Debug, Error)]
pub enum EvolutionError {
    #[error("partitions are not consecutive: windows {from} and {to}")]
    NonConsecutiveWindows { from: usize, to: usize },
    #[error("retention delta {delta} out of range for path of length {length}")]
    DeltaOutOfRange { delta: usize, length: usize },
    #[error("no partition provided for window {window}")]
    MissingPartition { window: usize },
    #[error("malformed evolution dump: {0}")]
    Dump(String),
}

/// Membership flow out of one source community.
#[derive(Debug, Clone, PartialEq)]
pub struct TransitionRow {
    pub source: usize,
    pub source_size: usize,
    /// Source members present anywhere in the target window.
    pub present: usize,
    /// Target community → number of source members who moved there.
    pub overlaps: BTreeMap<usize, usize>,
}

impl TransitionRow {
    pub fn probability(&self, target: usize) -> f64 {
        if self.present == 0 {
            return 0.0;
        }
        self.overlaps
            .get(&target)
            .map_or(0.0, |&n| n as f64 / self.present as f64)
    }

    /// Fraction of source members absent from the target window.
    pub fn attrition(&self) -> f64 {
        1.0 - self.present as f64 / self.source_size as f64
    }

    pub fn is_empty(&self) -> bool {
        self.present == 0
    }
}

/// Transition rows between the communities of two consecutive windows.
#[derive(Debug, Clone, PartialEq)]
pub struct TransitionMatrix {
    pub from_window: usize,
    pub to_window: usize,
    pub rows: Vec<TransitionRow>,
    pub target_sizes: Vec<usize>,
}

/// Computes the transition matrix between two consecutive windows'
/// partitions.
pub fn transition_matrix(
    p1: &Partition,
    p2: &Partition,
) -> Result<TransitionMatrix, EvolutionError> {
    if p2.window_index() != p1.window_index() + 1 {
        return Err(EvolutionError::NonConsecutiveWindows {
            from: p1.window_index(),
            to: p2.window_index(),
        });
    }
    let rows = (0..p1.community_count())
        .map(|source| {
            let mut overlaps: BTreeMap<usize, usize> = BTreeMap::new();
            let mut present = 0;
            for member in p1.member_ids(source) {
                if let Some(target) = p2.community_of(member) {
                    present += 1;
                    *overlaps.entry(target).or_insert(0) += 1;
                }
            }
            TransitionRow {
                source,
                source_size: p1.size(source),
                present,
                overlaps,
            }
        })
        .collect();
    let target_sizes = (0..p2.community_count()).map(|c| p2.size(c)).collect();
    Ok(TransitionMatrix {
        from_window: p1.window_index(),
        to_window: p2.window_index(),
        rows,
        target_sizes,
    })
}

/// A community at a window, as a vertex of the evolution graph.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct NodeId {
    pub window: usize,
    pub community: usize,
}

#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize,
)]
#[serde(rename_all = "snake_case")]
pub enum EventKind {
    Birth,
    Death,
    Merge,
    Split,
    Growth,
    Contraction,
    Continuation,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LinkKind {
    /// The single highest-probability successor link of a node.
    Argmax,
    /// Any other link above the secondary threshold; visualization only,
    /// never part of path identity.
    Secondary,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvolutionNode {
    pub id: NodeId,
    pub size: usize,
    pub events: BTreeSet<EventKind>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvolutionLink {
    pub from: NodeId,
    pub to: NodeId,
    pub probability: f64,
    /// Absolute number of members moving along this link.
    pub contribution: usize,
    pub kind: LinkKind,
}

/// Communities of qualifying size across all windows, wired by argmax and
/// secondary links and tagged with evolution events.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct EvolutionGraph {
    nodes: BTreeMap<NodeId, EvolutionNode>,
    links: Vec<EvolutionLink>,
}

impl EvolutionGraph {
    pub fn nodes(&self) -> impl Iterator<Item = &EvolutionNode> {
        self.nodes.values()
    }

    pub fn node(&self, id: NodeId) -> Option<&EvolutionNode> {
        self.nodes.get(&id)
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn links(&self) -> &[EvolutionLink] {
        &self.links
    }

    pub fn argmax_from(&self, id: NodeId) -> Option<&EvolutionLink> {
        self.links
            .iter()
            .find(|l| l.kind == LinkKind::Argmax && l.from == id)
    }
}

/// Growth/contraction thresholds: a node grows past 1.2× its primary
/// predecessor's size and contracts below 0.8×. Compared in integer
/// arithmetic (5·size vs 6·pred and 4·pred).
fn size_event(node_size: usize, pred_size: usize) -> EventKind {
    if 5 * node_size >= 6 * pred_size {
        EventKind::Growth
    } else if 5 * node_size <= 4 * pred_size {
        EventKind::Contraction
    } else {
        EventKind::Continuation
    }
}

/// Assembles the evolution graph from consecutive transition matrices.
///
/// Nodes are communities of size ≥ `min_size`. Every node gets at most one
/// outgoing argmax link — to its highest-probability successor among nodes,
/// ties broken toward the larger target community, then the smaller id —
/// plus secondary links where `P_ij ≥ secondary_threshold`.
///
/// Event rules: *birth* = no incoming link; *death* = a following window
/// exists but every member left; *merge* = two or more incoming argmax
/// links; *split* = two or more outgoing links; *growth* / *contraction* /
/// *continuation* = size change versus the primary (largest-contribution)
/// predecessor.
pub fn link_windows(
    matrices: &[TransitionMatrix],
    min_size: usize,
    secondary_threshold: f64,
) -> Result<EvolutionGraph, EvolutionError> {
    for pair in matrices.windows(2) {
        if pair[1].from_window != pair[0].to_window {
            return Err(EvolutionError::NonConsecutiveWindows {
                from: pair[0].to_window,
                to: pair[1].from_window,
            });
        }
    }

    let mut nodes: BTreeMap<NodeId, EvolutionNode> = BTreeMap::new();
    let mut insert_node = |id: NodeId, size: usize| {
        if size >= min_size {
            nodes.entry(id).or_insert(EvolutionNode {
                id,
                size,
                events: BTreeSet::new(),
            });
        }
    };
    for matrix in matrices {
        for row in &matrix.rows {
            insert_node(
                NodeId {
                    window: matrix.from_window,
                    community: row.source,
                },
                row.source_size,
            );
        }
        for (community, &size) in matrix.target_sizes.iter().enumerate() {
            insert_node(
                NodeId {
                    window: matrix.to_window,
                    community,
                },
                size,
            );
        }
    }

    let mut links: Vec<EvolutionLink> = Vec::new();
    for matrix in matrices {
        for row in &matrix.rows {
            let from = NodeId {
                window: matrix.from_window,
                community: row.source,
            };
            if !nodes.contains_key(&from) || row.is_empty() {
                continue;
            }
            // candidates restricted to successor communities that are nodes
            let candidates: Vec<(usize, usize)> = row
                .overlaps
                .iter()
                .map(|(&target, &count)| (target, count))
                .filter(|&(target, _)| {
                    nodes.contains_key(&NodeId {
                        window: matrix.to_window,
                        community: target,
                    })
                })
                .collect();
            // overlap counts share the row denominator, so comparing counts
            // compares probabilities exactly
            let argmax = candidates
                .iter()
                .copied()
                .max_by(|&(ta, ca), &(tb, cb)| {
                    ca.cmp(&cb)
                        .then_with(|| matrix.target_sizes[ta].cmp(&matrix.target_sizes[tb]))
                        .then_with(|| tb.cmp(&ta))
                });
            let Some((argmax_target, _)) = argmax else {
                continue;
            };
            for (target, count) in candidates {
                let probability = count as f64 / row.present as f64;
                let kind = if target == argmax_target {
                    LinkKind::Argmax
                } else if probability >= secondary_threshold {
                    LinkKind::Secondary
                } else {
                    continue;
                };
                links.push(EvolutionLink {
                    from,
                    to: NodeId {
                        window: matrix.to_window,
                        community: target,
                    },
                    probability,
                    contribution: count,
                    kind,
                });
            }
        }
    }
    links.sort_by_key(|l| (l.from, l.to));

    // event tagging
    let mut incoming: HashMap<NodeId, Vec<&EvolutionLink>> = HashMap::new();
    let mut outgoing_count: HashMap<NodeId, usize> = HashMap::new();
    for link in &links {
        incoming.entry(link.to).or_default().push(link);
        *outgoing_count.entry(link.from).or_insert(0) += 1;
    }
    let empty_rows: BTreeSet<NodeId> = matrices
        .iter()
        .flat_map(|m| {
            m.rows.iter().filter(|r| r.is_empty()).map(|r| NodeId {
                window: m.from_window,
                community: r.source,
            })
        })
        .collect();

    let ids: Vec<NodeId> = nodes.keys().copied().collect();
    for id in ids {
        let mut events = BTreeSet::new();
        let node_size = nodes[&id].size;
        let incoming_links = incoming.get(&id).map(Vec::as_slice).unwrap_or(&[]);
        if incoming_links.is_empty() {
            events.insert(EventKind::Birth);
        }
        // empty rows only exist for windows that have a successor window
        if empty_rows.contains(&id) {
            events.insert(EventKind::Death);
        }
        let argmax_in: Vec<&&EvolutionLink> = incoming_links
            .iter()
            .filter(|l| l.kind == LinkKind::Argmax)
            .collect();
        if argmax_in.len() >= 2 {
            events.insert(EventKind::Merge);
        }
        if outgoing_count.get(&id).copied().unwrap_or(0) >= 2 {
            events.insert(EventKind::Split);
        }
        if let Some(primary) = argmax_in.iter().max_by(|a, b| {
            a.contribution
                .cmp(&b.contribution)
                .then_with(|| nodes[&a.from].size.cmp(&nodes[&b.from].size))
                .then_with(|| b.from.cmp(&a.from))
        }) {
            let pred_size = nodes[&primary.from].size;
            events.insert(size_event(node_size, pred_size));
        }
        nodes.get_mut(&id).unwrap().events = events;
    }

    Ok(EvolutionGraph { nodes, links })
}

/// A maximal chain of communities joined by argmax links, with the member
/// set at every step.
#[derive(Debug, Clone, PartialEq)]
pub struct EvolutionPath {
    pub id: usize,
    pub nodes: Vec<NodeId>,
    pub members: Vec<BTreeSet<String>>,
}

impl EvolutionPath {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn start_window(&self) -> usize {
        self.nodes.first().map_or(0, |n| n.window)
    }

    pub fn end_window(&self) -> usize {
        self.nodes.last().map_or(0, |n| n.window)
    }

    pub fn mean_size(&self) -> f64 {
        if self.members.is_empty() {
            return 0.0;
        }
        self.members.iter().map(BTreeSet::len).sum::<usize>() as f64 / self.members.len() as f64
    }
}

/// Decomposes the evolution graph into paths. Every node lands in exactly
/// one path; at merge points the predecessor contributing the most members
/// continues (ties: larger predecessor, then smaller id) and the other
/// paths end there.
pub fn extract_paths(
    graph: &EvolutionGraph,
    partitions: &[Partition],
) -> Result<Vec<EvolutionPath>, EvolutionError> {
    let by_window: HashMap<usize, &Partition> =
        partitions.iter().map(|p| (p.window_index(), p)).collect();

    let mut argmax_in: HashMap<NodeId, Vec<&EvolutionLink>> = HashMap::new();
    for link in graph.links() {
        if link.kind == LinkKind::Argmax {
            argmax_in.entry(link.to).or_default().push(link);
        }
    }

    let mut node_path: HashMap<NodeId, usize> = HashMap::new();
    let mut paths: Vec<EvolutionPath> = Vec::new();
    // BTreeMap order = windows ascending, communities ascending within
    for node in graph.nodes() {
        let id = node.id;
        let winner = argmax_in.get(&id).and_then(|preds| {
            preds
                .iter()
                .max_by(|a, b| {
                    a.contribution
                        .cmp(&b.contribution)
                        .then_with(|| {
                            let sa = graph.node(a.from).map_or(0, |n| n.size);
                            let sb = graph.node(b.from).map_or(0, |n| n.size);
                            sa.cmp(&sb)
                        })
                        .then_with(|| b.from.cmp(&a.from))
                })
                .copied()
        });
        let members = member_set(&by_window, id)?;
        match winner {
            Some(link) => {
                let path_id = node_path[&link.from];
                node_path.insert(id, path_id);
                paths[path_id].nodes.push(id);
                paths[path_id].members.push(members);
            }
            None => {
                let path_id = paths.len();
                node_path.insert(id, path_id);
                paths.push(EvolutionPath {
                    id: path_id,
                    nodes: vec![id],
                    members: vec![members],
                });
            }
        }
    }
    Ok(paths)
}

fn member_set(
    by_window: &HashMap<usize, &Partition>,
    id: NodeId,
) -> Result<BTreeSet<String>, EvolutionError> {
    let partition = by_window
        .get(&id.window)
        .ok_or(EvolutionError::MissingPartition { window: id.window })?;
    Ok(partition.member_ids(id.community).map(str::to_string).collect())
}

/// Average over all valid starting steps of the fraction of members still
/// in the path `delta` windows later.
pub fn retention(path: &EvolutionPath, delta: usize) -> Result<f64, EvolutionError> {
    if delta >= path.len() {
        return Err(EvolutionError::DeltaOutOfRange {
            delta,
            length: path.len(),
        });
    }
    if delta == 0 {
        return Ok(1.0);
    }
    let mut total = 0.0;
    let steps = path.len() - delta;
    for i in 0..steps {
        let now = &path.members[i];
        let later = &path.members[i + delta];
        total += now.intersection(later).count() as f64 / now.len() as f64;
    }
    Ok(total / steps as f64)
}

// ---------------------------------------------------------------------------
// serialization
// ---------------------------------------------------------------------------

#[derive(Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
enum EvolutionRecord {
    Node {
        window_index: usize,
        community_id: usize,
        size: usize,
        events: Vec<EventKind>,
    },
    Link {
        from_window: usize,
        from_community: usize,
        to_window: usize,
        to_community: usize,
        probability: f64,
        contribution: usize,
        link_kind: LinkKind,
    },
}

pub fn write_evolution<W: Write>(out: &mut W, graph: &EvolutionGraph) -> io::Result<()> {
    let nodes = graph.nodes().map(|n| EvolutionRecord::Node {
        window_index: n.id.window,
        community_id: n.id.community,
        size: n.size,
        events: n.events.iter().copied().collect(),
    });
    let links = graph.links().iter().map(|l| EvolutionRecord::Link {
        from_window: l.from.window,
        from_community: l.from.community,
        to_window: l.to.window,
        to_community: l.to.community,
        probability: l.probability,
        contribution: l.contribution,
        link_kind: l.kind,
    });
    jsonl::write_records(out, nodes.chain(links))
}

pub fn read_evolution<R: BufRead>(input: R) -> Result<EvolutionGraph, EvolutionError> {
    let records: Vec<EvolutionRecord> = jsonl::read_records(input).map_err(EvolutionError::Dump)?;
    let mut graph = EvolutionGraph::default();
    for record in records {
        match record {
            EvolutionRecord::Node {
                window_index,
                community_id,
                size,
                events,
            } => {
                let id = NodeId {
                    window: window_index,
                    community: community_id,
                };
                graph.nodes.insert(
                    id,
                    EvolutionNode {
                        id,
                        size,
                        events: events.into_iter().collect(),
                    },
                );
            }
            EvolutionRecord::Link {
                from_window,
                from_community,
                to_window,
                to_community,
                probability,
                contribution,
                link_kind,
            } => graph.links.push(EvolutionLink {
                from: NodeId {
                    window: from_window,
                    community: from_community,
                },
                to: NodeId {
                    window: to_window,
                    community: to_community,
                },
                probability,
                contribution,
                kind: link_kind,
            }),
        }
    }
    graph.links.sort_by_key(|l| (l.from, l.to));
    Ok(graph)
}

#[derive(Debug, Serialize, Deserialize)]
struct PathRecord {
    path_id: usize,
    nodes: Vec<PathNodeRecord>,
    members: Vec<Vec<String>>,
}

#[derive(Debug, Serialize, Deserialize)]
struct PathNodeRecord {
    window_index: usize,
    community_id: usize,
}

pub fn write_paths<W: Write>(out: &mut W, paths: &[EvolutionPath]) -> io::Result<()> {
    let records = paths.iter().map(|p| PathRecord {
        path_id: p.id,
        nodes: p
            .nodes
            .iter()
            .map(|n| PathNodeRecord {
                window_index: n.window,
                community_id: n.community,
            })
            .collect(),
        members: p
            .members
            .iter()
            .map(|m| m.iter().cloned().collect())
            .collect(),
    });
    jsonl::write_records(out, records)
}

pub fn read_paths<R: BufRead>(input: R) -> Result<Vec<EvolutionPath>, EvolutionError> {
    let records: Vec<PathRecord> = jsonl::read_records(input).map_err(EvolutionError::Dump)?;
    Ok(records
        .into_iter()
        .map(|r| EvolutionPath {
            id: r.path_id,
            nodes: r
                .nodes
                .into_iter()
                .map(|n| NodeId {
                    window: n.window_index,
                    community: n.community_id,
                })
                .collect(),
            members: r
                .members
                .into_iter()
                .map(|m| m.into_iter().collect())
                .collect(),
        })
        .collect())
}

/// Deltas reported by the paths CSV.
pub const REPORT_DELTAS: [usize; 4] = [1, 2, 6, 24];

/// Writes the per-path summary CSV with retention at Δ ∈ {1, 2, 6, 24};
/// deltas beyond a path's length are left blank.
pub fn write_paths_csv<W: Write>(out: &mut W, paths: &[EvolutionPath]) -> io::Result<()> {
    writeln!(
        out,
        "path_id,start_window,end_window,length,mean_size,retention_1,retention_2,retention_6,retention_24"
    )?;
    for path in paths {
        write!(
            out,
            "{},{},{},{},{}",
            path.id,
            path.start_window(),
            path.end_window(),
            path.len(),
            path.mean_size()
        )?;
        for delta in REPORT_DELTAS {
            match retention(path, delta) {
                Ok(r) => write!(out, ",{r}")?,
                Err(_) => write!(out, ",")?,
            }
        }
        writeln!(out)?;
    }
    Ok(())
}

/// Emits the evolution graph as Graphviz DOT: one rank per window with time
/// flowing downward, node label and area reflecting community size, solid
/// argmax links, dashed secondary links, and node colors indexed by path.
pub fn write_dot<W: Write>(
    out: &mut W,
    graph: &EvolutionGraph,
    paths: &[EvolutionPath],
    header: &str,
) -> io::Result<()> {
    let mut path_of: HashMap<NodeId, usize> = HashMap::new();
    for path in paths {
        for node in &path.nodes {
            path_of.insert(*node, path.id);
        }
    }

    writeln!(out, "digraph community_evolution {{")?;
    for line in header.lines() {
        writeln!(out, "  // {line}")?;
    }
    writeln!(out, "  rankdir=TB;")?;
    writeln!(out, "  ranksep=0.8;")?;
    writeln!(
        out,
        "  node [shape=circle, style=filled, colorscheme=set312, fixedsize=true, fontsize=9];"
    )?;

    let mut windows: Vec<usize> = graph.nodes().map(|n| n.id.window).collect();
    windows.sort_unstable();
    windows.dedup();

    for &window in &windows {
        writeln!(out, "  {{ rank=same;")?;
        writeln!(
            out,
            "    t{window} [shape=plaintext, style=\"\", label=\"w{window}\"];"
        )?;
        for node in graph.nodes().filter(|n| n.id.window == window) {
            // area proportional to community size
            let diameter = (node.size as f64).sqrt() * 0.09;
            let diameter = diameter.clamp(0.25, 3.0);
            let color = path_of.get(&node.id).map_or(0, |p| p % 12) + 1;
            writeln!(
                out,
                "    {} [label=\"{}\", width={:.3}, height={:.3}, fillcolor={}];",
                dot_id(node.id),
                node.size,
                diameter,
                diameter,
                color
            )?;
        }
        writeln!(out, "  }}")?;
    }

    // invisible spine keeps window ranks in temporal order
    for pair in windows.windows(2) {
        writeln!(out, "  t{} -> t{} [style=invis];", pair[0], pair[1])?;
    }

    for link in graph.links() {
        let style = match link.kind {
            LinkKind::Argmax => "solid",
            LinkKind::Secondary => "dashed",
        };
        writeln!(
            out,
            "  {} -> {} [style={style}];",
            dot_id(link.from),
            dot_id(link.to)
        )?;
    }
    writeln!(out, "}}")?;
    Ok(())
}

fn dot_id(id: NodeId) -> String {
    format!("w{}_c{}", id.window, id.community)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Builds a partition at `window` from explicit member lists.
    fn partition(window: usize, communities: &[&[&str]]) -> Partition {
        let mut pairs: Vec<(String, usize)> = Vec::new();
        for (c, members) in communities.iter().enumerate() {
            for m in *members {
                pairs.push(((*m).to_string(), c));
            }
        }
        pairs.sort();
        let users: Vec<String> = pairs.iter().map(|(u, _)| u.clone()).collect();
        let labels: Vec<usize> = pairs.iter().map(|(_, c)| *c).collect();
        Partition::from_labels(window, users, &labels, None)
    }

    fn names(prefix: &str, range: std::ops::Range<usize>) -> Vec<String> {
        range.map(|i| format!("{prefix}{i:03}")).collect()
    }

    #[test]
    fn transition_row_splits_three_to_one() {
        let p1 = partition(0, &[&["u1", "u2", "u3", "u4"]]);
        let p2 = partition(1, &[&["u1", "u2", "u3"], &["u4"]]);
        let m = transition_matrix(&p1, &p2).unwrap();
        let row = &m.rows[0];
        assert_eq!(row.probability(0), 0.75);
        assert_eq!(row.probability(1), 0.25);
        assert_eq!(row.attrition(), 0.0);
    }

    #[test]
    fn transition_row_for_vanished_community() {
        let p1 = partition(0, &[&["u1", "u2"], &["u3"]]);
        let p2 = partition(1, &[&["u3"]]);
        let m = transition_matrix(&p1, &p2).unwrap();
        assert!(m.rows[0].is_empty());
        assert_eq!(m.rows[0].attrition(), 1.0);
        assert_eq!(m.rows[1].probability(0), 1.0);
    }

    #[test]
    fn transition_identity_partitions() {
        let p1 = partition(0, &[&["a", "b"], &["c", "d"]]);
        let p2 = partition(1, &[&["a", "b"], &["c", "d"]]);
        let m = transition_matrix(&p1, &p2).unwrap();
        for row in &m.rows {
            assert_eq!(row.probability(row.source), 1.0);
            assert_eq!(row.attrition(), 0.0);
        }
    }

    #[test]
    fn transition_rejects_non_consecutive() {
        let p1 = partition(0, &[&["a"]]);
        let p2 = partition(2, &[&["a"]]);
        assert!(matches!(
            transition_matrix(&p1, &p2),
            Err(EvolutionError::NonConsecutiveWindows { .. })
        ));
    }

    /// Three windows: two communities flow into one (merge), and a fresh
    /// community appears in the middle window (birth) then loses everyone
    /// (death).
    fn merge_fixture() -> (Vec<Partition>, Vec<TransitionMatrix>) {
        let big = names("b", 0..30);
        let small = names("s", 0..10);
        let fresh = names("f", 0..12);
        fn refs(v: &[String]) -> Vec<&str> {
            v.iter().map(String::as_str).collect()
        }

        let p0 = partition(0, &[&refs(&big), &refs(&small)]);
        let merged: Vec<String> = big.iter().chain(small.iter()).cloned().collect();
        let p1 = partition(1, &[&refs(&merged), &refs(&fresh)]);
        let p2 = partition(2, &[&refs(&merged)]);
        let matrices = vec![
            transition_matrix(&p0, &p1).unwrap(),
            transition_matrix(&p1, &p2).unwrap(),
        ];
        (vec![p0, p1, p2], matrices)
    }

    #[test]
    fn link_tags_merge_birth_and_death() {
        let (_, matrices) = merge_fixture();
        let graph = link_windows(&matrices, 5, 0.1).unwrap();
        let merged = graph
            .node(NodeId {
                window: 1,
                community: 0,
            })
            .unwrap();
        assert!(merged.events.contains(&EventKind::Merge));
        let fresh = graph
            .node(NodeId {
                window: 1,
                community: 1,
            })
            .unwrap();
        assert!(fresh.events.contains(&EventKind::Birth));
        assert!(fresh.events.contains(&EventKind::Death));
        // first-window nodes also count as births (no incoming links)
        assert!(graph
            .node(NodeId {
                window: 0,
                community: 0
            })
            .unwrap()
            .events
            .contains(&EventKind::Birth));
    }

    #[test]
    fn link_size_events_use_twenty_percent_thresholds() {
        assert_eq!(size_event(12, 10), EventKind::Growth);
        assert_eq!(size_event(8, 10), EventKind::Contraction);
        assert_eq!(size_event(11, 10), EventKind::Continuation);
        assert_eq!(size_event(9, 10), EventKind::Continuation);
    }

    #[test]
    fn link_min_size_filters_nodes() {
        let (_, matrices) = merge_fixture();
        let graph = link_windows(&matrices, 11, 0.1).unwrap();
        // the 10-user community and the 12-user one straddle the threshold
        assert!(graph
            .node(NodeId {
                window: 0,
                community: 1
            })
            .is_none());
        assert!(graph
            .node(NodeId {
                window: 1,
                community: 1
            })
            .is_some());
    }

    #[test]
    fn link_argmax_is_unique_per_node() {
        let (_, matrices) = merge_fixture();
        let graph = link_windows(&matrices, 5, 0.1).unwrap();
        let mut seen = BTreeSet::new();
        for link in graph.links() {
            if link.kind == LinkKind::Argmax {
                assert!(seen.insert(link.from), "two argmax links from {:?}", link.from);
                assert!(link.probability > 0.0);
            }
        }
    }

    #[test]
    fn paths_follow_merge_contribution() {
        let (partitions, matrices) = merge_fixture();
        let graph = link_windows(&matrices, 5, 0.1).unwrap();
        let paths = extract_paths(&graph, &partitions).unwrap();
        // the 30-user community's path continues through the merge and on to
        // window 2; the 10-user community's path ends at window 0
        assert_eq!(paths.len(), 3);
        let main = &paths[0];
        assert_eq!(main.len(), 3);
        assert_eq!(
            main.nodes,
            vec![
                NodeId {
                    window: 0,
                    community: 0
                },
                NodeId {
                    window: 1,
                    community: 0
                },
                NodeId {
                    window: 2,
                    community: 0
                }
            ]
        );
        let cut = &paths[1];
        assert_eq!(cut.len(), 1);
        // every node appears in exactly one path
        let total: usize = paths.iter().map(EvolutionPath::len).sum();
        assert_eq!(total, graph.node_count());
    }

    #[test]
    fn linear_chain_is_one_path() {
        let users = names("u", 0..20);
        let refs: Vec<&str> = users.iter().map(String::as_str).collect();
        let ps: Vec<Partition> = (0..3).map(|w| partition(w, &[&refs])).collect();
        let matrices = vec![
            transition_matrix(&ps[0], &ps[1]).unwrap(),
            transition_matrix(&ps[1], &ps[2]).unwrap(),
        ];
        let graph = link_windows(&matrices, 5, 0.1).unwrap();
        let paths = extract_paths(&graph, &ps).unwrap();
        assert_eq!(paths.len(), 1);
        assert_eq!(paths[0].len(), 3);
    }

    #[test]
    fn isolated_node_is_a_unit_path() {
        let users = names("u", 0..10);
        let refs: Vec<&str> = users.iter().map(String::as_str).collect();
        let p = partition(0, &[&refs]);
        let graph = link_windows(&[], 5, 0.1).unwrap();
        assert_eq!(graph.node_count(), 0);
        // a single-window corpus has no matrices; build the one-node graph
        // from a degenerate matrix against an empty follow-up instead
        let p_next = partition(1, &[]);
        let m = transition_matrix(&p, &p_next).unwrap();
        let graph = link_windows(&[m], 5, 0.1).unwrap();
        let paths = extract_paths(&graph, &[p, p_next]).unwrap();
        assert_eq!(paths.len(), 1);
        assert_eq!(paths[0].len(), 1);
    }

    #[test]
    fn retention_zero_delta_is_exactly_one() {
        let users = names("u", 0..7);
        let refs: Vec<&str> = users.iter().map(String::as_str).collect();
        let ps: Vec<Partition> = (0..2).map(|w| partition(w, &[&refs])).collect();
        let m = transition_matrix(&ps[0], &ps[1]).unwrap();
        let graph = link_windows(&[m], 1, 0.1).unwrap();
        let paths = extract_paths(&graph, &ps).unwrap();
        assert_eq!(retention(&paths[0], 0).unwrap(), 1.0);
    }

    #[test]
    fn retention_counts_survivors() {
        let path = EvolutionPath {
            id: 0,
            nodes: vec![
                NodeId {
                    window: 0,
                    community: 0,
                },
                NodeId {
                    window: 1,
                    community: 0,
                },
            ],
            members: vec![
                (0..100).map(|i| format!("u{i:03}")).collect(),
                (0..40)
                    .map(|i| format!("u{i:03}"))
                    .chain((0..60).map(|i| format!("new{i}")))
                    .collect(),
            ],
        };
        assert_eq!(retention(&path, 1).unwrap(), 0.40);
    }

    #[test]
    fn retention_rejects_out_of_range_delta() {
        let path = EvolutionPath {
            id: 0,
            nodes: vec![NodeId {
                window: 0,
                community: 0,
            }],
            members: vec![BTreeSet::from(["u".to_string()])],
        };
        assert!(matches!(
            retention(&path, 1),
            Err(EvolutionError::DeltaOutOfRange { .. })
        ));
    }

    #[test]
    fn identity_chain_retains_everyone_at_every_delta() {
        let users = names("u", 0..15);
        let refs: Vec<&str> = users.iter().map(String::as_str).collect();
        let ps: Vec<Partition> = (0..5).map(|w| partition(w, &[&refs])).collect();
        let matrices: Vec<TransitionMatrix> = ps
            .windows(2)
            .map(|w| transition_matrix(&w[0], &w[1]).unwrap())
            .collect();
        let graph = link_windows(&matrices, 1, 0.1).unwrap();
        let paths = extract_paths(&graph, &ps).unwrap();
        assert_eq!(paths.len(), 1);
        for delta in 0..5 {
            assert_eq!(retention(&paths[0], delta).unwrap(), 1.0);
        }
    }

    #[test]
    fn dot_output_has_rank_per_window_and_link_styles() {
        let (partitions, matrices) = merge_fixture();
        let graph = link_windows(&matrices, 5, 0.1).unwrap();
        let paths = extract_paths(&graph, &partitions).unwrap();
        let mut buf = Vec::new();
        write_dot(&mut buf, &graph, &paths, "fixture").unwrap();
        let dot = String::from_utf8(buf).unwrap();
        assert_eq!(dot.matches("rank=same").count(), 3);
        assert!(dot.contains("style=solid"));
        assert!(dot.contains("rankdir=TB"));
        assert!(dot.contains("// fixture"));
    }

    #[test]
    fn evolution_dump_round_trips() {
        let (_, matrices) = merge_fixture();
        let graph = link_windows(&matrices, 5, 0.1).unwrap();
        let mut buf = Vec::new();
        write_evolution(&mut buf, &graph).unwrap();
        let back = read_evolution(buf.as_slice()).unwrap();
        assert_eq!(back, graph);
    }

    #[test]
    fn paths_dump_round_trips() {
        let (partitions, matrices) = merge_fixture();
        let graph = link_windows(&matrices, 5, 0.1).unwrap();
        let paths = extract_paths(&graph, &partitions).unwrap();
        let mut buf = Vec::new();
        write_paths(&mut buf, &paths).unwrap();
        let back = read_paths(buf.as_slice()).unwrap();
        assert_eq!(back, paths);
    }

    #[test]
    fn paths_csv_blank_for_short_paths() {
        let path = EvolutionPath {
            id: 0,
            nodes: vec![
                NodeId {
                    window: 0,
                    community: 0,
                },
                NodeId {
                    window: 1,
                    community: 0,
                },
            ],
            members: vec![
                BTreeSet::from(["a".to_string(), "b".to_string()]),
                BTreeSet::from(["a".to_string()]),
            ],
        };
        let mut buf = Vec::new();
        write_paths_csv(&mut buf, &[path]).unwrap();
        let csv = String::from_utf8(buf).unwrap();
        let row = csv.lines().nth(1).unwrap();
        assert_eq!(row, "0,0,1,2,1.5,0.5,,,");
    }

    /// Random membership flows across a few windows.
    fn random_partition_chain() -> impl Strategy<Value = Vec<Partition>> {
        proptest::collection::vec(proptest::collection::vec(0usize..4, 12), 2..5).prop_map(
            |window_labels| {
                window_labels
                    .into_iter()
                    .enumerate()
                    .map(|(w, labels)| {
                        let users: Vec<String> = (0..labels.len()).map(|i| format!("u{i:02}")).collect();
                        Partition::from_labels(w, users, &labels, None)
                    })
                    .collect()
            },
        )
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        /// Non-empty transition rows are stochastic.
        #[test]
        fn rows_sum_to_one(ps in random_partition_chain()) {
            for pair in ps.windows(2) {
                let m = transition_matrix(&pair[0], &pair[1]).unwrap();
                for row in &m.rows {
                    if !row.is_empty() {
                        let sum: f64 = row
                            .overlaps
                            .keys()
                            .map(|&t| row.probability(t))
                            .sum();
                        prop_assert!((sum - 1.0).abs() < 1e-9);
                    }
                    let a = row.attrition();
                    prop_assert!((0.0..=1.0).contains(&a));
                }
            }
        }

        /// Paths cover every node exactly once.
        #[test]
        fn paths_partition_nodes(ps in random_partition_chain()) {
            let matrices: Vec<TransitionMatrix> = ps
                .windows(2)
                .map(|w| transition_matrix(&w[0], &w[1]).unwrap())
                .collect();
            let graph = link_windows(&matrices, 1, 0.1).unwrap();
            let paths = extract_paths(&graph, &ps).unwrap();
            let mut seen = BTreeSet::new();
            for path in &paths {
                prop_assert!(!path.is_empty());
                for pair in path.nodes.windows(2) {
                    prop_assert_eq!(pair[1].window, pair[0].window + 1);
                }
                for node in &path.nodes {
                    prop_assert!(seen.insert(*node));
                }
            }
            prop_assert_eq!(seen.len(), graph.node_count());
        }

        /// Retention is non-increasing in delta when member sets only shrink
        /// along the path.
        #[test]
        fn retention_monotone_under_shrinking(drops in proptest::collection::vec(0usize..4, 1..6)) {
            let mut current: BTreeSet<String> = (0..30).map(|i| format!("u{i:02}")).collect();
            let mut members = vec![current.clone()];
            for (step, drop) in drops.iter().enumerate() {
                for d in 0..*drop {
                    current.remove(&format!("u{:02}", (step * 4 + d) % 30));
                }
                members.push(current.clone());
            }
            let nodes = (0..members.len())
                .map(|w| NodeId { window: w, community: 0 })
                .collect();
            let path = EvolutionPath { id: 0, nodes, members };
            let mut last = 1.0;
            for delta in 0..path.len() {
                let r = retention(&path, delta).unwrap();
                prop_assert!(r <= last + 1e-12);
                last = r;
            }
        }
    }
}
