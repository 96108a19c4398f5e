//! Square-adjacency network built from move records.
//!
//! Nodes are squares, edges are observed moves. An edge survives only while
//! its endpoints share a neighbour, i.e. while it sits on a three-edge cycle.
//! The filter loops until nothing changes; since every edge of a surviving
//! triangle also survives, that happens after one deleting pass.

mod export;
mod fidelity;
mod layout;

use std::collections::BTreeMap;

use crate::chess::Square;
use crate::record::MoveRecord;

pub use export::{GraphDocument, GraphEdgeDoc, GraphNodeDoc};
pub use fidelity::{layout_fidelity, spearman_rho, FidelityError, LayoutFidelity};
pub use layout::{force_layout, LayoutError, LayoutMap, LayoutParams, Point};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Edge {
    pub a: Square,
    pub b: Square,
}

impl Edge {
    /// Undirected edge with endpoints in square order.
    pub fn new(u: Square, v: Square) -> Edge {
        if u <= v {
            Edge { a: u, b: v }
        } else {
            Edge { a: v, b: u }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoardGraph {
    node_weights: BTreeMap<Square, u64>,
    edge_weights: BTreeMap<Edge, u64>,
    adjacency: [u64; 64],
}

impl Default for BoardGraph {
    fn default() -> Self {
        BoardGraph {
            node_weights: BTreeMap::new(),
            edge_weights: BTreeMap::new(),
            adjacency: [0; 64],
        }
    }
}

fn bit(s: Square) -> u64 {
    1u64 << s.index()
}

/// Removes edges without a common neighbour until nothing changes.
fn triangle_fixed_point(edges: &mut BTreeMap<Edge, u64>) {
    let mut adj = [0u64; 64];
    for e in edges.keys() {
        adj[e.a.index()] |= bit(e.b);
        adj[e.b.index()] |= bit(e.a);
    }
    loop {
        let doomed: Vec<Edge> = edges
            .keys()
            .filter(|e| adj[e.a.index()] & adj[e.b.index()] == 0)
            .copied()
            .collect();
        if doomed.is_empty() {
            break;
        }
        for e in doomed {
            edges.remove(&e);
            adj[e.a.index()] &= !bit(e.b);
            adj[e.b.index()] &= !bit(e.a);
        }
    }
}

impl BoardGraph {
    /// Builds the filtered graph from (from, to) pairs.
    pub fn from_pairs(pairs: impl IntoIterator<Item = (Square, Square)>) -> BoardGraph {
        let mut touches: BTreeMap<Square, u64> = BTreeMap::new();
        let mut candidates: BTreeMap<Edge, u64> = BTreeMap::new();
        for (from, to) in pairs {
            *touches.entry(from).or_default() += 1;
            if from == to {
                continue;
            }
            *touches.entry(to).or_default() += 1;
            *candidates.entry(Edge::new(from, to)).or_default() += 1;
        }
        triangle_fixed_point(&mut candidates);
        Self::assemble(candidates, |s| touches.get(&s).copied().unwrap_or(0))
    }

    /// Assembles a graph from already-filtered edges without re-filtering.
    pub fn from_parts(node_weights: BTreeMap<Square, u64>, edges: BTreeMap<Edge, u64>) -> BoardGraph {
        let mut g = Self::assemble(edges, |s| node_weights.get(&s).copied().unwrap_or(0));
        for (s, w) in node_weights {
            g.node_weights.insert(s, w);
        }
        g
    }

    fn assemble(edges: BTreeMap<Edge, u64>, weight: impl Fn(Square) -> u64) -> BoardGraph {
        let mut g = BoardGraph::default();
        for e in edges.keys() {
            g.adjacency[e.a.index()] |= bit(e.b);
            g.adjacency[e.b.index()] |= bit(e.a);
            g.node_weights.insert(e.a, weight(e.a));
            g.node_weights.insert(e.b, weight(e.b));
        }
        g.edge_weights = edges;
        g
    }

    pub fn node_count(&self) -> usize {
        self.node_weights.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edge_weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.node_weights.is_empty()
    }

    pub fn nodes(&self) -> impl Iterator<Item = (Square, u64)> + '_ {
        self.node_weights.iter().map(|(s, w)| (*s, *w))
    }

    pub fn edges(&self) -> impl Iterator<Item = (Edge, u64)> + '_ {
        self.edge_weights.iter().map(|(e, w)| (*e, *w))
    }

    pub fn contains(&self, s: Square) -> bool {
        self.node_weights.contains_key(&s)
    }

    pub fn has_edge(&self, u: Square, v: Square) -> bool {
        self.adjacency[u.index()] & bit(v) != 0
    }

    pub fn edge_weight(&self, u: Square, v: Square) -> Option<u64> {
        self.edge_weights.get(&Edge::new(u, v)).copied()
    }

    pub fn degree(&self, s: Square) -> usize {
        self.adjacency[s.index()].count_ones() as usize
    }

    /// Neighbours in square order.
    pub fn neighbors(&self, s: Square) -> impl Iterator<Item = Square> + '_ {
        let mask = self.adjacency[s.index()];
        Square::all().filter(move |n| mask & bit(*n) != 0)
    }

    pub fn common_neighbors(&self, u: Square, v: Square) -> usize {
        (self.adjacency[u.index()] & self.adjacency[v.index()]).count_ones() as usize
    }

    /// True when every edge lies on at least one triangle.
    pub fn satisfies_triangle_condition(&self) -> bool {
        self.edge_weights.keys().all(|e| self.common_neighbors(e.a, e.b) > 0)
    }

    /// Runs the triangle filter over this graph's own edges.
    pub fn refiltered(&self) -> BoardGraph {
        let mut edges = self.edge_weights.clone();
        triangle_fixed_point(&mut edges);
        Self::assemble(edges, |s| self.node_weights.get(&s).copied().unwrap_or(0))
    }

    /// Whether `target` is reachable from `origin`.
    pub fn connected(&self, origin: Square, target: Square) -> bool {
        let mut seen = bit(origin);
        let mut frontier = bit(origin);
        while frontier != 0 {
            let mut next = 0u64;
            for s in Square::all().filter(|s| frontier & bit(*s) != 0) {
                next |= self.adjacency[s.index()];
            }
            frontier = next & !seen;
            seen |= next;
        }
        seen & bit(target) != 0
    }
}

/// Builds the graph from move records (from/to of every move).
pub fn build_graph<'a>(moves: impl IntoIterator<Item = &'a MoveRecord>) -> BoardGraph {
    BoardGraph::from_pairs(moves.into_iter().map(|m| (m.from, m.to)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chess::square_from_name;

    fn sq(s: &str) -> Square {
        square_from_name(s).unwrap()
    }

    fn pairs(list: &[(&str, &str)]) -> Vec<(Square, Square)> {
        list.iter().map(|(a, b)| (sq(a), sq(b))).collect()
    }

    #[test]
    fn open_path_has_no_triangle() {
        let g = BoardGraph::from_pairs(pairs(&[("a1", "b1"), ("b1", "c1")]));
        assert_eq!(g.edge_count(), 0);
        assert!(g.is_empty());
    }

    #[test]
    fn single_triangle_is_kept() {
        let g = BoardGraph::from_pairs(pairs(&[("a1", "b1"), ("b1", "c1"), ("a1", "c1")]));
        assert_eq!(g.edge_count(), 3);
        assert_eq!(g.node_count(), 3);
    }

    #[test]
    fn weights_sum_both_directions() {
        let g = BoardGraph::from_pairs(pairs(&[
            ("a1", "b1"),
            ("b1", "a1"),
            ("b1", "c1"),
            ("a1", "c1"),
        ]));
        assert_eq!(g.edge_weight(sq("b1"), sq("a1")), Some(2));
        assert_eq!(g.nodes().find(|(s, _)| *s == sq("a1")).unwrap().1, 3);
    }

    #[test]
    fn pendant_chain_is_dropped() {
        let g = BoardGraph::from_pairs(pairs(&[
            ("a1", "b1"),
            ("b1", "c1"),
            ("a1", "c1"),
            ("c1", "d1"),
            ("d1", "f1"),
        ]));
        assert_eq!(g.edge_count(), 3);
        assert!(g.satisfies_triangle_condition());
        assert_eq!(g.refiltered(), g);
    }

    #[test]
    fn self_loops_are_ignored() {
        let g = BoardGraph::from_pairs(pairs(&[("a1", "a1"), ("a1", "b1"), ("b1", "c1"), ("a1", "c1")]));
        assert!(!g.has_edge(sq("a1"), sq("a1")));
        assert_eq!(g.edge_count(), 3);
    }

    #[test]
    fn five_node_fixture() {
        // two triangles sharing b2, plus a dangling edge e5-a1
        let g = BoardGraph::from_pairs(pairs(&[
            ("a1", "b2"),
            ("b2", "c3"),
            ("a1", "c3"),
            ("b2", "d4"),
            ("d4", "c3"),
            ("e5", "a1"),
        ]));
        assert_eq!(g.node_count(), 4);
        assert_eq!(g.edge_count(), 5);
        assert!(!g.contains(sq("e5")));
        assert!(g.satisfies_triangle_condition());
        assert_eq!(g.refiltered(), g);
        assert!(g.connected(sq("a1"), sq("d4")));
    }
}
