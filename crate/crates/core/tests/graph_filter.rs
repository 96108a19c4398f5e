use std::collections::{BTreeMap, BTreeSet};

use boardmap_core::graph::{build_graph, BoardGraph};
use boardmap_core::selfplay::{simulate_corpus, SelfPlayConfig};
use boardmap_core::{square_from_name, Square};
use proptest::prelude::*;

type Pair = (Square, Square);

/// Repeatedly drops the first edge whose endpoints share no neighbour.
fn naive_filter(pairs: &[Pair]) -> BTreeSet<Pair> {
    let mut edges: BTreeSet<Pair> = pairs.iter().filter(|(a, b)| a != b).map(|&(a, b)| (a.min(b), a.max(b))).collect();
    loop {
        let nbrs = |s: Square, edges: &BTreeSet<Pair>| -> BTreeSet<Square> {
            edges
                .iter()
                .filter_map(|&(a, b)| if a == s { Some(b) } else if b == s { Some(a) } else { None })
                .collect()
        };
        let bad = edges.iter().copied().find(|&(a, b)| nbrs(a, &edges).is_disjoint(&nbrs(b, &edges)));
        match bad {
            Some(e) => {
                edges.remove(&e);
            }
            None => return edges,
        }
    }
}

fn edge_set(g: &BoardGraph) -> BTreeSet<Pair> {
    g.edges().map(|(e, _)| (e.a.min(e.b), e.a.max(e.b))).collect()
}

fn sq(s: &str) -> Square {
    square_from_name(s).unwrap()
}

#[test]
fn five_node_fixture() {
    // a1-b2-c3 and b2-c3-d4 are triangles; d4-e5 and e5-f6 hang off them
    let pairs: Vec<Pair> = [("a1", "b2"), ("b2", "c3"), ("c3", "a1"), ("b2", "d4"), ("c3", "d4"), ("d4", "e5"), ("b2", "a1")]
        .iter()
        .map(|(a, b)| (sq(a), sq(b)))
        .collect();
    let g = BoardGraph::from_pairs(pairs.iter().copied());
    let expected: BTreeSet<Pair> = [("a1", "b2"), ("b2", "c3"), ("a1", "c3"), ("b2", "d4"), ("c3", "d4")]
        .iter()
        .map(|(a, b)| (sq(a).min(sq(b)), sq(a).max(sq(b))))
        .collect();
    assert_eq!(edge_set(&g), expected);
    assert_eq!(edge_set(&g), naive_filter(&pairs));
    assert!(!g.contains(sq("e5")));
    assert_eq!(g.edge_weight(sq("a1"), sq("b2")), Some(2));
    assert!(g.satisfies_triangle_condition());
    for (e, _) in g.edges() {
        assert!(g.common_neighbors(e.a, e.b) >= 1);
    }
    assert_eq!(g.refiltered(), g);
}

#[test]
fn full_corpus_graph() {
    let games = simulate_corpus(20_000, 2, &SelfPlayConfig::default());
    let moves: Vec<_> = games.iter().flat_map(|g| g.moves.iter()).collect();
    let g = build_graph(moves.iter().copied());
    assert_eq!(g.node_count(), 64);
    assert!(g.satisfies_triangle_condition());
    for (e, _) in g.edges() {
        assert!(g.common_neighbors(e.a, e.b) >= 1, "{}-{}", e.a, e.b);
    }
    assert_eq!(g.refiltered(), g);
    let pairs: Vec<Pair> = moves.iter().map(|m| (m.from, m.to)).collect();
    assert_eq!(edge_set(&g), naive_filter(&pairs));

    let mut weights: BTreeMap<Pair, u64> = BTreeMap::new();
    for &(a, b) in &pairs {
        *weights.entry((a.min(b), a.max(b))).or_default() += 1;
    }
    for (e, w) in g.edges() {
        assert_eq!(w, weights[&(e.a.min(e.b), e.a.max(e.b))]);
    }
}

fn square() -> impl Strategy<Value = Square> {
    // a 4x4 corner keeps random graphs dense enough to hold triangles
    (0u8..4, 0u8..4).prop_map(|(f, r)| Square::new(f, r).unwrap())
}

proptest! {
    #[test]
    fn filter_matches_naive_removal(pairs in prop::collection::vec((square(), square()), 0..60)) {
        let g = BoardGraph::from_pairs(pairs.iter().copied());
        prop_assert_eq!(edge_set(&g), naive_filter(&pairs));
        prop_assert!(g.satisfies_triangle_condition());
        prop_assert_eq!(g.refiltered(), g);
    }

    #[test]
    fn order_of_moves_does_not_matter(mut pairs in prop::collection::vec((square(), square()), 0..40)) {
        let g = BoardGraph::from_pairs(pairs.iter().copied());
        pairs.reverse();
        prop_assert_eq!(BoardGraph::from_pairs(pairs.iter().copied()), g);
    }
}
