//! Force-directed layout in the ForceAtlas2 family: linear attraction along
//! edges, degree-weighted repulsion between every pair, and a weak constant
//! pull toward the origin. All-pairs repulsion is exact (64 nodes at most).

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::BoardGraph;
use crate::chess::Square;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub fn new(x: f64, y: f64) -> Point {
        Point { x, y }
    }

    pub fn dist(self, other: Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LayoutParams {
    pub iterations: u32,
    /// Repulsion coefficient (k_r).
    pub repulsion: f64,
    /// Attraction coefficient.
    pub attraction: f64,
    pub gravity: f64,
    /// Scale attraction by edge weight.
    pub weighted_attraction: bool,
    /// Step size of the first iteration; decays linearly to `final_step`.
    pub initial_step: f64,
    pub final_step: f64,
}

impl Default for LayoutParams {
    fn default() -> Self {
        LayoutParams {
            iterations: 1000,
            repulsion: 10.0,
            attraction: 1.0,
            gravity: 0.5,
            weighted_attraction: false,
            initial_step: 0.5,
            final_step: 0.01,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayoutMap {
    pub positions: BTreeMap<Square, Point>,
    pub params: LayoutParams,
    pub seed: u64,
}

impl LayoutMap {
    pub fn position(&self, s: Square) -> Option<Point> {
        self.positions.get(&s).copied()
    }

    /// Layout made directly from board coordinates.
    pub fn from_board<'a>(squares: impl IntoIterator<Item = &'a Square>) -> LayoutMap {
        LayoutMap {
            positions: squares
                .into_iter()
                .map(|s| (*s, Point::new(f64::from(s.file()), f64::from(s.rank()))))
                .collect(),
            params: LayoutParams::default(),
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LayoutError {
    #[error("graph has no edges to lay out")]
    DegenerateGraph,
}

/// Lays out the graph. Runs a fixed number of iterations; identical
/// (graph, params, seed) always give identical positions.
pub fn force_layout(g: &BoardGraph, params: &LayoutParams, seed: u64) -> Result<LayoutMap, LayoutError> {
    if g.edge_count() == 0 {
        return Err(LayoutError::DegenerateGraph);
    }
    let nodes: Vec<Square> = g.nodes().map(|(s, _)| s).collect();
    let n = nodes.len();
    let index: BTreeMap<Square, usize> = nodes.iter().enumerate().map(|(i, s)| (*s, i)).collect();
    let mass: Vec<f64> = nodes.iter().map(|s| g.degree(*s) as f64 + 1.0).collect();
    // weighted attraction uses weights relative to the mean so step sizes stay comparable
    let mean_weight = g.edges().map(|(_, w)| w as f64).sum::<f64>() / g.edge_count() as f64;
    let edges: Vec<(usize, usize, f64)> = g
        .edges()
        .map(|(e, w)| {
            let w = if params.weighted_attraction { w as f64 / mean_weight } else { 1.0 };
            (index[&e.a], index[&e.b], w)
        })
        .collect();

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let radius = (params.repulsion * n as f64).sqrt().max(1.0);
    let mut pos: Vec<[f64; 2]> = (0..n)
        .map(|_| {
            let theta = rng.random::<f64>() * std::f64::consts::TAU;
            [radius * theta.cos(), radius * theta.sin()]
        })
        .collect();

    let mut force = vec![[0.0f64; 2]; n];
    let iters = params.iterations.max(1);
    for t in 0..iters {
        force.iter_mut().for_each(|f| *f = [0.0, 0.0]);
        for u in 0..n {
            for v in (u + 1)..n {
                let dx = pos[u][0] - pos[v][0];
                let dy = pos[u][1] - pos[v][1];
                let d2 = (dx * dx + dy * dy).max(1e-9);
                // magnitude k_r * m_u * m_v / d along the unit vector
                let f = params.repulsion * mass[u] * mass[v] / d2;
                force[u][0] += dx * f;
                force[u][1] += dy * f;
                force[v][0] -= dx * f;
                force[v][1] -= dy * f;
            }
        }
        for &(u, v, w) in &edges {
            let dx = pos[u][0] - pos[v][0];
            let dy = pos[u][1] - pos[v][1];
            // magnitude attraction * w * d
            let f = params.attraction * w;
            force[u][0] -= dx * f;
            force[u][1] -= dy * f;
            force[v][0] += dx * f;
            force[v][1] += dy * f;
        }
        for u in 0..n {
            let d = pos[u][0].hypot(pos[u][1]);
            if d > 1e-9 {
                let f = params.gravity * mass[u] / d;
                force[u][0] -= pos[u][0] * f;
                force[u][1] -= pos[u][1] * f;
            }
        }
        let frac = f64::from(t) / f64::from(iters);
        let step = params.initial_step + (params.final_step - params.initial_step) * frac;
        for u in 0..n {
            pos[u][0] += step * force[u][0] / mass[u];
            pos[u][1] += step * force[u][1] / mass[u];
        }
    }

    Ok(LayoutMap {
        positions: nodes
            .iter()
            .zip(pos)
            .map(|(s, p)| (*s, Point::new(p[0], p[1])))
            .collect(),
        params: params.clone(),
        seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chess::square_from_name as sq;

    fn triangle() -> BoardGraph {
        let p = |a: &str, b: &str| (sq(a).unwrap(), sq(b).unwrap());
        BoardGraph::from_pairs([p("a1", "b1"), p("b1", "c1"), p("a1", "c1")])
    }

    #[test]
    fn empty_graph_is_degenerate() {
        assert_eq!(
            force_layout(&BoardGraph::default(), &LayoutParams::default(), 1),
            Err(LayoutError::DegenerateGraph)
        );
    }

    #[test]
    fn deterministic_and_finite() {
        let g = triangle();
        let a = force_layout(&g, &LayoutParams::default(), 42).unwrap();
        let b = force_layout(&g, &LayoutParams::default(), 42).unwrap();
        assert_eq!(a, b);
        assert!(a.positions.values().all(|p| p.x.is_finite() && p.y.is_finite()));
        let c = force_layout(&g, &LayoutParams::default(), 43).unwrap();
        assert_ne!(a.positions, c.positions);
    }

    #[test]
    fn two_body_equilibrium() {
        // Two linked nodes (degree 1, mass 2). Along the line joining them, per
        // node: repulsion 4 k_r / d outward, attraction d inward, gravity 2 k_g
        // inward, so d^2 + 2 k_g d - 4 k_r = 0.
        let mut edges = BTreeMap::new();
        edges.insert(super::super::Edge::new(sq("d4").unwrap(), sq("e4").unwrap()), 1);
        let g = BoardGraph::from_parts(BTreeMap::new(), edges);
        let params = LayoutParams::default();
        let (kr, kg) = (params.repulsion, params.gravity);
        let expected = -kg + (kg * kg + 4.0 * kr).sqrt();
        let net = |d: f64| 4.0 * kr / d - d - 2.0 * kg;
        // bracketing: net force pushes apart below, pulls together above
        assert!(net(expected * 0.99) > 0.0 && net(expected * 1.01) < 0.0);
        for seed in 0..5 {
            let layout = force_layout(&g, &params, seed).unwrap();
            let d = layout.position(sq("d4").unwrap()).unwrap().dist(layout.position(sq("e4").unwrap()).unwrap());
            assert!(
                (d - expected).abs() < 1e-3 * expected,
                "seed {seed}: separation {d}, expected {expected}"
            );
        }
    }
}
