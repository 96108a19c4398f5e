//! Greedy navigation across a laid-out board graph.
//!
//! Both planners walk from the origin toward the target along the straight
//! line between their layout positions. A neighbour is eligible only if its
//! projection onto that line lies strictly past the current node's and no
//! further than the target's, so every walk makes progress and never revisits
//! a node. Coarse mode picks the eligible neighbour closest to the line;
//! granular mode also charges for the length of the step.

use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::chess::{board_distance, is_legal_geometry, pieces_capable, Color, MoveGeometry, PieceKind, Square};
use crate::graph::{BoardGraph, LayoutMap, Point};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PathMode {
    Coarse,
    Granular,
}

impl PathMode {
    pub fn name(self) -> &'static str {
        match self {
            PathMode::Coarse => "coarse",
            PathMode::Granular => "granular",
        }
    }

    pub fn from_name(s: &str) -> Option<PathMode> {
        match s.to_ascii_lowercase().as_str() {
            "coarse" => Some(PathMode::Coarse),
            "granular" => Some(PathMode::Granular),
            _ => None,
        }
    }
}

impl fmt::Display for PathMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PathQuery {
    pub origin: Square,
    pub target: Square,
    pub mode: PathMode,
    #[serde(default = "default_max_steps")]
    pub max_steps: u32,
}

fn default_max_steps() -> u32 {
    64
}

impl PathQuery {
    pub fn new(origin: Square, target: Square, mode: PathMode) -> PathQuery {
        PathQuery {
            origin,
            target,
            mode,
            max_steps: default_max_steps(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathStep {
    pub from: Square,
    pub to: Square,
    pub layout_length: f64,
    pub board_length: f64,
    pub pieces_capable: Vec<(PieceKind, Color)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathResult {
    pub nodes: Vec<Square>,
    pub steps: Vec<PathStep>,
    pub mode: PathMode,
    pub total_layout_length: f64,
}

impl PathResult {
    fn start(origin: Square, mode: PathMode) -> PathResult {
        PathResult {
            nodes: vec![origin],
            steps: Vec::new(),
            mode,
            total_layout_length: 0.0,
        }
    }

    fn push(&mut self, to: Square, layout_length: f64) {
        let from = *self.nodes.last().expect("path has an origin");
        self.steps.push(PathStep {
            from,
            to,
            layout_length,
            board_length: board_distance(from, to),
            pieces_capable: pieces_capable(from, to, false),
        });
        self.nodes.push(to);
        self.total_layout_length += layout_length;
    }

    pub fn mean_board_step(&self) -> f64 {
        if self.steps.is_empty() {
            return 0.0;
        }
        self.steps.iter().map(|s| s.board_length).sum::<f64>() / self.steps.len() as f64
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PathError {
    #[error("origin and target are the same square {0}")]
    SameSquare(Square),
    #[error("square {0} is not in the graph")]
    NotInGraph(Square),
    #[error("square {0} has no layout position")]
    NoPosition(Square),
    #[error("no neighbour of {} makes progress toward the target", .partial.nodes.last().unwrap())]
    NoProgress { partial: PathResult },
    #[error("step budget of {max_steps} exhausted")]
    StepBudgetExceeded { max_steps: u32, partial: PathResult },
}

impl PathError {
    /// Path walked before the planner stopped, when there is one.
    pub fn partial(&self) -> Option<&PathResult> {
        match self {
            PathError::NoProgress { partial } | PathError::StepBudgetExceeded { partial, .. } => Some(partial),
            _ => None,
        }
    }
}

/// Origin→target line in layout space.
struct Trajectory {
    origin: Point,
    dir: Point,
    len2: f64,
}

impl Trajectory {
    /// Scalar projection, 0 at the origin and 1 at the target.
    fn param(&self, p: Point) -> f64 {
        ((p.x - self.origin.x) * self.dir.x + (p.y - self.origin.y) * self.dir.y) / self.len2
    }

    fn foot(&self, p: Point) -> Point {
        let t = self.param(p);
        Point::new(self.origin.x + t * self.dir.x, self.origin.y + t * self.dir.y)
    }
}

fn position(layout: &LayoutMap, s: Square) -> Result<Point, PathError> {
    layout.position(s).ok_or(PathError::NoPosition(s))
}

fn walk(graph: &BoardGraph, layout: &LayoutMap, q: &PathQuery) -> Result<PathResult, PathError> {
    if q.origin == q.target {
        return Err(PathError::SameSquare(q.origin));
    }
    for s in [q.origin, q.target] {
        if !graph.contains(s) {
            return Err(PathError::NotInGraph(s));
        }
    }
    let start = position(layout, q.origin)?;
    let end = position(layout, q.target)?;
    let line = Trajectory {
        origin: start,
        dir: Point::new(end.x - start.x, end.y - start.y),
        len2: (end.x - start.x).powi(2) + (end.y - start.y).powi(2),
    };
    if line.len2 == 0.0 {
        return Err(PathError::NoProgress {
            partial: PathResult::start(q.origin, q.mode),
        });
    }

    let mut path = PathResult::start(q.origin, q.mode);
    let mut current = q.origin;
    while current != q.target {
        if path.steps.len() as u32 >= q.max_steps {
            return Err(PathError::StepBudgetExceeded {
                max_steps: q.max_steps,
                partial: path,
            });
        }
        let here = position(layout, current)?;
        if graph.has_edge(current, q.target) {
            path.push(q.target, here.dist(end));
            break;
        }
        let t_here = line.param(here);
        let mut best: Option<(f64, Square, f64)> = None;
        for n in graph.neighbors(current) {
            let p = position(layout, n)?;
            let t = line.param(p);
            if t <= t_here || t > 1.0 {
                continue;
            }
            let off_line = p.dist(line.foot(p));
            let step = here.dist(p);
            let score = match q.mode {
                PathMode::Coarse => off_line,
                PathMode::Granular => step.hypot(off_line),
            };
            let better = match best {
                None => true,
                Some((b, s, _)) => match score.total_cmp(&b) {
                    Ordering::Less => true,
                    Ordering::Equal => n.name() < s.name(),
                    Ordering::Greater => false,
                },
            };
            if better {
                best = Some((score, n, step));
            }
        }
        let Some((_, next, step)) = best else {
            return Err(PathError::NoProgress { partial: path });
        };
        path.push(next, step);
        current = next;
    }
    Ok(path)
}

/// Few-jump walk hugging the origin→target line.
pub fn coarse_path(graph: &BoardGraph, layout: &LayoutMap, q: &PathQuery) -> Result<PathResult, PathError> {
    walk(graph, layout, &PathQuery { mode: PathMode::Coarse, ..*q })
}

/// Short-step walk: minimises sqrt(step² + off-line²) at each node.
pub fn granular_path(graph: &BoardGraph, layout: &LayoutMap, q: &PathQuery) -> Result<PathResult, PathError> {
    walk(graph, layout, &PathQuery { mode: PathMode::Granular, ..*q })
}

/// Dispatches on `q.mode`.
pub fn plan_path(graph: &BoardGraph, layout: &LayoutMap, q: &PathQuery) -> Result<PathResult, PathError> {
    walk(graph, layout, q)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepClass {
    pub from: Square,
    pub to: Square,
    pub pieces: Vec<(PieceKind, Color)>,
    /// No piece can make this step.
    pub flagged: bool,
}

/// Which pieces could make each step of the path (non-capturing).
pub fn classify_path(p: &PathResult) -> Vec<StepClass> {
    p.steps
        .iter()
        .map(|s| {
            let pieces: Vec<(PieceKind, Color)> = pieces_capable(s.from, s.to, false)
                .into_iter()
                .filter(|(piece, color)| is_legal_geometry(&MoveGeometry::plain(*piece, *color, s.from, s.to, false)))
                .collect();
            StepClass {
                from: s.from,
                to: s.to,
                flagged: pieces.is_empty(),
                pieces,
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chess::square_from_name as sq;
    use crate::graph::Edge;
    use std::collections::BTreeMap;

    fn graph_of(edges: &[(&str, &str)]) -> BoardGraph {
        let e: BTreeMap<Edge, u64> = edges.iter().map(|(a, b)| (Edge::new(sq(a).unwrap(), sq(b).unwrap()), 1)).collect();
        BoardGraph::from_parts(BTreeMap::new(), e)
    }

    fn board_layout(g: &BoardGraph) -> LayoutMap {
        let nodes: Vec<Square> = g.nodes().map(|(s, _)| s).collect();
        LayoutMap::from_board(&nodes)
    }

    #[test]
    fn complete_graph_follows_the_diagonal() {
        let all: Vec<Square> = Square::all().collect();
        let mut e = BTreeMap::new();
        for (i, a) in all.iter().enumerate() {
            for b in &all[i + 1..] {
                if *a != sq("a1").unwrap() || *b != sq("h8").unwrap() {
                    e.insert(Edge::new(*a, *b), 1);
                }
            }
        }
        let g = BoardGraph::from_parts(BTreeMap::new(), e);
        let l = board_layout(&g);
        let q = PathQuery::new(sq("a1").unwrap(), sq("h8").unwrap(), PathMode::Coarse);
        let p = coarse_path(&g, &l, &q).unwrap();
        assert!(p.nodes.iter().all(|s| s.file() == s.rank()), "{:?}", p.nodes);
        let g = granular_path(&g, &l, &q).unwrap();
        assert_eq!(g.nodes.last(), Some(&sq("h8").unwrap()));
    }

    #[test]
    fn unit_steps_agree_across_modes() {
        let mut e = BTreeMap::new();
        for s in Square::all() {
            for (df, dr) in [(1, 0), (0, 1)] {
                if let Some(n) = s.offset(df, dr) {
                    e.insert(Edge::new(s, n), 1);
                }
            }
        }
        let g = BoardGraph::from_parts(BTreeMap::new(), e);
        let l = board_layout(&g);
        for (a, b) in [("a1", "h8"), ("a8", "h1"), ("c2", "f7"), ("h3", "a5")] {
            let q = PathQuery::new(sq(a).unwrap(), sq(b).unwrap(), PathMode::Coarse);
            let c = coarse_path(&g, &l, &q).unwrap();
            assert_eq!(c.nodes, granular_path(&g, &l, &q).unwrap().nodes);
            assert!(c.steps.iter().all(|s| s.board_length == 1.0));
        }
    }

    #[test]
    fn two_nodes_single_step() {
        let g = graph_of(&[("a1", "c1")]);
        let l = board_layout(&g);
        for mode in [PathMode::Coarse, PathMode::Granular] {
            let p = plan_path(&g, &l, &PathQuery::new(sq("a1").unwrap(), sq("c1").unwrap(), mode)).unwrap();
            assert_eq!(p.nodes.len(), 2);
            assert_eq!(p.mode, mode);
            assert!((p.total_layout_length - 2.0).abs() < 1e-12);
        }
    }

    #[test]
    fn tie_breaks_on_square_name() {
        // a2 and b1 mirror each other about the a1-c3 line
        let g = graph_of(&[("a1", "b2"), ("a1", "a2"), ("a1", "b1"), ("a2", "c3"), ("b1", "c3"), ("b2", "d4"), ("d4", "c3")]);
        let l = board_layout(&g);
        let mut l2 = l.clone();
        // move b2 off the line so a2 and b1 are the only equal best choices
        l2.positions.insert(sq("b2").unwrap(), Point::new(3.0, 0.5));
        let q = PathQuery::new(sq("a1").unwrap(), sq("c3").unwrap(), PathMode::Coarse);
        let p = coarse_path(&g, &l2, &q).unwrap();
        assert_eq!(p.nodes[1], sq("a2").unwrap());
    }

    #[test]
    fn target_neighbour_is_taken() {
        let g = graph_of(&[("a1", "h1"), ("a1", "b1"), ("b1", "h1")]);
        let l = board_layout(&g);
        let p = coarse_path(&g, &l, &PathQuery::new(sq("a1").unwrap(), sq("h1").unwrap(), PathMode::Coarse)).unwrap();
        assert_eq!(p.nodes.len(), 2);
    }

    #[test]
    fn no_progress_reports_partial_path() {
        let g = graph_of(&[("d4", "c3"), ("c3", "c4"), ("d4", "c4"), ("h8", "g8"), ("g8", "g7"), ("h8", "g7")]);
        let l = board_layout(&g);
        let err = coarse_path(&g, &l, &PathQuery::new(sq("d4").unwrap(), sq("h8").unwrap(), PathMode::Coarse)).unwrap_err();
        assert!(matches!(err, PathError::NoProgress { .. }));
        assert_eq!(err.partial().unwrap().nodes, vec![sq("d4").unwrap()]);
    }

    #[test]
    fn budget_is_enforced() {
        let g = graph_of(&[("a1", "b1"), ("b1", "c1"), ("c1", "d1"), ("a1", "c1"), ("b1", "d1")]);
        let l = board_layout(&g);
        let mut q = PathQuery::new(sq("a1").unwrap(), sq("d1").unwrap(), PathMode::Granular);
        q.max_steps = 1;
        assert!(matches!(granular_path(&g, &l, &q), Err(PathError::StepBudgetExceeded { .. })));
        q.max_steps = 2;
        assert_eq!(granular_path(&g, &l, &q).unwrap().nodes.len(), 3);
    }

    #[test]
    fn invalid_queries() {
        let g = graph_of(&[("a1", "b1"), ("b1", "c1"), ("a1", "c1")]);
        let l = board_layout(&g);
        let a1 = sq("a1").unwrap();
        assert_eq!(coarse_path(&g, &l, &PathQuery::new(a1, a1, PathMode::Coarse)), Err(PathError::SameSquare(a1)));
        let h8 = sq("h8").unwrap();
        assert_eq!(coarse_path(&g, &l, &PathQuery::new(a1, h8, PathMode::Coarse)), Err(PathError::NotInGraph(h8)));
    }

    #[test]
    fn classification() {
        let mut p = PathResult::start(sq("a1").unwrap(), PathMode::Coarse);
        p.push(sq("c1").unwrap(), 2.0);
        p.push(sq("b3").unwrap(), 2.2);
        let c = classify_path(&p);
        let kinds = |i: usize| {
            let mut k: Vec<PieceKind> = c[i].pieces.iter().map(|(k, _)| *k).collect();
            k.dedup();
            k
        };
        assert_eq!(kinds(0), vec![PieceKind::Rook, PieceKind::Queen]);
        assert_eq!(kinds(1), vec![PieceKind::Knight]);
        assert!(!c.iter().any(|s| s.flagged));
    }

    #[test]
    fn query_json() {
        let q: PathQuery = serde_json::from_str(r#"{"origin":"a1","target":"h8","mode":"granular"}"#).unwrap();
        assert_eq!(q.max_steps, 64);
        assert_eq!(q.mode, PathMode::Granular);
    }
}
