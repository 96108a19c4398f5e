//! How closely a layout reproduces the physical board.

use thiserror::Error;

use super::{LayoutMap, Point};
use crate::chess::{board_distance, Square};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FidelityError {
    #[error("need at least {need} laid-out nodes, got {got}")]
    TooFewNodes { need: usize, got: usize },
    #[error("layout collapses every node onto one point")]
    Collapsed,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LayoutFidelity {
    /// Rank correlation of all-pairs layout distances vs board distances.
    pub spearman_rho: f64,
    /// Relative residual of the best similarity fit (0 = exact up to
    /// rotation, reflection, scale and translation).
    pub procrustes_residual: f64,
}

/// Average ranks (1-based), ties share the mean of their positions.
fn ranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut out = vec![0.0; values.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && values[order[j + 1]] == values[order[i]] {
            j += 1;
        }
        let avg = (i + j) as f64 / 2.0 + 1.0;
        for &k in &order[i..=j] {
            out[k] = avg;
        }
        i = j + 1;
    }
    out
}

fn pearson(x: &[f64], y: &[f64]) -> Option<f64> {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx).powi(2);
        syy += (b - my).powi(2);
    }
    (sxx > 0.0 && syy > 0.0).then(|| sxy / (sxx * syy).sqrt())
}

/// Spearman rank correlation; `None` when either side is constant.
pub fn spearman_rho(x: &[f64], y: &[f64]) -> Option<f64> {
    if x.len() != y.len() || x.len() < 2 {
        return None;
    }
    pearson(&ranks(x), &ranks(y))
}

/// Relative residual of the best similarity transform mapping `from` onto `to`.
fn procrustes(from: &[Point], to: &[Point]) -> Option<f64> {
    let n = from.len() as f64;
    let centroid = |ps: &[Point]| {
        let (sx, sy) = ps.iter().fold((0.0, 0.0), |(a, b), p| (a + p.x, b + p.y));
        Point::new(sx / n, sy / n)
    };
    let (cf, ct) = (centroid(from), centroid(to));
    let xs: Vec<Point> = from.iter().map(|p| Point::new(p.x - cf.x, p.y - cf.y)).collect();
    let ys: Vec<Point> = to.iter().map(|p| Point::new(p.x - ct.x, p.y - ct.y)).collect();
    let sxx: f64 = xs.iter().map(|p| p.x * p.x + p.y * p.y).sum();
    let syy: f64 = ys.iter().map(|p| p.x * p.x + p.y * p.y).sum();
    if sxx <= 0.0 || syy <= 0.0 {
        return None;
    }
    // best rotation gives sum(y . R x) = |(a, b)|; try with and without a reflection
    let fit = |flip: f64| {
        let (mut a, mut b) = (0.0, 0.0);
        for (x, y) in xs.iter().zip(&ys) {
            let (x1, x2) = (x.x, flip * x.y);
            a += x1 * y.x + x2 * y.y;
            b += x1 * y.y - x2 * y.x;
        }
        a.hypot(b)
    };
    let m = fit(1.0).max(fit(-1.0));
    let residual = (syy - m * m / sxx).max(0.0);
    Some((residual / syy).sqrt())
}

/// Compares a layout against true board coordinates.
pub fn layout_fidelity(layout: &LayoutMap) -> Result<LayoutFidelity, FidelityError> {
    let squares: Vec<Square> = layout.positions.keys().copied().collect();
    if squares.len() < 8 {
        return Err(FidelityError::TooFewNodes {
            need: 8,
            got: squares.len(),
        });
    }
    let placed: Vec<Point> = squares.iter().map(|s| layout.positions[s]).collect();
    let board: Vec<Point> = squares
        .iter()
        .map(|s| Point::new(f64::from(s.file()), f64::from(s.rank())))
        .collect();
    let mut layout_d = Vec::new();
    let mut board_d = Vec::new();
    for i in 0..squares.len() {
        for j in (i + 1)..squares.len() {
            layout_d.push(placed[i].dist(placed[j]));
            board_d.push(board_distance(squares[i], squares[j]));
        }
    }
    let spearman_rho = spearman_rho(&layout_d, &board_d).ok_or(FidelityError::Collapsed)?;
    let procrustes_residual = procrustes(&placed, &board).ok_or(FidelityError::Collapsed)?;
    Ok(LayoutFidelity {
        spearman_rho,
        procrustes_residual,
    })
}
