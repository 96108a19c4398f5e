//! Piece tables, legality tables, the two significance tests, ablation
//! summaries and column-occupancy histograms.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF, StudentsT};
use thiserror::Error;

use crate::chess::{PieceKind, Square};
use crate::record::MoveRecord;
use crate::store::{MoveFilter, MoveStore, StoreError};
use crate::wayfinder::PathResult;

/// Row order of the published tables.
pub const TABLE_ORDER: [PieceKind; 6] = [
    PieceKind::Pawn,
    PieceKind::Rook,
    PieceKind::Bishop,
    PieceKind::Knight,
    PieceKind::Queen,
    PieceKind::King,
];

#[derive(Debug, Error)]
pub enum StatsError {
    #[error("degenerate input: {0}")]
    DegenerateInput(&'static str),
    #[error(transparent)]
    Store(#[from] StoreError),
    #[error("no tags given")]
    NoTags,
}

/// Move counts by piece for one corpus. Arrays follow `TABLE_ORDER`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PieceTable {
    pub label: String,
    pub counts: [u64; 6],
    pub total: u64,
}

fn row(p: PieceKind) -> usize {
    TABLE_ORDER.iter().position(|&q| q == p).expect("every piece has a row")
}

fn pct(n: u64, d: u64) -> f64 {
    if d == 0 {
        0.0
    } else {
        100.0 * n as f64 / d as f64
    }
}

impl PieceTable {
    pub fn from_moves<'a>(label: &str, moves: impl IntoIterator<Item = &'a MoveRecord>) -> PieceTable {
        let mut counts = [0u64; 6];
        for m in moves {
            counts[row(m.piece)] += 1;
        }
        PieceTable {
            label: label.to_owned(),
            counts,
            total: counts.iter().sum(),
        }
    }

    pub fn from_counts(label: &str, counts: [u64; 6]) -> PieceTable {
        PieceTable {
            label: label.to_owned(),
            counts,
            total: counts.iter().sum(),
        }
    }

    pub fn percents(&self) -> [f64; 6] {
        self.counts.map(|c| pct(c, self.total))
    }

    pub fn count(&self, p: PieceKind) -> u64 {
        self.counts[row(p)]
    }

    pub fn percent(&self, p: PieceKind) -> f64 {
        pct(self.count(p), self.total)
    }
}

pub fn piece_table(store: &MoveStore, tag: &str) -> Result<PieceTable, StatsError> {
    let mut counts = [0u64; 6];
    for m in store.query(tag, &MoveFilter::default())? {
        counts[row(m?.record.piece)] += 1;
    }
    Ok(PieceTable::from_counts(tag, counts))
}

fn group(n: u64) -> String {
    let s = n.to_string();
    let mut out = String::new();
    for (i, c) in s.chars().enumerate() {
        if i > 0 && (s.len() - i).is_multiple_of(3) {
            out.push(',');
        }
        out.push(c);
    }
    out
}

fn render_grid(header: &[String], rows: &[Vec<String>]) -> String {
    let cols = header.len();
    let width: Vec<usize> = (0..cols)
        .map(|c| rows.iter().map(|r| r[c].len()).chain([header[c].len()]).max().unwrap_or(0))
        .collect();
    let mut out = String::new();
    let line = |cells: &[String], out: &mut String| {
        for (c, cell) in cells.iter().enumerate() {
            if c == 0 {
                let _ = write!(out, "{cell:<w$}", w = width[0]);
            } else {
                let _ = write!(out, "  {cell:>w$}", w = width[c]);
            }
        }
        out.push('\n');
    };
    line(header, &mut out);
    out.push_str(&"-".repeat(width.iter().sum::<usize>() + 2 * (cols - 1)));
    out.push('\n');
    for (i, r) in rows.iter().enumerate() {
        if i == rows.len() - 1 {
            out.push_str(&"-".repeat(width.iter().sum::<usize>() + 2 * (cols - 1)));
            out.push('\n');
        }
        line(r, &mut out);
    }
    out
}

/// Counts then percentages, one column per corpus, with a totals row.
pub fn piece_tables_text(tables: &[PieceTable]) -> String {
    let mut header = vec![String::new()];
    header.extend(tables.iter().map(|t| format!("{} count", t.label)));
    header.extend(tables.iter().map(|t| format!("{} %", t.label)));
    let mut rows: Vec<Vec<String>> = TABLE_ORDER
        .iter()
        .enumerate()
        .map(|(i, p)| {
            let mut r = vec![p.table_label().to_owned()];
            r.extend(tables.iter().map(|t| group(t.counts[i])));
            r.extend(tables.iter().map(|t| format!("{:.1}%", t.percents()[i])));
            r
        })
        .collect();
    let mut totals = vec!["Totals".to_owned()];
    totals.extend(tables.iter().map(|t| group(t.total)));
    totals.extend(tables.iter().map(|t| format!("{:.1}%", t.percents().iter().sum::<f64>())));
    rows.push(totals);
    render_grid(&header, &rows)
}

pub fn piece_tables_csv(tables: &[PieceTable]) -> String {
    let mut out = String::from("tag,piece,count,percent\n");
    for t in tables {
        let p = t.percents();
        for (i, piece) in TABLE_ORDER.iter().enumerate() {
            let _ = writeln!(out, "{},{},{},{:.4}", t.label, piece.name(), t.counts[i], p[i]);
        }
        let _ = writeln!(out, "{},total,{},{:.4}", t.label, t.total, p.iter().sum::<f64>());
    }
    out
}

/// Illegal and total counts by piece for one corpus.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LegalityTable {
    pub label: String,
    pub illegal: [u64; 6],
    pub total: [u64; 6],
}

impl LegalityTable {
    pub fn from_flags<I: IntoIterator<Item = (PieceKind, bool)>>(label: &str, moves: I) -> LegalityTable {
        let mut t = LegalityTable {
            label: label.to_owned(),
            illegal: [0; 6],
            total: [0; 6],
        };
        for (piece, legal) in moves {
            t.total[row(piece)] += 1;
            if !legal {
                t.illegal[row(piece)] += 1;
            }
        }
        t
    }

    pub fn percents(&self) -> [f64; 6] {
        std::array::from_fn(|i| pct(self.illegal[i], self.total[i]))
    }

    pub fn total_illegal(&self) -> u64 {
        self.illegal.iter().sum()
    }

    pub fn total_moves(&self) -> u64 {
        self.total.iter().sum()
    }

    /// Pooled illegal percentage over all moves.
    pub fn total_percent(&self) -> f64 {
        pct(self.total_illegal(), self.total_moves())
    }

    /// Unweighted mean of the per-piece percentages.
    pub fn average_percent(&self) -> f64 {
        self.percents().iter().sum::<f64>() / 6.0
    }

    pub fn text(&self) -> String {
        let header = ["", "Illegal", "Total", "Percent"].map(String::from);
        let p = self.percents();
        let mut rows: Vec<Vec<String>> = TABLE_ORDER
            .iter()
            .enumerate()
            .map(|(i, piece)| {
                vec![
                    piece.table_label().to_owned(),
                    group(self.illegal[i]),
                    group(self.total[i]),
                    format!("{:.2}%", p[i]),
                ]
            })
            .collect();
        rows.push(vec![
            "Totals".to_owned(),
            group(self.total_illegal()),
            group(self.total_moves()),
            format!("{:.2}%", self.total_percent()),
        ]);
        render_grid(&header, &rows)
    }

    pub fn csv(&self) -> String {
        let mut out = String::from("tag,piece,illegal,total,percent\n");
        let p = self.percents();
        for (i, piece) in TABLE_ORDER.iter().enumerate() {
            let _ = writeln!(out, "{},{},{},{},{:.4}", self.label, piece.name(), self.illegal[i], self.total[i], p[i]);
        }
        let _ = writeln!(
            out,
            "{},total,{},{},{:.4}",
            self.label,
            self.total_illegal(),
            self.total_moves(),
            self.total_percent()
        );
        out
    }
}

pub fn legality_table(store: &MoveStore, tag: &str) -> Result<LegalityTable, StatsError> {
    let flags: Vec<(PieceKind, bool)> = store
        .query(tag, &MoveFilter::default())?
        .map(|m| m.map(|m| (m.record.piece, m.legal)))
        .collect::<Result<_, _>>()?;
    Ok(LegalityTable::from_flags(tag, flags))
}

/// Per-piece illegal percentages for several corpora, left to right.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AblationSummary {
    pub tables: Vec<LegalityTable>,
}

impl AblationSummary {
    pub fn averages(&self) -> Vec<f64> {
        self.tables.iter().map(LegalityTable::average_percent).collect()
    }

    pub fn text(&self) -> String {
        let mut header = vec![String::new()];
        header.extend(self.tables.iter().map(|t| t.label.clone()));
        let mut rows: Vec<Vec<String>> = TABLE_ORDER
            .iter()
            .enumerate()
            .map(|(i, p)| {
                let mut r = vec![p.table_label().to_owned()];
                r.extend(self.tables.iter().map(|t| format!("{:.2}%", t.percents()[i])));
                r
            })
            .collect();
        let mut avg = vec!["Average".to_owned()];
        avg.extend(self.averages().iter().map(|a| format!("{a:.2}%")));
        rows.push(avg);
        render_grid(&header, &rows)
    }

    pub fn csv(&self) -> String {
        let mut out = String::from("tag,piece,percent\n");
        for t in &self.tables {
            for (i, piece) in TABLE_ORDER.iter().enumerate() {
                let _ = writeln!(out, "{},{},{:.4}", t.label, piece.name(), t.percents()[i]);
            }
            let _ = writeln!(out, "{},average,{:.4}", t.label, t.average_percent());
        }
        out
    }
}

pub fn ablation_summary(store: &MoveStore, tags: &[&str]) -> Result<AblationSummary, StatsError> {
    if tags.is_empty() {
        return Err(StatsError::NoTags);
    }
    Ok(AblationSummary {
        tables: tags.iter().map(|t| legality_table(store, t)).collect::<Result<_, _>>()?,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Correlation {
    pub r: f64,
    /// Two-tailed, from Student's t with n - 2 degrees of freedom.
    pub p: f64,
}

pub fn pearson_r(x: &[f64], y: &[f64]) -> Result<Correlation, StatsError> {
    if x.len() != y.len() {
        return Err(StatsError::DegenerateInput("vectors differ in length"));
    }
    let n = x.len();
    if n < 3 {
        return Err(StatsError::DegenerateInput("need at least three pairs"));
    }
    let mean = |v: &[f64]| v.iter().sum::<f64>() / n as f64;
    let (mx, my) = (mean(x), mean(y));
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(StatsError::DegenerateInput("constant vector"));
    }
    let r = (sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0);
    let dof = (n - 2) as f64;
    let p = if r.abs() >= 1.0 - 1e-15 {
        0.0
    } else {
        let t = r * (dof / (1.0 - r * r)).sqrt();
        let dist = StudentsT::new(0.0, 1.0, dof).expect("dof is positive");
        (2.0 * dist.sf(t.abs())).min(1.0)
    };
    Ok(Correlation { r, p })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChiSquare {
    pub statistic: f64,
    pub dof: usize,
    pub p: f64,
}

/// Pearson's test of independence on an r × c table of counts.
pub fn chi_square_independence(table: &[Vec<f64>]) -> Result<ChiSquare, StatsError> {
    let rows = table.len();
    let cols = table.first().map_or(0, Vec::len);
    if rows < 2 || cols < 2 || table.iter().any(|r| r.len() != cols) {
        return Err(StatsError::DegenerateInput("need a rectangular table of at least 2 x 2"));
    }
    if table.iter().flatten().any(|v| *v < 0.0 || !v.is_finite()) {
        return Err(StatsError::DegenerateInput("counts must be finite and non-negative"));
    }
    let row_sums: Vec<f64> = table.iter().map(|r| r.iter().sum()).collect();
    let col_sums: Vec<f64> = (0..cols).map(|c| table.iter().map(|r| r[c]).sum()).collect();
    let total: f64 = row_sums.iter().sum();
    if row_sums.iter().chain(&col_sums).any(|s| *s == 0.0) {
        return Err(StatsError::DegenerateInput("zero marginal"));
    }
    let mut statistic = 0.0;
    for (i, r) in table.iter().enumerate() {
        for (j, o) in r.iter().enumerate() {
            let e = row_sums[i] * col_sums[j] / total;
            statistic += (o - e) * (o - e) / e;
        }
    }
    let dof = (rows - 1) * (cols - 1);
    let p = ChiSquared::new(dof as f64).expect("dof is positive").sf(statistic);
    Ok(ChiSquare { statistic, dof, p })
}

/// Counts per board file, a through h.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ColumnOccupancy {
    pub counts: [u64; 8],
}

impl ColumnOccupancy {
    pub fn from_squares(squares: impl IntoIterator<Item = Square>) -> ColumnOccupancy {
        let mut counts = [0u64; 8];
        for s in squares {
            counts[s.file() as usize] += 1;
        }
        ColumnOccupancy { counts }
    }

    /// Files c through f.
    pub fn center_mass(&self) -> u64 {
        self.counts[2..6].iter().sum()
    }

    /// Files a, b, g and h.
    pub fn edge_mass(&self) -> u64 {
        self.counts[..2].iter().chain(&self.counts[6..]).sum()
    }

    pub fn csv(&self) -> String {
        let mut out = String::from("file,count\n");
        for (i, c) in self.counts.iter().enumerate() {
            let _ = writeln!(out, "{},{}", (b'a' + i as u8) as char, c);
        }
        out
    }
}

/// Files of destination squares.
pub fn column_occupancy_moves<'a>(moves: impl IntoIterator<Item = &'a MoveRecord>) -> ColumnOccupancy {
    ColumnOccupancy::from_squares(moves.into_iter().map(|m| m.to))
}

/// Files of every node visited, endpoints included.
pub fn column_occupancy_paths<'a>(paths: impl IntoIterator<Item = &'a PathResult>) -> ColumnOccupancy {
    ColumnOccupancy::from_squares(paths.into_iter().flat_map(|p| p.nodes.iter().copied()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trivial_correlations() {
        assert!((pearson_r(&[1.0, 2.0, 3.0], &[1.0, 2.0, 3.0]).unwrap().r - 1.0).abs() < 1e-12);
        assert!((pearson_r(&[1.0, 2.0, 3.0], &[3.0, 2.0, 1.0]).unwrap().r + 1.0).abs() < 1e-12);
        assert!(pearson_r(&[1.0, 1.0, 1.0], &[1.0, 2.0, 3.0]).is_err());
        assert!(pearson_r(&[1.0, 2.0], &[1.0, 2.0]).is_err());
        assert!(pearson_r(&[1.0, 2.0, 3.0], &[1.0, 2.0]).is_err());
    }

    #[test]
    fn trivial_chi_square() {
        let same = chi_square_independence(&[vec![3.0, 5.0, 7.0], vec![3.0, 5.0, 7.0]]).unwrap();
        assert_eq!(same.statistic, 0.0);
        assert!((same.p - 1.0).abs() < 1e-12);
        let split = chi_square_independence(&[vec![10.0, 0.0], vec![0.0, 10.0]]).unwrap();
        assert!((split.statistic - 20.0).abs() < 1e-12);
        assert_eq!(split.dof, 1);
        assert!(chi_square_independence(&[vec![0.0, 0.0], vec![1.0, 2.0]]).is_err());
    }

    #[test]
    fn occupancy() {
        let file_a: Vec<Square> = (0..8).map(|r| Square::new(0, r).unwrap()).collect();
        let o = ColumnOccupancy::from_squares(file_a);
        assert_eq!(o.counts, [8, 0, 0, 0, 0, 0, 0, 0]);
        assert_eq!(ColumnOccupancy::from_squares([]).counts, [0; 8]);
    }
}
