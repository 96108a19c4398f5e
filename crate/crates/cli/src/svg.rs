//! Static SVG output: the laid-out graph with optional path overlays, and
//! paths drawn on the physical 8×8 board.

use std::fmt::Write;

use boardmap_core::graph::{BoardGraph, LayoutMap, Point};
use boardmap_core::wayfinder::PathResult;
use boardmap_core::{PieceKind, Square};

const SIZE: f64 = 800.0;
const MARGIN: f64 = 40.0;

/// Stroke colour for a step, by the first capable piece in this order.
pub fn piece_color(pieces: &[(PieceKind, boardmap_core::Color)]) -> &'static str {
    const ORDER: [(PieceKind, &str); 6] = [
        (PieceKind::Pawn, "#7f7f7f"),
        (PieceKind::King, "#ff7f0e"),
        (PieceKind::Rook, "#d62728"),
        (PieceKind::Bishop, "#1f77b4"),
        (PieceKind::Knight, "#2ca02c"),
        (PieceKind::Queen, "#9467bd"),
    ];
    ORDER
        .iter()
        .find(|(p, _)| pieces.iter().any(|(q, _)| q == p))
        .map_or("#000000", |(_, c)| c)
}

fn path_colors() -> [&'static str; 4] {
    ["#e31a1c", "#1f78b4", "#33a02c", "#ff7f00"]
}

struct Frame {
    min: Point,
    scale: f64,
}

impl Frame {
    fn fit(layout: &LayoutMap) -> Frame {
        let xs = layout.positions.values().map(|p| p.x);
        let ys = layout.positions.values().map(|p| p.y);
        let (x0, x1) = (xs.clone().fold(f64::INFINITY, f64::min), xs.fold(f64::NEG_INFINITY, f64::max));
        let (y0, y1) = (ys.clone().fold(f64::INFINITY, f64::min), ys.fold(f64::NEG_INFINITY, f64::max));
        let span = (x1 - x0).max(y1 - y0).max(1e-9);
        Frame {
            min: Point::new(x0, y0),
            scale: (SIZE - 2.0 * MARGIN) / span,
        }
    }

    fn map(&self, p: Point) -> (f64, f64) {
        (MARGIN + (p.x - self.min.x) * self.scale, SIZE - MARGIN - (p.y - self.min.y) * self.scale)
    }
}

fn open(out: &mut String) {
    let _ = writeln!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{SIZE}\" height=\"{SIZE}\" viewBox=\"0 0 {SIZE} {SIZE}\" font-family=\"sans-serif\">"
    );
    let _ = writeln!(out, "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>");
}

fn draw_path(out: &mut String, p: &PathResult, colour: &str, at: impl Fn(Square) -> Option<(f64, f64)>) {
    let _ = writeln!(out, "<g class=\"path\" data-mode=\"{}\">", p.mode.name());
    if let (Some(a), Some(b)) = (p.nodes.first().and_then(|s| at(*s)), p.nodes.last().and_then(|s| at(*s))) {
        let _ = writeln!(
            out,
            "<line x1=\"{:.1}\" y1=\"{:.1}\" x2=\"{:.1}\" y2=\"{:.1}\" stroke=\"{colour}\" stroke-dasharray=\"6 4\" stroke-width=\"1.5\"/>",
            a.0, a.1, b.0, b.1
        );
    }
    for s in &p.steps {
        if let (Some(a), Some(b)) = (at(s.from), at(s.to)) {
            let _ = writeln!(
                out,
                "<line x1=\"{:.1}\" y1=\"{:.1}\" x2=\"{:.1}\" y2=\"{:.1}\" stroke=\"{}\" stroke-width=\"4\" stroke-linecap=\"round\"><title>{}-{}</title></line>",
                a.0,
                a.1,
                b.0,
                b.1,
                piece_color(&s.pieces_capable),
                s.from,
                s.to
            );
        }
    }
    for n in &p.nodes {
        if let Some((x, y)) = at(*n) {
            let _ = writeln!(out, "<circle cx=\"{x:.1}\" cy=\"{y:.1}\" r=\"5\" fill=\"none\" stroke=\"{colour}\" stroke-width=\"2\"/>");
        }
    }
    out.push_str("</g>\n");
}

/// The graph at its layout positions: node radius grows with the square
/// root of the node weight, edge opacity with the edge weight.
pub fn layout_svg(graph: &BoardGraph, layout: &LayoutMap, paths: &[PathResult]) -> String {
    let frame = Frame::fit(layout);
    let at = |s: Square| layout.position(s).map(|p| frame.map(p));
    let max_edge = graph.edges().map(|(_, w)| w).max().unwrap_or(1).max(1) as f64;
    let max_node = graph.nodes().map(|(_, w)| w).max().unwrap_or(1).max(1) as f64;
    let mut out = String::new();
    open(&mut out);
    out.push_str("<g class=\"edges\" stroke=\"#444\">\n");
    for (e, w) in graph.edges() {
        if let (Some(a), Some(b)) = (at(e.a), at(e.b)) {
            let _ = writeln!(
                out,
                "<line x1=\"{:.1}\" y1=\"{:.1}\" x2=\"{:.1}\" y2=\"{:.1}\" stroke-opacity=\"{:.3}\"/>",
                a.0,
                a.1,
                b.0,
                b.1,
                0.05 + 0.5 * (w as f64 / max_edge).sqrt()
            );
        }
    }
    out.push_str("</g>\n<g class=\"nodes\">\n");
    for (s, w) in graph.nodes() {
        if let Some((x, y)) = at(s) {
            let r = 4.0 + 12.0 * (w as f64 / max_node).sqrt();
            let _ = writeln!(
                out,
                "<circle cx=\"{x:.1}\" cy=\"{y:.1}\" r=\"{r:.1}\" fill=\"#9ecae1\" stroke=\"#3182bd\"/><text x=\"{x:.1}\" y=\"{:.1}\" font-size=\"11\" text-anchor=\"middle\">{s}</text>",
                y + 4.0
            );
        }
    }
    out.push_str("</g>\n");
    for (i, p) in paths.iter().enumerate() {
        draw_path(&mut out, p, path_colors()[i % 4], at);
    }
    out.push_str("</svg>\n");
    out
}

/// Paths drawn between square centres on a plain board, a1 bottom left.
pub fn board_svg(paths: &[PathResult]) -> String {
    let cell = (SIZE - 2.0 * MARGIN) / 8.0;
    let centre = |s: Square| {
        Some((
            MARGIN + (f64::from(s.file()) + 0.5) * cell,
            SIZE - MARGIN - (f64::from(s.rank()) + 0.5) * cell,
        ))
    };
    let mut out = String::new();
    open(&mut out);
    for s in Square::all() {
        let (x, y) = (MARGIN + f64::from(s.file()) * cell, SIZE - MARGIN - f64::from(s.rank() + 1) * cell);
        let fill = if (s.file() + s.rank()) % 2 == 0 { "#b58863" } else { "#f0d9b5" };
        let _ = writeln!(out, "<rect x=\"{x:.1}\" y=\"{y:.1}\" width=\"{cell:.1}\" height=\"{cell:.1}\" fill=\"{fill}\"/>");
    }
    for f in 0..8u8 {
        let x = MARGIN + (f64::from(f) + 0.5) * cell;
        let _ = writeln!(out, "<text x=\"{x:.1}\" y=\"{:.1}\" font-size=\"14\" text-anchor=\"middle\">{}</text>", SIZE - 15.0, (b'a' + f) as char);
        let y = SIZE - MARGIN - (f64::from(f) + 0.5) * cell + 5.0;
        let _ = writeln!(out, "<text x=\"20\" y=\"{y:.1}\" font-size=\"14\" text-anchor=\"middle\">{}</text>", f + 1);
    }
    for (i, p) in paths.iter().enumerate() {
        draw_path(&mut out, p, path_colors()[i % 4], centre);
    }
    out.push_str("</svg>\n");
    out
}
