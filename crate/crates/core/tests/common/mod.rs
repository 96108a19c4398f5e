//! Independent oracles and fixtures shared by the integration tests.
#![allow(dead_code)]

use std::collections::BTreeSet;

use boardmap_core::extract::extract_moves;
use boardmap_core::narrator::{narrate_game, TemplateSet};
use boardmap_core::position::Position;
use boardmap_core::record::GameRecord;
use boardmap_core::{Color, PieceKind, Source};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn on_board(f: i32, r: i32) -> bool {
    (0..8).contains(&f) && (0..8).contains(&r)
}

/// Every (file, rank) reachable from (f, r), ignoring other pieces.
pub fn destinations(piece: PieceKind, color: Color, f: i32, r: i32, capture: bool) -> BTreeSet<(i32, i32)> {
    let mut out = BTreeSet::new();
    let ray = |dirs: &[(i32, i32)], out: &mut BTreeSet<(i32, i32)>| {
        for &(df, dr) in dirs {
            let (mut x, mut y) = (f + df, r + dr);
            while on_board(x, y) {
                out.insert((x, y));
                x += df;
                y += dr;
            }
        }
    };
    let jump = |deltas: &[(i32, i32)], out: &mut BTreeSet<(i32, i32)>| {
        for &(df, dr) in deltas {
            if on_board(f + df, r + dr) {
                out.insert((f + df, r + dr));
            }
        }
    };
    let straight = [(1, 0), (-1, 0), (0, 1), (0, -1)];
    let diagonal = [(1, 1), (1, -1), (-1, 1), (-1, -1)];
    match piece {
        PieceKind::Rook => ray(&straight, &mut out),
        PieceKind::Bishop => ray(&diagonal, &mut out),
        PieceKind::Queen => {
            ray(&straight, &mut out);
            ray(&diagonal, &mut out);
        }
        PieceKind::Knight => jump(&[(1, 2), (2, 1), (-1, 2), (-2, 1), (1, -2), (2, -1), (-1, -2), (-2, -1)], &mut out),
        PieceKind::King => {
            jump(&straight, &mut out);
            jump(&diagonal, &mut out);
        }
        PieceKind::Pawn => {
            let (dir, home) = if color == Color::White { (1, 1) } else { (-1, 6) };
            if capture {
                jump(&[(1, dir), (-1, dir)], &mut out);
            } else {
                jump(&[(0, dir)], &mut out);
                if r == home {
                    jump(&[(0, 2 * dir)], &mut out);
                }
            }
        }
    }
    out
}

/// Random legal play written out as PGN movetext.
pub fn random_pgn(games: usize, seed: u64) -> String {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut text = String::new();
    for g in 0..games {
        let mut pos = Position::start();
        let mut movetext = Vec::new();
        for ply in 0..rng.random_range(20..120) {
            let moves = pos.legal_moves();
            if moves.is_empty() || pos.insufficient_material() {
                break;
            }
            let m = moves[rng.random_range(0..moves.len())];
            let san = pos.to_san(&m);
            if ply % 2 == 0 {
                movetext.push(format!("{}. {san}", ply / 2 + 1));
            } else {
                movetext.push(san);
            }
            pos.play(&m);
        }
        text.push_str(&format!(
            "[Event \"Random {g}\"]\n[White \"White, Player {g}\"]\n[Black \"Black {g}\"]\n[Result \"*\"]\n\n{} *\n\n",
            movetext.join(" ")
        ));
    }
    text
}

/// Published counts in table row order: pawns, rooks, bishops, knights, queen, king.
pub const HUMAN: [f64; 6] = [49_386.0, 31_507.0, 28_263.0, 31_493.0, 22_818.0, 23_608.0];
pub const GENERATED: [f64; 6] = [51_408.0, 25_997.0, 19_310.0, 23_369.0, 16_260.0, 19_972.0];
pub const HUMAN_PCT: [f64; 6] = [26.2, 16.7, 15.0, 16.7, 12.1, 12.5];
pub const GENERATED_PCT: [f64; 6] = [32.9, 16.6, 12.4, 14.9, 10.4, 12.8];

/// Spreadsheet-style correlation from raw sums.
pub fn oracle_r(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let (sx, sy): (f64, f64) = (x.iter().sum(), y.iter().sum());
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| a * b).sum();
    let sxx: f64 = x.iter().map(|a| a * a).sum();
    let syy: f64 = y.iter().map(|b| b * b).sum();
    (n * sxy - sx * sy) / ((n * sxx - sx * sx).sqrt() * (n * syy - sy * sy).sqrt())
}

pub fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for i in 1..n {
        s += f(a + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    s * h / 3.0
}

/// Two-tailed p for r with n = 6 (t with 4 dof, density 3/8 (1 + t²/4)^(-5/2)).
pub fn oracle_p_dof4(r: f64) -> f64 {
    let t = r * (4.0 / (1.0 - r * r)).sqrt();
    let density = |u: f64| 0.375 * (1.0 + u * u / 4.0).powf(-2.5);
    2.0 * (0.5 - simpson(density, 0.0, t.abs(), 200_000))
}

pub fn oracle_chi(rows: &[[f64; 6]; 2]) -> f64 {
    let total: f64 = rows.iter().flatten().sum();
    let mut s = 0.0;
    for i in 0..2 {
        for j in 0..6 {
            let e = rows[i].iter().sum::<f64>() * (rows[0][j] + rows[1][j]) / total;
            s += (rows[i][j] - e).powi(2) / e;
        }
    }
    s
}

pub type Key = (Option<u32>, Color, PieceKind, boardmap_core::Square, boardmap_core::Square, bool, boardmap_core::Special, bool);

pub fn keys(g: &GameRecord) -> Vec<Key> {
    g.moves.iter().map(|m| m.move_key()).collect()
}

pub fn round_trip(g: &GameRecord, t: &TemplateSet) -> Result<(), String> {
    let text = narrate_game(g, t);
    let r = extract_moves(&text, Source::Human);
    let got: Vec<Key> = r.moves.iter().map(|m| m.move_key()).collect();
    if got != keys(g) {
        let first = got.iter().zip(keys(g)).position(|(a, b)| *a != b);
        return Err(format!("game {} seed {}: mismatch at {first:?}\n{text}", g.id, t.seed));
    }
    if !r.unparsed_spans.is_empty() {
        let (o, l) = r.unparsed_spans[0];
        return Err(format!("game {} seed {}: unparsed `{}`", g.id, t.seed, &text[o..o + l]));
    }
    Ok(())
}

