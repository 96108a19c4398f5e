//! Game and move records shared by every pipeline stage.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::chess::{Color, MoveGeometry, PieceKind, Special, Square};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Source {
    Human,
    Synthetic,
}

/// One parsed move. Field names on the wire follow the move-store schema.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct MoveRecord {
    pub game_id: String,
    /// Absent for generated text that never states a move number.
    pub move_number: Option<u32>,
    pub color: Color,
    pub piece: PieceKind,
    pub from: Square,
    pub to: Square,
    #[serde(rename = "capture")]
    pub is_capture: bool,
    pub special: Special,
    #[serde(rename = "check")]
    pub is_check: bool,
    pub source: Source,
    pub prompt: Option<String>,
    pub batch: Option<u32>,
    pub line: Option<u32>,
}

impl MoveRecord {
    pub fn geometry(&self) -> MoveGeometry {
        MoveGeometry {
            piece: self.piece,
            color: self.color,
            from: self.from,
            to: self.to,
            is_capture: self.is_capture,
            special: self.special,
        }
    }

    pub fn is_legal(&self) -> bool {
        crate::chess::is_legal_geometry(&self.geometry())
    }

    /// The fields that describe the move itself, without provenance.
    pub fn move_key(&self) -> (Option<u32>, Color, PieceKind, Square, Square, bool, Special, bool) {
        (
            self.move_number,
            self.color,
            self.piece,
            self.from,
            self.to,
            self.is_capture,
            self.special,
            self.is_check,
        )
    }
}

/// Calendar date with optional month and day (PGN allows `??`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct GameDate {
    pub year: Option<u16>,
    pub month: Option<u8>,
    pub day: Option<u8>,
}

const MONTHS: [&str; 12] = [
    "January",
    "February",
    "March",
    "April",
    "May",
    "June",
    "July",
    "August",
    "September",
    "October",
    "November",
    "December",
];

impl GameDate {
    /// Parses the PGN `YYYY.MM.DD` form; unknown parts may be `?`.
    pub fn parse_pgn(s: &str) -> GameDate {
        let mut parts = s.trim().split('.');
        let mut next = || parts.next().and_then(|p| p.parse::<u32>().ok());
        let year = next().and_then(|y| u16::try_from(y).ok()).filter(|&y| y > 0);
        let month = next().and_then(|m| u8::try_from(m).ok()).filter(|m| (1..=12).contains(m));
        let day = next().and_then(|d| u8::try_from(d).ok()).filter(|d| (1..=31).contains(d));
        GameDate { year, month, day }
    }

    /// English rendering at whatever precision is known.
    pub fn narrative(&self) -> String {
        match (self.year, self.month, self.day) {
            (Some(y), Some(m), Some(d)) => format!("{} {d}, {y}", MONTHS[m as usize - 1]),
            (Some(y), Some(m), None) => format!("{} {y}", MONTHS[m as usize - 1]),
            (Some(y), None, _) => format!("{y}"),
            _ => "an unknown date".to_owned(),
        }
    }

    pub fn month_from_name(name: &str) -> Option<u8> {
        MONTHS.iter().position(|m| *m == name).map(|i| i as u8 + 1)
    }
}

impl fmt::Display for GameDate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let part = |v: Option<u32>, w: usize| match v {
            Some(v) => format!("{v:0w$}"),
            None => "?".repeat(w),
        };
        write!(
            f,
            "{}.{}.{}",
            part(self.year.map(u32::from), 4),
            part(self.month.map(u32::from), 2),
            part(self.day.map(u32::from), 2)
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GameResult {
    WhiteWin,
    BlackWin,
    Draw,
    #[default]
    Unknown,
}

impl GameResult {
    pub fn from_pgn(s: &str) -> GameResult {
        match s.trim() {
            "1-0" => GameResult::WhiteWin,
            "0-1" => GameResult::BlackWin,
            "1/2-1/2" | "½-½" => GameResult::Draw,
            _ => GameResult::Unknown,
        }
    }

    pub fn winner(self) -> Option<Color> {
        match self {
            GameResult::WhiteWin => Some(Color::White),
            GameResult::BlackWin => Some(Color::Black),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct GameMeta {
    pub date: GameDate,
    pub white_name: String,
    pub black_name: String,
    pub result: GameResult,
    pub white_elo: Option<u32>,
    pub black_elo: Option<u32>,
    pub eco_code: Option<String>,
    pub move_count: u32,
}

impl GameMeta {
    pub fn name(&self, color: Color) -> &str {
        match color {
            Color::White => &self.white_name,
            Color::Black => &self.black_name,
        }
    }

    pub fn elo(&self, color: Color) -> Option<u32> {
        match color {
            Color::White => self.white_elo,
            Color::Black => self.black_elo,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GameRecord {
    pub id: String,
    pub meta: GameMeta,
    pub moves: Vec<MoveRecord>,
}

/// Returns true when `moves[i]` is the rook half of a castle recorded just before it.
pub fn is_castle_companion(moves: &[MoveRecord], i: usize) -> bool {
    if i == 0 || moves[i].piece != PieceKind::Rook {
        return false;
    }
    let (prev, cur) = (&moves[i - 1], &moves[i]);
    prev.special.is_castle()
        && prev.color == cur.color
        && prev.move_number == cur.move_number
        && crate::chess::castle_rook_squares(cur.color, prev.special) == Some((cur.from, cur.to))
}

/// Groups records into plies: each castle's king and rook records share one ply.
pub fn plies(moves: &[MoveRecord]) -> Vec<&[MoveRecord]> {
    let mut out = Vec::new();
    let mut start = 0;
    for i in 1..=moves.len() {
        if i == moves.len() || !is_castle_companion(moves, i) {
            out.push(&moves[start..i]);
            start = i;
        }
    }
    out
}
