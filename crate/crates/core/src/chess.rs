//! Board coordinates, piece taxonomy and per-piece geometric move legality.
//!
//! Legality here is purely geometric: a displacement is judged against the
//! movement pattern of the piece in isolation. Board occupancy, blocking,
//! check and turn order are not considered.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("malformed square name {0:?}")]
pub struct MalformedSquare(pub String);

/// A square on the 8x8 board. File 0 is `a`, rank 0 is `1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Square(u8);

impl Square {
    pub const COUNT: usize = 64;

    /// Returns `None` if either coordinate is off the board.
    pub const fn new(file: u8, rank: u8) -> Option<Square> {
        if file < 8 && rank < 8 {
            Some(Square(rank * 8 + file))
        } else {
            None
        }
    }

    pub const fn from_index(index: u8) -> Option<Square> {
        if index < 64 {
            Some(Square(index))
        } else {
            None
        }
    }

    #[inline]
    pub const fn index(self) -> usize {
        self.0 as usize
    }

    #[inline]
    pub const fn file(self) -> u8 {
        self.0 % 8
    }

    #[inline]
    pub const fn rank(self) -> u8 {
        self.0 / 8
    }

    pub fn file_char(self) -> char {
        (b'a' + self.file()) as char
    }

    pub fn rank_char(self) -> char {
        (b'1' + self.rank()) as char
    }

    /// Offsets the square, returning `None` when the result leaves the board.
    pub fn offset(self, dfile: i8, drank: i8) -> Option<Square> {
        let f = self.file() as i8 + dfile;
        let r = self.rank() as i8 + drank;
        if (0..8).contains(&f) && (0..8).contains(&r) {
            Square::new(f as u8, r as u8)
        } else {
            None
        }
    }

    /// Reflects the square across the horizontal midline (rank -> 7 - rank).
    pub fn flip_rank(self) -> Square {
        Square(((7 - self.rank()) * 8) + self.file())
    }

    /// All 64 squares in index order (a1, b1, ..., h8).
    pub fn all() -> impl Iterator<Item = Square> + Clone {
        (0..64u8).map(Square)
    }

    pub fn name(self) -> String {
        self.to_string()
    }
}

/// Parses a lowercase square name such as `"e4"`.
pub fn square_from_name(name: &str) -> Result<Square, MalformedSquare> {
    let bytes = name.as_bytes();
    if bytes.len() != 2 {
        return Err(MalformedSquare(name.to_owned()));
    }
    let (f, r) = (bytes[0], bytes[1]);
    if !(b'a'..=b'h').contains(&f) || !(b'1'..=b'8').contains(&r) {
        return Err(MalformedSquare(name.to_owned()));
    }
    Ok(Square((r - b'1') * 8 + (f - b'a')))
}

impl FromStr for Square {
    type Err = MalformedSquare;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        square_from_name(s)
    }
}

impl fmt::Display for Square {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.file_char(), self.rank_char())
    }
}

impl Serialize for Square {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Square {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        square_from_name(&s).map_err(serde::de::Error::custom)
    }
}

/// The six piece kinds, in the row order used by every table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PieceKind {
    Pawn,
    Rook,
    Knight,
    Bishop,
    Queen,
    King,
}

impl PieceKind {
    pub const ALL: [PieceKind; 6] = [
        PieceKind::Pawn,
        PieceKind::Rook,
        PieceKind::Knight,
        PieceKind::Bishop,
        PieceKind::Queen,
        PieceKind::King,
    ];

    #[inline]
    pub fn index(self) -> usize {
        self as usize
    }

    /// Lowercase English name, as used in narration.
    pub fn name(self) -> &'static str {
        match self {
            PieceKind::Pawn => "pawn",
            PieceKind::Rook => "rook",
            PieceKind::Knight => "knight",
            PieceKind::Bishop => "bishop",
            PieceKind::Queen => "queen",
            PieceKind::King => "king",
        }
    }

    /// Plural label used in table rows.
    pub fn table_label(self) -> &'static str {
        match self {
            PieceKind::Pawn => "Pawns",
            PieceKind::Rook => "Rooks",
            PieceKind::Knight => "Knights",
            PieceKind::Bishop => "Bishops",
            PieceKind::Queen => "Queen",
            PieceKind::King => "King",
        }
    }

    pub fn from_name(name: &str) -> Option<PieceKind> {
        PieceKind::ALL
            .into_iter()
            .find(|p| p.name().eq_ignore_ascii_case(name))
    }

    /// SAN letter; pawns have none.
    pub fn san_letter(self) -> Option<char> {
        match self {
            PieceKind::Pawn => None,
            PieceKind::Rook => Some('R'),
            PieceKind::Knight => Some('N'),
            PieceKind::Bishop => Some('B'),
            PieceKind::Queen => Some('Q'),
            PieceKind::King => Some('K'),
        }
    }

    pub fn from_san_letter(c: char) -> Option<PieceKind> {
        match c {
            'R' => Some(PieceKind::Rook),
            'N' => Some(PieceKind::Knight),
            'B' => Some(PieceKind::Bishop),
            'Q' => Some(PieceKind::Queen),
            'K' => Some(PieceKind::King),
            _ => None,
        }
    }
}

impl fmt::Display for PieceKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Color {
    White,
    Black,
}

impl Color {
    pub const ALL: [Color; 2] = [Color::White, Color::Black];

    pub fn opponent(self) -> Color {
        match self {
            Color::White => Color::Black,
            Color::Black => Color::White,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Color::White => "white",
            Color::Black => "black",
        }
    }

    pub fn capitalized(self) -> &'static str {
        match self {
            Color::White => "White",
            Color::Black => "Black",
        }
    }

    pub fn from_name(name: &str) -> Option<Color> {
        if name.eq_ignore_ascii_case("white") {
            Some(Color::White)
        } else if name.eq_ignore_ascii_case("black") {
            Some(Color::Black)
        } else {
            None
        }
    }

    /// Rank delta of a forward pawn step.
    pub fn forward(self) -> i8 {
        match self {
            Color::White => 1,
            Color::Black => -1,
        }
    }

    /// Rank index pawns start on.
    pub fn pawn_home_rank(self) -> u8 {
        match self {
            Color::White => 1,
            Color::Black => 6,
        }
    }

    pub fn back_rank(self) -> u8 {
        match self {
            Color::White => 0,
            Color::Black => 7,
        }
    }
}

impl fmt::Display for Color {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Special {
    #[default]
    None,
    CastleKingside,
    CastleQueenside,
    Promotion,
}

impl Special {
    pub fn is_castle(self) -> bool {
        matches!(self, Special::CastleKingside | Special::CastleQueenside)
    }
}

/// One move displacement with everything the geometric test needs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct MoveGeometry {
    pub piece: PieceKind,
    pub color: Color,
    pub from: Square,
    pub to: Square,
    pub is_capture: bool,
    pub special: Special,
}

impl MoveGeometry {
    pub fn plain(piece: PieceKind, color: Color, from: Square, to: Square, is_capture: bool) -> Self {
        MoveGeometry {
            piece,
            color,
            from,
            to,
            is_capture,
            special: Special::None,
        }
    }
}

/// King start and destination squares for a castle.
pub fn castle_king_squares(color: Color, special: Special) -> Option<(Square, Square)> {
    let rank = color.back_rank();
    let to_file = match special {
        Special::CastleKingside => 6,
        Special::CastleQueenside => 2,
        _ => return None,
    };
    Some((Square::new(4, rank)?, Square::new(to_file, rank)?))
}

/// Rook start and destination squares for a castle.
pub fn castle_rook_squares(color: Color, special: Special) -> Option<(Square, Square)> {
    let rank = color.back_rank();
    let (from_file, to_file) = match special {
        Special::CastleKingside => (7, 5),
        Special::CastleQueenside => (0, 3),
        _ => return None,
    };
    Some((Square::new(from_file, rank)?, Square::new(to_file, rank)?))
}

fn deltas(from: Square, to: Square) -> (i8, i8) {
    (
        to.file() as i8 - from.file() as i8,
        to.rank() as i8 - from.rank() as i8,
    )
}

pub fn rook_geometry(from: Square, to: Square) -> bool {
    let (df, dr) = deltas(from, to);
    (df == 0) != (dr == 0)
}

pub fn bishop_geometry(from: Square, to: Square) -> bool {
    let (df, dr) = deltas(from, to);
    df != 0 && df.abs() == dr.abs()
}

pub fn knight_geometry(from: Square, to: Square) -> bool {
    let (df, dr) = deltas(from, to);
    matches!((df.abs(), dr.abs()), (1, 2) | (2, 1))
}

pub fn king_step_geometry(from: Square, to: Square) -> bool {
    let (df, dr) = deltas(from, to);
    from != to && df.abs() <= 1 && dr.abs() <= 1
}

fn pawn_geometry(color: Color, from: Square, to: Square, is_capture: bool) -> bool {
    let (df, dr) = deltas(from, to);
    let fwd = color.forward();
    if is_capture {
        df.abs() == 1 && dr == fwd
    } else {
        df == 0 && (dr == fwd || (dr == 2 * fwd && from.rank() == color.pawn_home_rank()))
    }
}

/// Whether the displacement is permitted for the piece, ignoring board state.
pub fn is_legal_geometry(m: &MoveGeometry) -> bool {
    if m.from == m.to {
        return false;
    }
    if m.special.is_castle() {
        return m.piece == PieceKind::King
            && castle_king_squares(m.color, m.special) == Some((m.from, m.to));
    }
    if m.special == Special::Promotion && m.piece != PieceKind::Pawn {
        return false;
    }
    match m.piece {
        PieceKind::Rook => rook_geometry(m.from, m.to),
        PieceKind::Bishop => bishop_geometry(m.from, m.to),
        PieceKind::Queen => rook_geometry(m.from, m.to) || bishop_geometry(m.from, m.to),
        PieceKind::Knight => knight_geometry(m.from, m.to),
        PieceKind::King => king_step_geometry(m.from, m.to),
        PieceKind::Pawn => pawn_geometry(m.color, m.from, m.to, m.is_capture),
    }
}

/// Euclidean distance in square units.
pub fn board_distance(a: Square, b: Square) -> f64 {
    let (df, dr) = deltas(a, b);
    f64::from(df).hypot(f64::from(dr))
}

/// Every (piece, color) that could make this displacement with no special marker.
pub fn pieces_capable(from: Square, to: Square, is_capture: bool) -> Vec<(PieceKind, Color)> {
    let mut out = Vec::new();
    for piece in PieceKind::ALL {
        for color in Color::ALL {
            if is_legal_geometry(&MoveGeometry::plain(piece, color, from, to, is_capture)) {
                out.push((piece, color));
            }
        }
    }
    out
}
