//! Full-rules position tracking, used to resolve SAN origins and to simulate
//! games. Kept independent of the geometric oracle in [`crate::chess`] so the
//! two can check each other.

use std::fmt;

use crate::chess::{Color, PieceKind, Special, Square};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Piece {
    pub color: Color,
    pub kind: PieceKind,
}

/// A fully resolved move on a concrete position.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct BoardMove {
    pub piece: PieceKind,
    pub from: Square,
    pub to: Square,
    pub captured: Option<PieceKind>,
    pub promotion: Option<PieceKind>,
    pub special: Special,
    pub en_passant: bool,
}

impl BoardMove {
    pub fn is_capture(&self) -> bool {
        self.captured.is_some()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SanError(pub String);

impl fmt::Display for SanError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// Castling rights, indexed `[color][0 = kingside, 1 = queenside]`.
type CastleRights = [[bool; 2]; 2];

#[derive(Clone, PartialEq, Eq)]
pub struct Position {
    board: [Option<Piece>; 64],
    turn: Color,
    castling: CastleRights,
    en_passant: Option<Square>,
}

const KNIGHT_STEPS: [(i8, i8); 8] = [
    (1, 2),
    (2, 1),
    (2, -1),
    (1, -2),
    (-1, -2),
    (-2, -1),
    (-2, 1),
    (-1, 2),
];
const KING_STEPS: [(i8, i8); 8] = [
    (1, 0),
    (1, 1),
    (0, 1),
    (-1, 1),
    (-1, 0),
    (-1, -1),
    (0, -1),
    (1, -1),
];
const ROOK_DIRS: [(i8, i8); 4] = [(1, 0), (-1, 0), (0, 1), (0, -1)];
const BISHOP_DIRS: [(i8, i8); 4] = [(1, 1), (1, -1), (-1, 1), (-1, -1)];

fn color_index(c: Color) -> usize {
    match c {
        Color::White => 0,
        Color::Black => 1,
    }
}

impl Default for Position {
    fn default() -> Self {
        Position::start()
    }
}

impl Position {
    pub fn start() -> Position {
        use PieceKind::*;
        let mut board = [None; 64];
        let back = [Rook, Knight, Bishop, Queen, King, Bishop, Knight, Rook];
        for (file, kind) in back.into_iter().enumerate() {
            let file = file as u8;
            board[Square::new(file, 0).unwrap().index()] = Some(Piece { color: Color::White, kind });
            board[Square::new(file, 7).unwrap().index()] = Some(Piece { color: Color::Black, kind });
            board[Square::new(file, 1).unwrap().index()] = Some(Piece { color: Color::White, kind: Pawn });
            board[Square::new(file, 6).unwrap().index()] = Some(Piece { color: Color::Black, kind: Pawn });
        }
        Position {
            board,
            turn: Color::White,
            castling: [[true; 2]; 2],
            en_passant: None,
        }
    }

    pub fn turn(&self) -> Color {
        self.turn
    }

    pub fn piece_at(&self, sq: Square) -> Option<Piece> {
        self.board[sq.index()]
    }

    fn king_square(&self, color: Color) -> Option<Square> {
        Square::all().find(|&s| self.board[s.index()] == Some(Piece { color, kind: PieceKind::King }))
    }

    /// Whether `sq` is attacked by any piece of `by`.
    pub fn is_attacked(&self, sq: Square, by: Color) -> bool {
        let has = |s: Option<Square>, kinds: &[PieceKind]| {
            s.and_then(|s| self.board[s.index()])
                .is_some_and(|p| p.color == by && kinds.contains(&p.kind))
        };
        // a pawn of `by` attacks diagonally forward, so look backwards from sq
        let back = -by.forward();
        if has(sq.offset(1, back), &[PieceKind::Pawn]) || has(sq.offset(-1, back), &[PieceKind::Pawn]) {
            return true;
        }
        if KNIGHT_STEPS.iter().any(|&(f, r)| has(sq.offset(f, r), &[PieceKind::Knight])) {
            return true;
        }
        if KING_STEPS.iter().any(|&(f, r)| has(sq.offset(f, r), &[PieceKind::King])) {
            return true;
        }
        let slide = |dirs: &[(i8, i8)], kinds: &[PieceKind]| {
            dirs.iter().any(|&(f, r)| {
                let mut cur = sq.offset(f, r);
                while let Some(s) = cur {
                    if let Some(p) = self.board[s.index()] {
                        return p.color == by && kinds.contains(&p.kind);
                    }
                    cur = s.offset(f, r);
                }
                false
            })
        };
        slide(&ROOK_DIRS, &[PieceKind::Rook, PieceKind::Queen])
            || slide(&BISHOP_DIRS, &[PieceKind::Bishop, PieceKind::Queen])
    }

    pub fn in_check(&self, color: Color) -> bool {
        self.king_square(color)
            .is_some_and(|k| self.is_attacked(k, color.opponent()))
    }

    fn push_pawn_moves(&self, from: Square, out: &mut Vec<BoardMove>) {
        let color = self.turn;
        let fwd = color.forward();
        let promo_rank = color.opponent().back_rank();
        let mut push = |to: Square, captured: Option<PieceKind>, en_passant: bool| {
            if to.rank() == promo_rank {
                for promo in [PieceKind::Queen, PieceKind::Rook, PieceKind::Bishop, PieceKind::Knight] {
                    out.push(BoardMove {
                        piece: PieceKind::Pawn,
                        from,
                        to,
                        captured,
                        promotion: Some(promo),
                        special: Special::Promotion,
                        en_passant: false,
                    });
                }
            } else {
                out.push(BoardMove {
                    piece: PieceKind::Pawn,
                    from,
                    to,
                    captured,
                    promotion: None,
                    special: Special::None,
                    en_passant,
                });
            }
        };
        if let Some(one) = from.offset(0, fwd) {
            if self.board[one.index()].is_none() {
                push(one, None, false);
                if from.rank() == color.pawn_home_rank() {
                    if let Some(two) = from.offset(0, 2 * fwd) {
                        if self.board[two.index()].is_none() {
                            push(two, None, false);
                        }
                    }
                }
            }
        }
        for df in [-1, 1] {
            if let Some(to) = from.offset(df, fwd) {
                match self.board[to.index()] {
                    Some(p) if p.color != color => push(to, Some(p.kind), false),
                    None if self.en_passant == Some(to) => push(to, Some(PieceKind::Pawn), true),
                    _ => {}
                }
            }
        }
    }

    fn push_step_moves(&self, from: Square, kind: PieceKind, steps: &[(i8, i8)], out: &mut Vec<BoardMove>) {
        for &(f, r) in steps {
            if let Some(to) = from.offset(f, r) {
                match self.board[to.index()] {
                    Some(p) if p.color == self.turn => {}
                    other => out.push(BoardMove {
                        piece: kind,
                        from,
                        to,
                        captured: other.map(|p| p.kind),
                        promotion: None,
                        special: Special::None,
                        en_passant: false,
                    }),
                }
            }
        }
    }

    fn push_slide_moves(&self, from: Square, kind: PieceKind, dirs: &[(i8, i8)], out: &mut Vec<BoardMove>) {
        for &(f, r) in dirs {
            let mut cur = from.offset(f, r);
            while let Some(to) = cur {
                let occupant = self.board[to.index()];
                if occupant.is_some_and(|p| p.color == self.turn) {
                    break;
                }
                out.push(BoardMove {
                    piece: kind,
                    from,
                    to,
                    captured: occupant.map(|p| p.kind),
                    promotion: None,
                    special: Special::None,
                    en_passant: false,
                });
                if occupant.is_some() {
                    break;
                }
                cur = to.offset(f, r);
            }
        }
    }

    fn push_castles(&self, out: &mut Vec<BoardMove>) {
        let color = self.turn;
        let rank = color.back_rank();
        let sq = |f: u8| Square::new(f, rank).unwrap();
        if self.board[sq(4).index()] != Some(Piece { color, kind: PieceKind::King }) {
            return;
        }
        let enemy = color.opponent();
        let rights = self.castling[color_index(color)];
        let sides = [
            (rights[0], Special::CastleKingside, 7u8, &[5u8, 6][..], &[4u8, 5, 6][..]),
            (rights[1], Special::CastleQueenside, 0u8, &[1u8, 2, 3][..], &[4u8, 3, 2][..]),
        ];
        for (allowed, special, rook_file, empty, safe) in sides {
            if !allowed || self.board[sq(rook_file).index()] != Some(Piece { color, kind: PieceKind::Rook }) {
                continue;
            }
            if empty.iter().any(|&f| self.board[sq(f).index()].is_some()) {
                continue;
            }
            if safe.iter().any(|&f| self.is_attacked(sq(f), enemy)) {
                continue;
            }
            let to = if special == Special::CastleKingside { sq(6) } else { sq(2) };
            out.push(BoardMove {
                piece: PieceKind::King,
                from: sq(4),
                to,
                captured: None,
                promotion: None,
                special,
                en_passant: false,
            });
        }
    }

    /// Moves that obey piece movement and blocking but may leave the king in check.
    pub fn pseudo_legal_moves(&self) -> Vec<BoardMove> {
        let mut out = Vec::with_capacity(64);
        for from in Square::all() {
            let Some(p) = self.board[from.index()] else { continue };
            if p.color != self.turn {
                continue;
            }
            match p.kind {
                PieceKind::Pawn => self.push_pawn_moves(from, &mut out),
                PieceKind::Knight => self.push_step_moves(from, p.kind, &KNIGHT_STEPS, &mut out),
                PieceKind::King => self.push_step_moves(from, p.kind, &KING_STEPS, &mut out),
                PieceKind::Rook => self.push_slide_moves(from, p.kind, &ROOK_DIRS, &mut out),
                PieceKind::Bishop => self.push_slide_moves(from, p.kind, &BISHOP_DIRS, &mut out),
                PieceKind::Queen => {
                    self.push_slide_moves(from, p.kind, &ROOK_DIRS, &mut out);
                    self.push_slide_moves(from, p.kind, &BISHOP_DIRS, &mut out);
                }
            }
        }
        self.push_castles(&mut out);
        out
    }

    pub fn legal_moves(&self) -> Vec<BoardMove> {
        let mover = self.turn;
        self.pseudo_legal_moves()
            .into_iter()
            .filter(|m| {
                let mut next = self.clone();
                next.apply_unchecked(m);
                !next.in_check(mover)
            })
            .collect()
    }

    fn apply_unchecked(&mut self, m: &BoardMove) {
        let color = self.turn;
        let moving = self.board[m.from.index()].take();
        if m.en_passant {
            if let Some(victim) = m.to.offset(0, -color.forward()) {
                self.board[victim.index()] = None;
            }
        }
        let placed = match m.promotion {
            Some(kind) => Some(Piece { color, kind }),
            None => moving,
        };
        self.board[m.to.index()] = placed;
        if m.special.is_castle() {
            if let Some((rf, rt)) = crate::chess::castle_rook_squares(color, m.special) {
                let rook = self.board[rf.index()].take();
                self.board[rt.index()] = rook;
            }
        }
        // castling rights
        if m.piece == PieceKind::King {
            self.castling[color_index(color)] = [false, false];
        }
        for sq in [m.from, m.to] {
            for c in Color::ALL {
                let rank = c.back_rank();
                if sq == Square::new(7, rank).unwrap() {
                    self.castling[color_index(c)][0] = false;
                }
                if sq == Square::new(0, rank).unwrap() {
                    self.castling[color_index(c)][1] = false;
                }
            }
        }
        self.en_passant = if m.piece == PieceKind::Pawn && (m.to.rank() as i8 - m.from.rank() as i8).abs() == 2 {
            m.from.offset(0, color.forward())
        } else {
            None
        };
        self.turn = color.opponent();
    }

    /// Plays a move assumed legal in this position.
    pub fn play(&mut self, m: &BoardMove) {
        self.apply_unchecked(m);
    }

    pub fn is_checkmate(&self) -> bool {
        self.in_check(self.turn) && self.legal_moves().is_empty()
    }

    /// True when neither side has mating material (bare kings, or king and one minor piece).
    pub fn insufficient_material(&self) -> bool {
        let others: Vec<PieceKind> = self
            .board
            .iter()
            .flatten()
            .filter(|p| p.kind != PieceKind::King)
            .map(|p| p.kind)
            .collect();
        match others.as_slice() {
            [] => true,
            [k] => matches!(k, PieceKind::Bishop | PieceKind::Knight),
            _ => false,
        }
    }

    /// Resolves a SAN token (check/annotation suffixes allowed) to a legal move.
    pub fn parse_san(&self, san: &str) -> Result<BoardMove, SanError> {
        let token = san.trim_end_matches(['+', '#', '!', '?']);
        let legal = self.legal_moves();
        if matches!(token, "O-O" | "0-0") || matches!(token, "O-O-O" | "0-0-0") {
            let special = if token.len() == 3 {
                Special::CastleKingside
            } else {
                Special::CastleQueenside
            };
            return legal
                .into_iter()
                .find(|m| m.special == special)
                .ok_or_else(|| SanError(format!("castle {san} not available")));
        }

        let mut chars: Vec<char> = token.chars().collect();
        let mut promotion = None;
        if let Some(eq) = chars.iter().position(|&c| c == '=') {
            let promo = chars.get(eq + 1).copied().and_then(PieceKind::from_san_letter);
            if promo.is_none() || chars.len() != eq + 2 {
                return Err(SanError(format!("bad promotion in {san}")));
            }
            promotion = promo;
            chars.truncate(eq);
        } else if chars.len() >= 3 {
            // tolerate "e8Q" without '='
            if let Some(p) = chars.last().copied().and_then(PieceKind::from_san_letter) {
                if chars[chars.len() - 2].is_ascii_digit() && chars[0].is_ascii_lowercase() {
                    promotion = Some(p);
                    chars.pop();
                }
            }
        }
        let piece = match chars.first().copied().and_then(PieceKind::from_san_letter) {
            Some(p) => {
                chars.remove(0);
                p
            }
            None => PieceKind::Pawn,
        };
        if chars.len() < 2 {
            return Err(SanError(format!("truncated SAN {san}")));
        }
        let dest: String = chars[chars.len() - 2..].iter().collect();
        let to = crate::chess::square_from_name(&dest).map_err(|_| SanError(format!("bad target in {san}")))?;
        let mut rest = &chars[..chars.len() - 2];
        let mut capture = false;
        if rest.last() == Some(&'x') || rest.last() == Some(&':') {
            capture = true;
            rest = &rest[..rest.len() - 1];
        }
        let mut file_hint = None;
        let mut rank_hint = None;
        for &c in rest {
            match c {
                'a'..='h' => file_hint = Some(c as u8 - b'a'),
                '1'..='8' => rank_hint = Some(c as u8 - b'1'),
                '-' => {}
                _ => return Err(SanError(format!("unexpected {c:?} in {san}"))),
            }
        }
        let candidates: Vec<BoardMove> = legal
            .into_iter()
            .filter(|m| {
                m.piece == piece
                    && m.to == to
                    && !m.special.is_castle()
                    && m.promotion == promotion
                    && file_hint.is_none_or(|f| m.from.file() == f)
                    && rank_hint.is_none_or(|r| m.from.rank() == r)
            })
            .collect();
        match candidates.as_slice() {
            [m] => {
                if capture && !m.is_capture() {
                    return Err(SanError(format!("{san} marks a capture on an empty square")));
                }
                Ok(*m)
            }
            [] => Err(SanError(format!("no legal origin for {san}"))),
            _ => Err(SanError(format!("ambiguous move {san}"))),
        }
    }

    /// Standard algebraic notation for a legal move in this position.
    pub fn to_san(&self, m: &BoardMove) -> String {
        let mut s = String::new();
        match m.special {
            Special::CastleKingside => s.push_str("O-O"),
            Special::CastleQueenside => s.push_str("O-O-O"),
            _ => {
                if let Some(letter) = m.piece.san_letter() {
                    s.push(letter);
                    let rivals: Vec<BoardMove> = self
                        .legal_moves()
                        .into_iter()
                        .filter(|o| o.piece == m.piece && o.to == m.to && o.from != m.from)
                        .collect();
                    if !rivals.is_empty() {
                        if rivals.iter().all(|o| o.from.file() != m.from.file()) {
                            s.push(m.from.file_char());
                        } else if rivals.iter().all(|o| o.from.rank() != m.from.rank()) {
                            s.push(m.from.rank_char());
                        } else {
                            s.push_str(&m.from.to_string());
                        }
                    }
                } else if m.is_capture() {
                    s.push(m.from.file_char());
                }
                if m.is_capture() {
                    s.push('x');
                }
                s.push_str(&m.to.to_string());
                if let Some(p) = m.promotion {
                    s.push('=');
                    s.push(p.san_letter().unwrap_or('Q'));
                }
            }
        }
        let mut next = self.clone();
        next.play(m);
        if next.in_check(next.turn) {
            s.push(if next.legal_moves().is_empty() { '#' } else { '+' });
        }
        s
    }
}

impl fmt::Debug for Position {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for rank in (0..8).rev() {
            for file in 0..8 {
                let c = match self.board[Square::new(file, rank).unwrap().index()] {
                    None => '.',
                    Some(p) => {
                        let l = p.kind.san_letter().unwrap_or('P');
                        if p.color == Color::White {
                            l
                        } else {
                            l.to_ascii_lowercase()
                        }
                    }
                };
                write!(f, "{c}")?;
            }
            writeln!(f)?;
        }
        write!(f, "{:?} to move", self.turn)
    }
}
