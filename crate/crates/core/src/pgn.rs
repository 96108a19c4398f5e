//! PGN archive parsing into [`GameRecord`]s with every origin square resolved.

use thiserror::Error;

use crate::chess::{castle_rook_squares, Color, PieceKind, Special};
use crate::position::{BoardMove, Position};
use crate::record::{GameDate, GameMeta, GameRecord, GameResult, MoveRecord, Source};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PgnError {
    #[error("game {game}: syntax error at token {token:?}")]
    Syntax { game: usize, token: String },
    #[error("game {game}: cannot resolve {san:?} at move {move_number}: {reason}")]
    Disambiguation {
        game: usize,
        move_number: u32,
        san: String,
        reason: String,
    },
}

impl PgnError {
    /// Zero-based index of the offending game within the document.
    pub fn game(&self) -> usize {
        match self {
            PgnError::Syntax { game, .. } | PgnError::Disambiguation { game, .. } => *game,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Token {
    Tag(String, String),
    MoveNumber,
    San(String),
    Result(String),
    Bad(String),
}

fn tokenize(text: &str) -> Vec<Token> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    let mut line_start = true;
    while i < chars.len() {
        let c = chars[i];
        if c == '\n' {
            line_start = true;
            i += 1;
            continue;
        }
        if c.is_whitespace() || c == '\u{feff}' {
            i += 1;
            continue;
        }
        let at_line_start = line_start;
        line_start = false;
        match c {
            '%' if at_line_start => {
                while i < chars.len() && chars[i] != '\n' {
                    i += 1;
                }
            }
            ';' => {
                while i < chars.len() && chars[i] != '\n' {
                    i += 1;
                }
            }
            '{' => {
                while i < chars.len() && chars[i] != '}' {
                    i += 1;
                }
                i += 1;
            }
            '(' => {
                let mut depth = 0usize;
                while i < chars.len() {
                    match chars[i] {
                        '(' => depth += 1,
                        ')' => {
                            depth -= 1;
                            if depth == 0 {
                                break;
                            }
                        }
                        '{' => {
                            while i < chars.len() && chars[i] != '}' {
                                i += 1;
                            }
                        }
                        _ => {}
                    }
                    i += 1;
                }
                i += 1;
            }
            '[' => {
                i += 1;
                let mut name = String::new();
                while i < chars.len() && chars[i].is_whitespace() {
                    i += 1;
                }
                while i < chars.len() && !chars[i].is_whitespace() && chars[i] != '"' && chars[i] != ']' {
                    name.push(chars[i]);
                    i += 1;
                }
                while i < chars.len() && chars[i] != '"' && chars[i] != ']' {
                    i += 1;
                }
                let mut value = String::new();
                if i < chars.len() && chars[i] == '"' {
                    i += 1;
                    while i < chars.len() && chars[i] != '"' {
                        if chars[i] == '\\' && i + 1 < chars.len() {
                            i += 1;
                        }
                        value.push(chars[i]);
                        i += 1;
                    }
                    i += 1;
                }
                while i < chars.len() && chars[i] != ']' && chars[i] != '\n' {
                    i += 1;
                }
                if i < chars.len() && chars[i] == ']' {
                    i += 1;
                }
                out.push(Token::Tag(name, value));
            }
            '$' => {
                i += 1;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
            }
            _ => {
                let start = i;
                while i < chars.len() && !chars[i].is_whitespace() && !"[]{}();".contains(chars[i]) {
                    i += 1;
                }
                let word: String = chars[start..i].iter().collect();
                classify_word(&word, &mut out);
            }
        }
    }
    out
}

fn classify_word(word: &str, out: &mut Vec<Token>) {
    if matches!(word, "1-0" | "0-1" | "1/2-1/2" | "*") {
        out.push(Token::Result(word.to_owned()));
        return;
    }
    let digits = word.chars().take_while(|c| c.is_ascii_digit()).count();
    let mut rest = word;
    if digits > 0 && word[digits..].starts_with('.') {
        out.push(Token::MoveNumber);
        rest = word[digits..].trim_start_matches('.');
    } else if word.starts_with("...") {
        rest = word.trim_start_matches('.');
    }
    if rest.is_empty() {
        return;
    }
    let san = rest.trim_end_matches(['!', '?']);
    if san.is_empty() {
        return;
    }
    let ok = san
        .chars()
        .all(|c| c.is_ascii_alphanumeric() || matches!(c, '-' | '=' | '+' | '#' | 'x' | ':'));
    if ok && san.chars().any(|c| c.is_ascii_digit() || c == 'O') {
        out.push(Token::San(san.to_owned()));
    } else {
        out.push(Token::Bad(word.to_owned()));
    }
}

fn parse_elo(v: &str) -> Option<u32> {
    v.trim().parse::<u32>().ok().filter(|&e| e > 0)
}

fn parse_eco(v: &str) -> Option<String> {
    let v = v.trim();
    let b = v.as_bytes();
    (b.len() == 3 && (b'A'..=b'E').contains(&b[0]) && b[1].is_ascii_digit() && b[2].is_ascii_digit())
        .then(|| v.to_owned())
}

/// Converts one resolved board move into one record, or two for a castle.
pub(crate) fn board_move_records(
    game_id: &str,
    move_number: u32,
    color: Color,
    m: &BoardMove,
    is_check: bool,
) -> Vec<MoveRecord> {
    let base = MoveRecord {
        game_id: game_id.to_owned(),
        move_number: Some(move_number),
        color,
        piece: m.piece,
        from: m.from,
        to: m.to,
        is_capture: m.is_capture(),
        special: m.special,
        is_check,
        source: Source::Human,
        prompt: None,
        batch: None,
        line: None,
    };
    let mut out = vec![base.clone()];
    if let Some((from, to)) = castle_rook_squares(color, m.special) {
        out.push(MoveRecord {
            piece: PieceKind::Rook,
            from,
            to,
            is_capture: false,
            special: Special::None,
            is_check: false,
            ..base
        });
    }
    out
}

struct GameBuilder {
    index: usize,
    id: String,
    meta: GameMeta,
    pos: Position,
    plies: u32,
    moves: Vec<MoveRecord>,
    result_token: Option<String>,
    has_result_tag: bool,
}

impl GameBuilder {
    fn new(index: usize, prefix: &str) -> Self {
        GameBuilder {
            index,
            id: format!("{prefix}{:05}", index + 1),
            meta: GameMeta::default(),
            pos: Position::start(),
            plies: 0,
            moves: Vec::new(),
            result_token: None,
            has_result_tag: false,
        }
    }

    fn tag(&mut self, name: &str, value: &str) {
        match name {
            "Date" => self.meta.date = GameDate::parse_pgn(value),
            "White" => self.meta.white_name = value.trim().to_owned(),
            "Black" => self.meta.black_name = value.trim().to_owned(),
            "Result" => {
                self.meta.result = GameResult::from_pgn(value);
                self.has_result_tag = true;
            }
            "WhiteElo" => self.meta.white_elo = parse_elo(value),
            "BlackElo" => self.meta.black_elo = parse_elo(value),
            "ECO" => self.meta.eco_code = parse_eco(value),
            _ => {}
        }
    }

    fn san(&mut self, san: &str) -> Result<(), PgnError> {
        let color = self.pos.turn();
        let move_number = self.plies / 2 + 1;
        let m = self.pos.parse_san(san).map_err(|e| PgnError::Disambiguation {
            game: self.index,
            move_number,
            san: san.to_owned(),
            reason: e.0,
        })?;
        self.pos.play(&m);
        let is_check = self.pos.in_check(self.pos.turn());
        self.moves
            .extend(board_move_records(&self.id, move_number, color, &m, is_check));
        self.plies += 1;
        Ok(())
    }

    fn finish(mut self) -> GameRecord {
        if !self.has_result_tag {
            if let Some(r) = &self.result_token {
                self.meta.result = GameResult::from_pgn(r);
            }
        }
        self.meta.move_count = self.plies.div_ceil(2);
        GameRecord {
            id: self.id,
            meta: self.meta,
            moves: self.moves,
        }
    }
}

/// Parses every game, collecting per-game failures instead of stopping.
pub fn parse_pgn_lenient(text: &str, id_prefix: &str) -> (Vec<GameRecord>, Vec<PgnError>) {
    let mut games = Vec::new();
    let mut errors = Vec::new();
    let mut index = 0usize;
    let mut current: Option<GameBuilder> = None;
    let mut in_movetext = false;
    let mut failed = false;

    let close = |b: Option<GameBuilder>, failed: bool, games: &mut Vec<GameRecord>| {
        if let Some(b) = b {
            if !failed {
                games.push(b.finish());
            }
        }
    };

    for tok in tokenize(text) {
        match tok {
            Token::Tag(name, value) => {
                if in_movetext || current.is_none() {
                    close(current.take(), failed, &mut games);
                    current = Some(GameBuilder::new(index, id_prefix));
                    index += 1;
                    in_movetext = false;
                    failed = false;
                }
                if let Some(b) = current.as_mut() {
                    b.tag(&name, &value);
                }
            }
            Token::Result(r) => {
                let mut b = current.take().unwrap_or_else(|| {
                    index += 1;
                    GameBuilder::new(index - 1, id_prefix)
                });
                b.result_token = Some(r);
                close(Some(b), failed, &mut games);
                in_movetext = false;
                failed = false;
            }
            other => {
                let b = current.get_or_insert_with(|| {
                    index += 1;
                    GameBuilder::new(index - 1, id_prefix)
                });
                in_movetext = true;
                if failed {
                    continue;
                }
                let res = match other {
                    Token::MoveNumber => Ok(()),
                    Token::San(s) => b.san(&s),
                    Token::Bad(t) => Err(PgnError::Syntax { game: b.index, token: t }),
                    Token::Tag(..) | Token::Result(_) => unreachable!(),
                };
                if let Err(e) = res {
                    errors.push(e);
                    failed = true;
                }
            }
        }
    }
    close(current.take(), failed, &mut games);
    (games, errors)
}

/// Parses a PGN document, failing on the first game that cannot be resolved.
pub fn parse_pgn(text: &str) -> Result<Vec<GameRecord>, PgnError> {
    let (games, mut errors) = parse_pgn_lenient(text, "g");
    if errors.is_empty() {
        Ok(games)
    } else {
        Err(errors.remove(0))
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct AuditReport {
    pub total: u64,
    pub illegal: u64,
    pub total_by_piece: [u64; 6],
    pub illegal_by_piece: [u64; 6],
    pub illegal_moves: Vec<MoveRecord>,
}

/// Checks every move of every game against the geometric oracle.
pub fn legality_audit(games: &[GameRecord]) -> AuditReport {
    audit_moves(games.iter().flat_map(|g| g.moves.iter()))
}

pub fn audit_moves<'a>(moves: impl IntoIterator<Item = &'a MoveRecord>) -> AuditReport {
    let mut report = AuditReport::default();
    for m in moves {
        let p = m.piece.index();
        report.total += 1;
        report.total_by_piece[p] += 1;
        if !m.is_legal() {
            report.illegal += 1;
            report.illegal_by_piece[p] += 1;
            report.illegal_moves.push(m.clone());
        }
    }
    report
}

/// The 58-move game used throughout the tests and documentation.
pub const EXAMPLE_GAME_PGN: &str = r#"[Date "2020.04.21"]
[White "Nepomniachtchi,Ian"]
[Black "Vachier Lagrave,M"]
[Result "0-1"]
[WhiteElo "2784"]
[BlackElo "2778"]
[ECO "A11"]

1. c4 c6 2. Nf3 d5 3. g3 Nf6 4. Bg2 dxc4 5. O-O Nbd7 6. Na3 Nb6 7. Qc2 Be6 8. Ng5 Bg4
9. Nxc4 Bxe2 10. Ne5 Bh5 11. Re1 h6 12. Ngxf7 Bxf7 13. b4 a6 14. a4 g5 15. Ba3 Bg7
16. Ng6 Bxg6 17. Qxg6+ Kf8 18. b5 Nbd5 19. bxc6 bxc6 20. Rab1 Qd7 21. Rb3 Kg8
22. Reb1 Qe8 23. Qd3 Rh7 24. Bb2 Bf8 25. Be5 Nd7 26. Bxd5+ cxd5 27. Qxd5+ e6
28. Qd4 Rf7 29. Bd6 Bxd6 30. Qxd6 Qe7 31. Qc6 Raf8 32. Re3 Rxf2 33. Rxe6 Qf7
34. Qe4 Nf6 35. Qc4 Rf3 36. Kg2 g4 37. Rbb6 Kh8 38. h3 Nh7 39. Qd4+ Qg7
40. Qxg7+ Kxg7 41. Re7+ Kh8 42. Re2 gxh3+ 43. Kxh3 R3f6 44. Rb7 Rg6 45. Ra7 Ng5+
46. Kg2 Rgf6 47. d4 R8f7 48. Ra8+ Kg7 49. d5 Rd7 50. Rd2 Rfd6 51. g4 Ne4 52. Rc2 Nf6
53. Rc6 Rxd5 54. Raxa6 Rd2+ 55. Kg3 R7d3+ 56. Kf4 Rf2+ 57. Ke5 Re2+ 58. Kf4 Nd5+ 0-1
"#;
