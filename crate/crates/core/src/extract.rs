//! Recovers moves and game metadata from narrative text.
//!
//! The grammar is compiled from a [`TemplateSet`]: each template becomes an
//! anchored pattern whose slots are capture groups. Text is split into
//! sentences at a period followed by whitespace; anything that matches no
//! pattern, or names a square off the board, is reported as an unparsed span
//! instead of failing the whole text.

use std::collections::BTreeMap;
use std::sync::OnceLock;

use regex::Regex;
use serde::{Deserialize, Serialize};

use crate::chess::{square_from_name, Color, PieceKind, Special, Square};
use crate::narrator::TemplateSet;
use crate::record::{GameResult, MoveRecord, Source};

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct MetaFragments {
    pub date: Option<String>,
    pub white_name: Option<String>,
    pub black_name: Option<String>,
    pub white_elo: Option<u32>,
    pub black_elo: Option<u32>,
    pub result: Option<GameResult>,
    pub move_count: Option<u32>,
    pub opening: Option<String>,
}

impl MetaFragments {
    pub fn is_empty(&self) -> bool {
        *self == MetaFragments::default()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    pub prompt: String,
    pub batch: u32,
    pub line: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ExtractionResult {
    pub moves: Vec<MoveRecord>,
    pub meta: MetaFragments,
    /// Byte offset and length of every sentence that was not understood.
    pub unparsed_spans: Vec<(usize, usize)>,
    pub line_provenance: Option<Provenance>,
}

impl ExtractionResult {
    /// Stamps the generation provenance onto the result and its moves.
    pub fn with_provenance(mut self, prompt: &str, batch: u32, line: u32) -> ExtractionResult {
        for m in &mut self.moves {
            m.prompt = Some(prompt.to_owned());
            m.batch = Some(batch);
            m.line = Some(line);
        }
        self.line_provenance = Some(Provenance {
            prompt: prompt.to_owned(),
            batch,
            line,
        });
        self
    }

    pub fn with_game_id(mut self, id: &str) -> ExtractionResult {
        for m in &mut self.moves {
            m.game_id = id.to_owned();
        }
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum PlyKind {
    Move,
    Capture,
    Castle,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum MetaKind {
    Header,
    EloHigher,
    EloLower,
    EloSingle,
    ResultWin,
    ResultDraw,
    ResultUnknown,
    Opening,
    EndWin,
    EndDraw,
    EndUnknown,
    Check,
}

#[derive(Debug, Clone)]
struct Pattern<K> {
    kind: K,
    re: Regex,
    slots: Vec<String>,
}

fn slot_pattern(slot: &str) -> &'static str {
    match slot {
        "Color" => "(White|Black)",
        "color" | "opp" => "(white|black)",
        "piece" => "(pawn|rook|knight|bishop|queen|king)",
        "from" | "to" | "king_from" | "king_to" | "rook_from" | "rook_to" => "([a-z][0-9]+)",
        "n" | "elo" | "moves" => "([0-9]+)",
        "side" => "(kingside|queenside)",
        "date" => "((?:[A-Z][a-z]+ [0-9]{1,2}, )?(?:[A-Z][a-z]+ )?[0-9]{4}|an unknown date)",
        _ => "(.+?)",
    }
}

fn template_regex(template: &str) -> (String, Vec<String>) {
    let slot_re = Regex::new(r"\{([A-Za-z_]+)\}").unwrap();
    let mut out = String::new();
    let mut last = 0;
    let mut slots = Vec::new();
    for c in slot_re.captures_iter(template) {
        let m = c.get(0).unwrap();
        out.push_str(&regex::escape(&template[last..m.start()]));
        out.push_str(slot_pattern(&c[1]));
        slots.push(c[1].to_owned());
        last = m.end();
    }
    out.push_str(&regex::escape(&template[last..]));
    (out, slots)
}

/// Sentence grammar compiled from a template set.
#[derive(Debug, Clone)]
pub struct Extractor {
    prefix: Regex,
    plies: Vec<Pattern<PlyKind>>,
    meta: Vec<Pattern<MetaKind>>,
}

fn by_player_last<K>(mut v: Vec<Pattern<K>>) -> Vec<Pattern<K>> {
    v.sort_by_key(|p| p.slots.iter().any(|s| s == "player"));
    v
}

impl Extractor {
    pub fn new(t: &TemplateSet) -> Extractor {
        let prefix_alts: Vec<String> = t.move_number.iter().map(|p| template_regex(p).0).collect();
        let prefix = Regex::new(&format!("^(?:{})", prefix_alts.join("|"))).unwrap();
        let promo: Vec<String> = t.promotion.iter().map(|p| regex::escape(p)).collect();
        let tail = format!("(?P<promo>{})?(?:, (?P<flavor>[^.]+))?\\.$", promo.join("|"));

        let mut plies = Vec::new();
        for (kind, list) in [(PlyKind::Castle, &t.castle), (PlyKind::Capture, &t.capture), (PlyKind::Move, &t.moves)] {
            let mut group = Vec::new();
            for tpl in list {
                let (body, slots) = template_regex(tpl);
                group.push(Pattern {
                    kind,
                    re: Regex::new(&format!("^{body}{tail}")).unwrap(),
                    slots,
                });
            }
            plies.extend(by_player_last(group));
        }

        let mut meta = Vec::new();
        let events: [(MetaKind, &Vec<String>); 13] = [
            (MetaKind::Check, &t.check),
            (MetaKind::Header, &t.header),
            (MetaKind::EloHigher, &t.elo_higher),
            (MetaKind::EloLower, &t.elo_lower),
            (MetaKind::EloSingle, &t.elo_single),
            (MetaKind::ResultWin, &t.result_win),
            (MetaKind::ResultWin, &t.result_upset),
            (MetaKind::ResultDraw, &t.result_draw),
            (MetaKind::ResultUnknown, &t.result_unknown),
            (MetaKind::Opening, &t.opening),
            (MetaKind::EndDraw, &t.game_end_draw),
            (MetaKind::EndUnknown, &t.game_end_unknown),
            (MetaKind::EndWin, &t.game_end_win),
        ];
        for (kind, list) in events {
            for tpl in list {
                let (body, slots) = template_regex(tpl);
                meta.push(Pattern {
                    kind,
                    re: Regex::new(&format!("^{body}$")).unwrap(),
                    slots,
                });
            }
        }
        Extractor { prefix, plies, meta }
    }

    /// Extracts every move, in text order.
    pub fn extract(&self, text: &str, source: Source) -> ExtractionResult {
        let mut state = State::default();
        let mut out = ExtractionResult::default();
        for (start, sentence) in sentences(text) {
            let complete = sentence.ends_with('.');
            let normalized = sentence.replace("higer-ranked", "higher-ranked");
            let understood = complete && self.sentence(&normalized, source, &mut state, &mut out);
            if !understood {
                out.unparsed_spans.push((start, sentence.len()));
            }
        }
        out
    }

    fn sentence(&self, s: &str, source: Source, state: &mut State, out: &mut ExtractionResult) -> bool {
        let (number, body) = match self.prefix.captures(s) {
            Some(c) => {
                let n = c.iter().skip(1).flatten().next().and_then(|m| m.as_str().parse::<u32>().ok());
                (n, &s[c.get(0).unwrap().end()..])
            }
            None => (None, s),
        };
        for p in &self.plies {
            let Some(c) = p.re.captures(body) else { continue };
            let slots: BTreeMap<&str, &str> = p
                .slots
                .iter()
                .zip(c.iter().skip(1))
                .filter_map(|(k, v)| Some((k.as_str(), v?.as_str())))
                .collect();
            match self.ply(p.kind, &slots, c.name("promo").is_some(), number, source, state) {
                Ok(records) => {
                    state.last_ply = Some(out.moves.len());
                    out.moves.extend(records);
                    return true;
                }
                Err(PlyFailure::BadSquare) => return false,
                Err(PlyFailure::NoColor) => continue,
            }
        }
        if number.is_some() {
            return false;
        }
        self.meta_sentence(s, state, out)
    }

    fn ply(
        &self,
        kind: PlyKind,
        slots: &BTreeMap<&str, &str>,
        promoted: bool,
        number: Option<u32>,
        source: Source,
        state: &mut State,
    ) -> Result<Vec<MoveRecord>, PlyFailure> {
        let color = match (slots.get("Color"), slots.get("color")) {
            (Some(c), _) | (None, Some(c)) => Color::from_name(c).ok_or(PlyFailure::NoColor)?,
            (None, None) => {
                let name = slots.get("player").ok_or(PlyFailure::NoColor)?;
                state.color_of(name).ok_or(PlyFailure::NoColor)?
            }
        };
        let square = |slot: &str| -> Result<Square, PlyFailure> {
            square_from_name(slots.get(slot).copied().unwrap_or("")).map_err(|_| PlyFailure::BadSquare)
        };
        let move_number = match (number, color) {
            (Some(n), _) => Some(n),
            (None, Color::Black) => state.move_number,
            (None, Color::White) => None,
        };
        state.move_number = move_number;
        let record = |piece, from, to, is_capture, special| MoveRecord {
            game_id: String::new(),
            move_number,
            color,
            piece,
            from,
            to,
            is_capture,
            special,
            is_check: false,
            source,
            prompt: None,
            batch: None,
            line: None,
        };
        Ok(match kind {
            PlyKind::Castle => {
                let special = if slots.get("side") == Some(&"queenside") {
                    Special::CastleQueenside
                } else {
                    Special::CastleKingside
                };
                vec![
                    record(PieceKind::King, square("king_from")?, square("king_to")?, false, special),
                    record(PieceKind::Rook, square("rook_from")?, square("rook_to")?, false, Special::None),
                ]
            }
            PlyKind::Move | PlyKind::Capture => {
                let piece = slots
                    .get("piece")
                    .and_then(|p| PieceKind::from_name(p))
                    .ok_or(PlyFailure::NoColor)?;
                let special = if promoted { Special::Promotion } else { Special::None };
                vec![record(piece, square("from")?, square("to")?, kind == PlyKind::Capture, special)]
            }
        })
    }

    fn meta_sentence(&self, s: &str, state: &mut State, out: &mut ExtractionResult) -> bool {
        for p in &self.meta {
            let Some(c) = p.re.captures(s) else { continue };
            let slot = |name: &str| -> Option<String> {
                let i = p.slots.iter().position(|x| x == name)?;
                c.get(i + 1).map(|m| m.as_str().to_owned())
            };
            let meta = &mut out.meta;
            match p.kind {
                MetaKind::Check => {
                    if let Some(i) = state.last_ply {
                        out.moves[i].is_check = true;
                    }
                }
                MetaKind::Header => {
                    state.reset();
                    meta.date = slot("date");
                    meta.white_name = slot("white");
                    meta.black_name = slot("black");
                    state.white = meta.white_name.clone();
                    state.black = meta.black_name.clone();
                }
                MetaKind::EloHigher | MetaKind::EloLower | MetaKind::EloSingle => {
                    let elo = slot("elo").and_then(|e| e.parse().ok());
                    match slot("name").and_then(|n| state.color_of(&n)) {
                        Some(Color::White) => meta.white_elo = elo,
                        Some(Color::Black) => meta.black_elo = elo,
                        None => {}
                    }
                }
                MetaKind::ResultWin => {
                    meta.move_count = slot("moves").and_then(|m| m.parse().ok());
                    meta.result = match slot("winner").and_then(|n| state.color_of(&n)) {
                        Some(Color::White) => Some(GameResult::WhiteWin),
                        Some(Color::Black) => Some(GameResult::BlackWin),
                        None => None,
                    };
                }
                MetaKind::ResultDraw | MetaKind::ResultUnknown => {
                    meta.move_count = slot("moves").and_then(|m| m.parse().ok());
                    meta.result = Some(if p.kind == MetaKind::ResultDraw {
                        GameResult::Draw
                    } else {
                        GameResult::Unknown
                    });
                }
                MetaKind::Opening => meta.opening = slot("opening"),
                MetaKind::EndWin | MetaKind::EndDraw | MetaKind::EndUnknown => {
                    let winner = slot("Color")
                        .and_then(|c| Color::from_name(&c))
                        .or_else(|| slot("winner").and_then(|n| state.color_of(&n)));
                    if meta.result.is_none() {
                        meta.result = match (p.kind, winner) {
                            (MetaKind::EndDraw, _) => Some(GameResult::Draw),
                            (_, Some(Color::White)) => Some(GameResult::WhiteWin),
                            (_, Some(Color::Black)) => Some(GameResult::BlackWin),
                            _ => None,
                        };
                    }
                    state.move_number = None;
                    state.last_ply = None;
                }
            }
            return true;
        }
        false
    }
}

enum PlyFailure {
    NoColor,
    BadSquare,
}

#[derive(Debug, Default)]
struct State {
    white: Option<String>,
    black: Option<String>,
    move_number: Option<u32>,
    last_ply: Option<usize>,
}

impl State {
    fn reset(&mut self) {
        *self = State::default();
    }

    fn color_of(&self, name: &str) -> Option<Color> {
        let w = self.white.as_deref() == Some(name);
        let b = self.black.as_deref() == Some(name);
        match (w, b) {
            (true, false) => Some(Color::White),
            (false, true) => Some(Color::Black),
            _ => None,
        }
    }
}

/// Sentences with their byte offsets; a sentence ends at a period followed by
/// whitespace or the end of the text. A trailing fragment has no period.
fn sentences(text: &str) -> Vec<(usize, &str)> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut start = None;
    for (i, &b) in bytes.iter().enumerate() {
        if start.is_none() {
            if b.is_ascii_whitespace() {
                continue;
            }
            start = Some(i);
        }
        if b == b'.' && bytes.get(i + 1).is_none_or(|n| n.is_ascii_whitespace()) {
            let s = start.take().unwrap();
            out.push((s, &text[s..=i]));
        }
    }
    if let Some(s) = start {
        let frag = text[s..].trim_end();
        if !frag.is_empty() {
            out.push((s, frag));
        }
    }
    out
}

fn default_extractor() -> &'static Extractor {
    static E: OnceLock<Extractor> = OnceLock::new();
    E.get_or_init(|| Extractor::new(&TemplateSet::default()))
}

/// Extracts moves with the default grammar.
pub fn extract_moves(text: &str, source: Source) -> ExtractionResult {
    default_extractor().extract(text, source)
}

/// Player names, ratings, result and opening mentioned in the text.
pub fn extract_meta(text: &str) -> MetaFragments {
    default_extractor().extract(text, Source::Human).meta
}
