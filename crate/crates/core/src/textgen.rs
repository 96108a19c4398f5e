//! Text generators: a remote inference endpoint and a statistics-driven
//! surrogate whose illegal-move rate is known in advance.

use std::time::Duration;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::chess::{castle_rook_squares, is_legal_geometry, Color, MoveGeometry, PieceKind, Special, Square};
use crate::narrator::{fill, opening_family, pick, ply_sentence, Players, TemplateSet};
use crate::record::{plies, MoveRecord, Source};

/// Environment variable holding the bearer token for the remote endpoint.
pub const TOKEN_ENV: &str = "BOARDMAP_API_TOKEN";

#[derive(Debug, Error)]
pub enum TextGenError {
    #[error("backend unreachable: {0}")]
    BackendUnreachable(String),
    #[error("backend protocol error: {0}")]
    BackendProtocol(String),
    #[error("training corpus is empty")]
    EmptyCorpus,
    #[error("training move {0} is not human-sourced")]
    NotHuman(usize),
    #[error("injection rate {0} outside [0, 1)")]
    BadRate(f64),
    #[error("invalid request: {0}")]
    BadRequest(&'static str),
}

impl TextGenError {
    pub fn is_retriable(&self) -> bool {
        matches!(self, TextGenError::BackendUnreachable(_))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerationRequest {
    pub prompt: String,
    pub num_lines: u32,
    pub max_chars_per_line: u32,
    pub seed: u64,
    /// Forwarded to remote backends only.
    pub temperature: f64,
}

impl GenerationRequest {
    pub fn new(prompt: &str, seed: u64) -> GenerationRequest {
        GenerationRequest {
            prompt: prompt.to_owned(),
            num_lines: 100,
            max_chars_per_line: 100,
            seed,
            temperature: 1.0,
        }
    }

    pub fn validate(&self) -> Result<(), TextGenError> {
        if self.num_lines == 0 {
            return Err(TextGenError::BadRequest("num_lines must be positive"));
        }
        if self.max_chars_per_line == 0 {
            return Err(TextGenError::BadRequest("max_chars_per_line must be positive"));
        }
        if self.temperature.is_nan() || self.temperature <= 0.0 {
            return Err(TextGenError::BadRequest("temperature must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LineSource {
    Remote,
    Surrogate,
}

/// One generated line; `text` includes the prompt.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GeneratedLine {
    pub prompt: String,
    pub text: String,
    pub batch_index: u32,
    pub line_index: u32,
    pub source: LineSource,
}

pub trait Backend: Sync {
    /// Generates one batch of `req.num_lines` lines.
    fn generate(&self, req: &GenerationRequest, batch_index: u32) -> Result<Vec<GeneratedLine>, TextGenError>;
}

pub fn generate(req: &GenerationRequest, backend: &dyn Backend) -> Result<Vec<GeneratedLine>, TextGenError> {
    backend.generate(req, 0)
}

/// Seed for batch `batch` of a run seeded with `seed`.
pub fn batch_seed(seed: u64, batch: u32) -> u64 {
    let mut h = Sha256::new();
    h.update(seed.to_le_bytes());
    h.update(b"batch");
    h.update(batch.to_le_bytes());
    let d = h.finalize();
    u64::from_le_bytes(d[..8].try_into().expect("digest is 32 bytes"))
}

/// Runs `batches` batches with at most `max_in_flight` running at once.
/// Each batch uses its own derived seed; results come back in batch order.
pub fn generate_batches(
    req: &GenerationRequest,
    batches: u32,
    max_in_flight: usize,
    backend: &dyn Backend,
) -> Result<Vec<GeneratedLine>, TextGenError> {
    req.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(max_in_flight.max(1))
        .build()
        .map_err(|e| TextGenError::BackendUnreachable(e.to_string()))?;
    let results: Vec<Result<Vec<GeneratedLine>, TextGenError>> = pool.install(|| {
        (0..batches)
            .into_par_iter()
            .map(|b| {
                let r = GenerationRequest {
                    seed: batch_seed(req.seed, b),
                    ..req.clone()
                };
                backend.generate(&r, b)
            })
            .collect()
    });
    let mut out = Vec::new();
    for r in results {
        out.extend(r?);
    }
    Ok(out)
}

/// The eight probe prompts; the last four are defaults that configs may override.
pub fn prompt_battery() -> Vec<String> {
    [
        "The game begins as",
        "In move 20 ",
        "Black takes white ",
        "Check. ",
        "wins. ",
        "White moves ",
        "Black moves ",
        "In move 1 ",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect()
}

/// Cuts `text` after the last sentence that ends within `budget` bytes.
pub fn truncate_to_sentence(text: &str, budget: usize) -> &str {
    if text.len() <= budget {
        return text;
    }
    let head = &text[..text.floor_char_boundary(budget)];
    match head.rfind('.') {
        Some(i) => &text[..=i],
        None => "",
    }
}

#[derive(Serialize)]
struct RemoteRequest<'a> {
    prompt: &'a str,
    n: u32,
    max_new_chars: u32,
    seed: u64,
    temperature: f64,
}

#[derive(Deserialize)]
struct RemoteResponse {
    lines: Vec<String>,
}

/// JSON-over-HTTP client. The endpoint returns continuations; each line's
/// text is the prompt followed by the continuation exactly as received.
pub struct RemoteBackend {
    url: String,
    token: Option<String>,
    client: reqwest::blocking::Client,
}

impl RemoteBackend {
    pub fn new(url: &str, token: Option<String>, timeout: Duration) -> Result<RemoteBackend, TextGenError> {
        let client = reqwest::blocking::Client::builder()
            .timeout(timeout)
            .build()
            .map_err(|e| TextGenError::BackendUnreachable(e.to_string()))?;
        Ok(RemoteBackend {
            url: url.to_owned(),
            token,
            client,
        })
    }

    /// Reads the bearer token from [`TOKEN_ENV`] when set.
    pub fn from_env(url: &str) -> Result<RemoteBackend, TextGenError> {
        let token = std::env::var(TOKEN_ENV).ok().filter(|t| !t.is_empty());
        RemoteBackend::new(url, token, Duration::from_secs(120))
    }
}

impl Backend for RemoteBackend {
    fn generate(&self, req: &GenerationRequest, batch_index: u32) -> Result<Vec<GeneratedLine>, TextGenError> {
        req.validate()?;
        let mut call = self.client.post(&self.url).json(&RemoteRequest {
            prompt: &req.prompt,
            n: req.num_lines,
            max_new_chars: req.max_chars_per_line,
            seed: req.seed,
            temperature: req.temperature,
        });
        if let Some(t) = &self.token {
            call = call.bearer_auth(t);
        }
        let resp = call.send().map_err(|e| TextGenError::BackendUnreachable(e.to_string()))?;
        let status = resp.status();
        if status.is_server_error() {
            return Err(TextGenError::BackendUnreachable(format!("status {status}")));
        }
        if !status.is_success() {
            return Err(TextGenError::BackendProtocol(format!("status {status}")));
        }
        let body = resp.text().map_err(|e| TextGenError::BackendUnreachable(e.to_string()))?;
        let parsed: RemoteResponse = serde_json::from_str(&body).map_err(|e| TextGenError::BackendProtocol(e.to_string()))?;
        if parsed.lines.len() != req.num_lines as usize {
            return Err(TextGenError::BackendProtocol(format!(
                "asked for {} lines, got {}",
                req.num_lines,
                parsed.lines.len()
            )));
        }
        Ok(parsed
            .lines
            .into_iter()
            .enumerate()
            .map(|(i, l)| GeneratedLine {
                prompt: req.prompt.clone(),
                text: format!("{}{}", req.prompt, l),
                batch_index,
                line_index: i as u32,
                source: LineSource::Remote,
            })
            .collect())
    }
}

/// A ply shape observed in training: the moving piece's record, with the
/// rook half of castles implied.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct PlyShape {
    pub piece: PieceKind,
    pub from: Square,
    pub to: Square,
    pub capture: bool,
    pub special: Special,
    pub check: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct ColorTable {
    /// Indexed by `PieceKind::index`.
    piece_counts: [u64; 6],
    /// Observed plies with their counts, per piece.
    transitions: [Vec<(PlyShape, u64)>; 6],
}

impl ColorTable {
    fn plies(&self) -> u64 {
        self.piece_counts.iter().sum()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurrogateModel {
    pub illegal_injection_rate: f64,
    tables: [ColorTable; 2],
    #[serde(skip)]
    pub templates: TemplateSet,
}

fn color_slot(c: Color) -> usize {
    match c {
        Color::White => 0,
        Color::Black => 1,
    }
}

/// Builds a surrogate from human move records. Each generated move record,
/// including both halves of a castle, is made illegal with chance `epsilon`.
pub fn train_surrogate(moves: &[MoveRecord], epsilon: f64) -> Result<SurrogateModel, TextGenError> {
    if !(0.0..1.0).contains(&epsilon) {
        return Err(TextGenError::BadRate(epsilon));
    }
    if moves.is_empty() {
        return Err(TextGenError::EmptyCorpus);
    }
    if let Some(i) = moves.iter().position(|m| m.source != Source::Human) {
        return Err(TextGenError::NotHuman(i));
    }
    let mut counts: [std::collections::BTreeMap<PlyShape, u64>; 2] = Default::default();
    for ply in plies(moves) {
        let m = &ply[0];
        let shape = PlyShape {
            piece: m.piece,
            from: m.from,
            to: m.to,
            capture: m.is_capture,
            special: m.special,
            check: ply.iter().any(|r| r.is_check),
        };
        *counts[color_slot(m.color)].entry(shape).or_default() += 1;
    }
    let tables = counts.map(|c| {
        let mut piece_counts = [0u64; 6];
        let mut transitions: [Vec<(PlyShape, u64)>; 6] = Default::default();
        for (shape, n) in c {
            piece_counts[shape.piece.index()] += n;
            transitions[shape.piece.index()].push((shape, n));
        }
        ColorTable { piece_counts, transitions }
    });
    Ok(SurrogateModel {
        illegal_injection_rate: epsilon,
        tables,
        templates: TemplateSet::default(),
    })
}

/// What the first sentence of a line has to look like to continue the prompt.
enum PromptPlan {
    /// The prompt already ends a sentence.
    Free,
    /// The prompt is the start of an opening sentence.
    Opening,
    /// The prompt is the start of a move sentence, possibly naming a move number.
    Move { number: Option<u32> },
}

fn plan_prompt(prompt: &str, t: &TemplateSet) -> PromptPlan {
    let p = prompt.trim_end();
    if p.is_empty() || p.ends_with('.') {
        return PromptPlan::Free;
    }
    if t.opening.iter().any(|o| o.starts_with(p)) {
        return PromptPlan::Opening;
    }
    let digits: String = p
        .chars()
        .skip_while(|c| !c.is_ascii_digit())
        .take_while(|c| c.is_ascii_digit())
        .collect();
    PromptPlan::Move {
        number: digits.parse().ok(),
    }
}

/// Does `sentence` continue `prompt` at a word boundary?
fn continues(sentence: &str, prompt: &str) -> bool {
    sentence.starts_with(prompt) && !sentence[prompt.len()..].starts_with(|c: char| c.is_alphanumeric())
}

const OPENING_CODES: &[&str] = &[
    "A00", "A01", "A02", "A04", "A10", "A40", "A45", "A51", "A53", "A56", "A80", "B00", "B01", "B02", "B06", "B07", "B10",
    "B20", "C00", "C20", "C21", "C23", "C25", "C30", "C40", "C41", "C42", "C44", "C45", "C50", "C51", "C53", "C60", "D00",
    "D06", "D07", "D10", "D20", "D30", "D70", "D80", "E00", "E10", "E12", "E20", "E60",
];

impl SurrogateModel {
    pub fn with_templates(mut self, t: TemplateSet) -> SurrogateModel {
        self.templates = t;
        self
    }

    /// Ply-level piece frequencies for one colour; they sum to 1 when the
    /// colour has any plies.
    pub fn piece_frequencies(&self, c: Color) -> [f64; 6] {
        let t = &self.tables[color_slot(c)];
        let total = t.plies().max(1) as f64;
        t.piece_counts.map(|n| n as f64 / total)
    }

    /// Observed plies of one piece with their conditional probabilities.
    pub fn transitions(&self, c: Color, piece: PieceKind) -> Vec<(PlyShape, f64)> {
        let list = &self.tables[color_slot(c)].transitions[piece.index()];
        let total: u64 = list.iter().map(|(_, n)| n).sum();
        list.iter().map(|(s, n)| (*s, *n as f64 / total as f64)).collect()
    }

    fn sample_shape(&self, c: Color, rng: &mut impl Rng) -> Option<PlyShape> {
        let t = &self.tables[color_slot(c)];
        if t.plies() == 0 {
            return None;
        }
        let piece = WeightedIndex::new(t.piece_counts).ok()?.sample(rng);
        let list = &t.transitions[piece];
        let i = WeightedIndex::new(list.iter().map(|(_, n)| *n)).ok()?.sample(rng);
        Some(list[i].0)
    }

    /// With chance ε, moves the record to a uniformly random destination its
    /// geometry forbids.
    fn perturb(&self, m: &mut MoveRecord, rng: &mut impl Rng) {
        if rng.random::<f64>() >= self.illegal_injection_rate {
            return;
        }
        let illegal: Vec<Square> = Square::all()
            .filter(|&to| to != m.from && !is_legal_geometry(&MoveGeometry { to, ..m.geometry() }))
            .collect();
        if !illegal.is_empty() {
            m.to = illegal[rng.random_range(0..illegal.len())];
        }
    }

    fn records(shape: PlyShape, c: Color, n: u32) -> Vec<MoveRecord> {
        let base = MoveRecord {
            game_id: String::new(),
            move_number: Some(n),
            color: c,
            piece: shape.piece,
            from: shape.from,
            to: shape.to,
            is_capture: shape.capture,
            special: shape.special,
            is_check: false,
            source: Source::Synthetic,
            prompt: None,
            batch: None,
            line: None,
        };
        let mut out = vec![base.clone()];
        if let Some((from, to)) = castle_rook_squares(c, shape.special) {
            out.push(MoveRecord {
                piece: PieceKind::Rook,
                from,
                to,
                special: Special::None,
                ..base
            });
        }
        out
    }

    /// Renders one ply (and its check sentence) as narration.
    fn ply_text(&self, shape: PlyShape, c: Color, n: u32, numbered: bool, rng: &mut impl Rng) -> String {
        let mut recs = SurrogateModel::records(shape, c, n);
        for r in &mut recs {
            self.perturb(r, rng);
        }
        let mut s = ply_sentence(&self.templates, &recs, &Players::anonymous(), numbered, rng);
        if shape.check {
            s.push(' ');
            s.push_str(pick(rng, &self.templates.check));
        }
        s
    }

    fn numbered(&self, c: Color, rng: &mut impl Rng) -> bool {
        c == Color::White || rng.random::<f64>() < self.templates.black_number_rate
    }

    /// Generates one line. Sentences are added while the text is shorter than
    /// `budget`; the sentence that crosses the budget is completed.
    pub fn generate_line(&self, prompt: &str, budget: usize, rng: &mut impl Rng) -> String {
        let p = prompt.trim_end();
        let mut text = p.to_owned();
        let mut color = if rng.random::<bool>() { Color::White } else { Color::Black };
        let mut n: u32 = rng.random_range(1..=40);
        match plan_prompt(prompt, &self.templates) {
            PromptPlan::Free => {}
            PromptPlan::Opening => {
                let family = opening_family(OPENING_CODES[rng.random_range(0..OPENING_CODES.len())]).unwrap_or("English");
                let usable: Vec<&String> = self.templates.opening.iter().filter(|o| o.starts_with(p)).collect();
                let s = fill(usable[rng.random_range(0..usable.len())], |slot| (slot == "opening").then(|| family.to_owned()));
                text = s;
                color = Color::White;
                n = 1;
            }
            PromptPlan::Move { number } => {
                if let Some(k) = number {
                    n = k.max(1);
                }
                for _ in 0..4096 {
                    let c = if rng.random::<bool>() { Color::White } else { Color::Black };
                    let Some(shape) = self.sample_shape(c, rng) else { break };
                    let s = self.ply_text(shape, c, n, number.is_some(), rng);
                    if continues(&s, p) {
                        text = s;
                        color = c.opponent();
                        if c == Color::Black {
                            n += 1;
                        }
                        break;
                    }
                }
            }
        }
        while text.len() < budget {
            let Some(shape) = self.sample_shape(color, rng) else { break };
            let numbered = self.numbered(color, rng);
            let s = self.ply_text(shape, color, n, numbered, rng);
            if !text.is_empty() {
                text.push(' ');
            }
            text.push_str(&s);
            if color == Color::Black {
                n += 1;
            }
            color = color.opponent();
        }
        text
    }
}

/// Random stream for one line of one batch.
pub fn line_rng(seed: u64, batch: u32, line: u32) -> ChaCha8Rng {
    let mut h = Sha256::new();
    h.update(seed.to_le_bytes());
    h.update(batch.to_le_bytes());
    h.update(line.to_le_bytes());
    let d = h.finalize();
    let mut bytes = [0u8; 32];
    bytes.copy_from_slice(&d);
    ChaCha8Rng::from_seed(bytes)
}

impl Backend for SurrogateModel {
    fn generate(&self, req: &GenerationRequest, batch_index: u32) -> Result<Vec<GeneratedLine>, TextGenError> {
        req.validate()?;
        Ok((0..req.num_lines)
            .into_par_iter()
            .map(|i| {
                let mut rng = line_rng(req.seed, batch_index, i);
                GeneratedLine {
                    prompt: req.prompt.clone(),
                    text: self.generate_line(&req.prompt, req.max_chars_per_line as usize, &mut rng),
                    batch_index,
                    line_index: i,
                    source: LineSource::Surrogate,
                }
            })
            .collect())
    }
}
