//! Append-only move database: one directory per corpus tag holding
//! `moves.ndjson`, `lines.ndjson` and a `manifest.json` sidecar.

use std::collections::HashSet;
use std::fs::{self, File, OpenOptions};
use std::io::{self, BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::chess::{Color, PieceKind};
use crate::record::{MoveRecord, Source};
use crate::textgen::GeneratedLine;

const MOVES: &str = "moves.ndjson";
const LINES: &str = "lines.ndjson";
const MANIFEST: &str = "manifest.json";
const LOCK: &str = ".writer.lock";

#[derive(Debug, Error)]
pub enum StoreError {
    #[error("unknown corpus tag `{0}`")]
    UnknownTag(String),
    #[error("corpus tag `{0}` already registered")]
    TagExists(String),
    #[error("invalid corpus tag `{0}`: use letters, digits, '.', '_' or '-'")]
    BadTag(String),
    #[error("corpus tag `{0}` has another writer")]
    Busy(String),
    #[error("synthetic move {index} has no stored line for prompt {prompt:?} batch {batch:?} line {line:?}")]
    OrphanMove {
        index: usize,
        prompt: Option<String>,
        batch: Option<u32>,
        line: Option<u32>,
    },
    #[error("storage failure after {written} records: {source}")]
    Io { written: usize, source: io::Error },
    #[error("corrupt record in {file} line {line}: {message}")]
    Corrupt { file: PathBuf, line: usize, message: String },
}

fn io_err(written: usize) -> impl FnOnce(io::Error) -> StoreError {
    move |source| StoreError::Io { written, source }
}

/// A stored move: the record plus its legality flag.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StoredMove {
    #[serde(flatten)]
    pub record: MoveRecord,
    pub legal: bool,
}

impl From<MoveRecord> for StoredMove {
    fn from(record: MoveRecord) -> StoredMove {
        let legal = record.is_legal();
        StoredMove { record, legal }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Manifest {
    pub tag: String,
    pub moves: u64,
    pub lines: u64,
    pub seeds: Vec<u64>,
    /// Hex SHA-256 of the configuration text the run was started with.
    pub config_hash: String,
    pub description: String,
}

/// Run metadata supplied when a tag is registered.
#[derive(Debug, Clone, Default)]
pub struct RunInfo {
    pub seeds: Vec<u64>,
    pub config_text: String,
    pub description: String,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct MoveFilter {
    pub piece: Option<PieceKind>,
    pub color: Option<Color>,
    pub prompt: Option<String>,
    pub legal: Option<bool>,
}

impl MoveFilter {
    pub fn matches(&self, m: &StoredMove) -> bool {
        self.piece.is_none_or(|p| m.record.piece == p)
            && self.color.is_none_or(|c| m.record.color == c)
            && self.prompt.as_ref().is_none_or(|p| m.record.prompt.as_ref() == Some(p))
            && self.legal.is_none_or(|l| m.legal == l)
    }
}

pub struct MoveStore {
    root: PathBuf,
}

/// Removes the writer lock when the append finishes.
struct WriterLock(PathBuf);

impl Drop for WriterLock {
    fn drop(&mut self) {
        let _ = fs::remove_file(&self.0);
    }
}

type LineKey = (String, u32, u32);

fn line_key(l: &GeneratedLine) -> LineKey {
    (l.prompt.clone(), l.batch_index, l.line_index)
}

/// The unit of idempotency for a move: its game for human records, its
/// generated line for synthetic ones.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
enum MoveKey {
    Game(String),
    Line(Option<String>, Option<u32>, Option<u32>),
}

fn move_key(m: &MoveRecord) -> MoveKey {
    match m.source {
        Source::Human => MoveKey::Game(m.game_id.clone()),
        Source::Synthetic => MoveKey::Line(m.prompt.clone(), m.batch, m.line),
    }
}

fn valid_tag(tag: &str) -> bool {
    !tag.is_empty()
        && !tag.starts_with('.')
        && tag.chars().all(|c| c.is_ascii_alphanumeric() || matches!(c, '.' | '_' | '-'))
}

fn read_ndjson<T: serde::de::DeserializeOwned>(path: &Path) -> Result<Vec<T>, StoreError> {
    NdjsonIter::<T>::open(path)?.collect()
}

/// Streams records from an NDJSON file.
pub struct NdjsonIter<T> {
    path: PathBuf,
    lines: io::Lines<BufReader<File>>,
    n: usize,
    _t: std::marker::PhantomData<T>,
}

impl<T> NdjsonIter<T> {
    fn open(path: &Path) -> Result<NdjsonIter<T>, StoreError> {
        let f = File::open(path).map_err(io_err(0))?;
        Ok(NdjsonIter {
            path: path.to_owned(),
            lines: BufReader::new(f).lines(),
            n: 0,
            _t: std::marker::PhantomData,
        })
    }
}

impl<T: serde::de::DeserializeOwned> Iterator for NdjsonIter<T> {
    type Item = Result<T, StoreError>;

    fn next(&mut self) -> Option<Self::Item> {
        loop {
            let line = self.lines.next()?;
            self.n += 1;
            let line = match line {
                Ok(l) => l,
                Err(e) => return Some(Err(io_err(0)(e))),
            };
            if line.trim().is_empty() {
                continue;
            }
            return Some(serde_json::from_str(&line).map_err(|e| StoreError::Corrupt {
                file: self.path.clone(),
                line: self.n,
                message: e.to_string(),
            }));
        }
    }
}

impl MoveStore {
    /// Opens (creating if needed) a store rooted at `root`.
    pub fn open(root: impl Into<PathBuf>) -> Result<MoveStore, StoreError> {
        let root = root.into();
        fs::create_dir_all(&root).map_err(io_err(0))?;
        Ok(MoveStore { root })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    fn dir(&self, tag: &str) -> Result<PathBuf, StoreError> {
        if !valid_tag(tag) {
            return Err(StoreError::BadTag(tag.to_owned()));
        }
        let d = self.root.join(tag);
        if !d.join(MANIFEST).is_file() {
            return Err(StoreError::UnknownTag(tag.to_owned()));
        }
        Ok(d)
    }

    pub fn register_tag(&self, tag: &str, info: &RunInfo) -> Result<Manifest, StoreError> {
        if !valid_tag(tag) {
            return Err(StoreError::BadTag(tag.to_owned()));
        }
        let d = self.root.join(tag);
        match fs::create_dir(&d) {
            Ok(()) => {}
            Err(e) if e.kind() == io::ErrorKind::AlreadyExists => return Err(StoreError::TagExists(tag.to_owned())),
            Err(e) => return Err(io_err(0)(e)),
        }
        File::create(d.join(MOVES)).map_err(io_err(0))?;
        File::create(d.join(LINES)).map_err(io_err(0))?;
        let m = Manifest {
            tag: tag.to_owned(),
            moves: 0,
            lines: 0,
            seeds: info.seeds.clone(),
            config_hash: Sha256::digest(info.config_text.as_bytes()).iter().map(|b| format!("{b:02x}")).collect(),
            description: info.description.clone(),
        };
        write_manifest(&d, &m, 0)?;
        Ok(m)
    }

    pub fn has_tag(&self, tag: &str) -> bool {
        self.dir(tag).is_ok()
    }

    /// Registered tags in name order.
    pub fn tags(&self) -> Result<Vec<String>, StoreError> {
        let mut out = Vec::new();
        for e in fs::read_dir(&self.root).map_err(io_err(0))? {
            let e = e.map_err(io_err(0))?;
            let name = e.file_name().to_string_lossy().into_owned();
            if e.path().join(MANIFEST).is_file() && valid_tag(&name) {
                out.push(name);
            }
        }
        out.sort();
        Ok(out)
    }

    pub fn manifest(&self, tag: &str) -> Result<Manifest, StoreError> {
        let d = self.dir(tag)?;
        let text = fs::read_to_string(d.join(MANIFEST)).map_err(io_err(0))?;
        serde_json::from_str(&text).map_err(|e| StoreError::Corrupt {
            file: d.join(MANIFEST),
            line: 1,
            message: e.to_string(),
        })
    }

    fn lock(&self, tag: &str, d: &Path) -> Result<WriterLock, StoreError> {
        let p = d.join(LOCK);
        match OpenOptions::new().write(true).create_new(true).open(&p) {
            Ok(_) => Ok(WriterLock(p)),
            Err(e) if e.kind() == io::ErrorKind::AlreadyExists => Err(StoreError::Busy(tag.to_owned())),
            Err(e) => Err(io_err(0)(e)),
        }
    }

    /// Appends raw generated lines; lines whose (prompt, batch, line) key is
    /// already stored are skipped. Returns the number written.
    pub fn append_lines(&self, tag: &str, lines: &[GeneratedLine]) -> Result<usize, StoreError> {
        let d = self.dir(tag)?;
        let _lock = self.lock(tag, &d)?;
        let mut seen: HashSet<LineKey> = read_ndjson::<GeneratedLine>(&d.join(LINES))?.iter().map(line_key).collect();
        let fresh: Vec<&GeneratedLine> = lines.iter().filter(|l| seen.insert(line_key(l))).collect();
        let written = append_rows(&d.join(LINES), &fresh)?;
        let mut m = self.manifest(tag)?;
        m.lines += written as u64;
        write_manifest(&d, &m, written)?;
        Ok(written)
    }

    /// Appends move records with their legality flags. Records belonging to a
    /// game or generated line already present in the tag are skipped.
    pub fn append_moves(&self, tag: &str, moves: &[MoveRecord]) -> Result<usize, StoreError> {
        let d = self.dir(tag)?;
        let _lock = self.lock(tag, &d)?;
        if moves.iter().any(|m| m.source == Source::Synthetic) {
            let lines: HashSet<LineKey> = read_ndjson::<GeneratedLine>(&d.join(LINES))?.iter().map(line_key).collect();
            for (index, m) in moves.iter().enumerate().filter(|(_, m)| m.source == Source::Synthetic) {
                let known = match (&m.prompt, m.batch, m.line) {
                    (Some(p), Some(b), Some(l)) => lines.contains(&(p.clone(), b, l)),
                    _ => false,
                };
                if !known {
                    return Err(StoreError::OrphanMove {
                        index,
                        prompt: m.prompt.clone(),
                        batch: m.batch,
                        line: m.line,
                    });
                }
            }
        }
        let existing: HashSet<MoveKey> = NdjsonIter::<StoredMove>::open(&d.join(MOVES))?
            .map(|r| r.map(|s| move_key(&s.record)))
            .collect::<Result<_, _>>()?;
        let fresh: Vec<StoredMove> = moves
            .iter()
            .filter(|m| !existing.contains(&move_key(m)))
            .map(|m| StoredMove::from(m.clone()))
            .collect();
        let written = append_rows(&d.join(MOVES), &fresh)?;
        let mut man = self.manifest(tag)?;
        man.moves += written as u64;
        write_manifest(&d, &man, written)?;
        Ok(written)
    }

    /// Matching moves in insertion order.
    pub fn query(&self, tag: &str, filter: &MoveFilter) -> Result<impl Iterator<Item = Result<StoredMove, StoreError>>, StoreError> {
        let d = self.dir(tag)?;
        let filter = filter.clone();
        Ok(NdjsonIter::<StoredMove>::open(&d.join(MOVES))?.filter(move |r| r.as_ref().map_or(true, |m| filter.matches(m))))
    }

    /// All matching moves, collected.
    pub fn moves(&self, tag: &str, filter: &MoveFilter) -> Result<Vec<StoredMove>, StoreError> {
        self.query(tag, filter)?.collect()
    }

    pub fn lines(&self, tag: &str) -> Result<Vec<GeneratedLine>, StoreError> {
        read_ndjson(&self.dir(tag)?.join(LINES))
    }
}

fn append_rows<T: Serialize>(path: &Path, rows: &[T]) -> Result<usize, StoreError> {
    if rows.is_empty() {
        return Ok(0);
    }
    let mut f = OpenOptions::new().append(true).open(path).map_err(io_err(0))?;
    let mut written = 0;
    let mut buf = Vec::new();
    for chunk in rows.chunks(1024) {
        buf.clear();
        for r in chunk {
            serde_json::to_writer(&mut buf, r).expect("records serialize");
            buf.push(b'\n');
        }
        f.write_all(&buf).map_err(io_err(written))?;
        written += chunk.len();
    }
    f.sync_data().map_err(io_err(written))?;
    Ok(written)
}

fn write_manifest(dir: &Path, m: &Manifest, written: usize) -> Result<(), StoreError> {
    let tmp = dir.join("manifest.json.tmp");
    let mut text = serde_json::to_string_pretty(m).expect("manifest serializes");
    text.push('\n');
    fs::write(&tmp, text).map_err(io_err(written))?;
    fs::rename(&tmp, dir.join(MANIFEST)).map_err(io_err(written))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tag_names() {
        assert!(valid_tag("human-800k"));
        assert!(valid_tag("surrogate-eps0.3"));
        assert!(!valid_tag("../x"));
        assert!(!valid_tag(".hidden"));
        assert!(!valid_tag(""));
    }
}
