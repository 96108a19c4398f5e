//! Command-line driver for the boardmap pipeline.
//!
//! Exit codes: 0 success, 1 usage, 2 data error, 3 backend error. Errors are
//! printed to stderr as one JSON object.

pub mod config;
pub mod serve;
pub mod svg;

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Duration;

use boardmap_core::analytics::{
    ablation_summary, chi_square_independence, column_occupancy_moves, legality_table, pearson_r, piece_table, piece_tables_csv,
    piece_tables_text, StatsError,
};
use boardmap_core::extract::Extractor;
use boardmap_core::graph::{build_graph, force_layout, layout_fidelity, GraphDocument, LayoutMap};
use boardmap_core::narrator::{narrate_corpus, TemplateSet};
use boardmap_core::pgn::{legality_audit, parse_pgn_lenient};
use boardmap_core::selfplay::{simulate_corpus, SelfPlayConfig};
use boardmap_core::store::{MoveFilter, MoveStore, RunInfo, StoreError};
use boardmap_core::textgen::{batch_seed, generate_batches, train_surrogate, Backend, GenerationRequest, RemoteBackend, SurrogateModel, TextGenError};
use boardmap_core::wayfinder::{plan_path, PathMode, PathQuery, PathResult};
use boardmap_core::{square_from_name, MoveRecord, Source};
use clap::{Args, Parser, Subcommand};
use serde_json::json;
use thiserror::Error;

use crate::config::{BackendKind, PipelineConfig};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Data(String),
    #[error("{0}")]
    Backend(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Data(_) => 2,
            CliError::Backend(_) => 3,
        }
    }

    fn kind(&self) -> &'static str {
        match self {
            CliError::Usage(_) => "usage",
            CliError::Data(_) => "data",
            CliError::Backend(_) => "backend",
        }
    }

    pub fn to_json(&self) -> String {
        json!({ "error": self.kind(), "message": self.to_string() }).to_string()
    }
}

impl From<StoreError> for CliError {
    fn from(e: StoreError) -> Self {
        CliError::Data(e.to_string())
    }
}

impl From<StatsError> for CliError {
    fn from(e: StatsError) -> Self {
        CliError::Data(e.to_string())
    }
}

impl From<TextGenError> for CliError {
    fn from(e: TextGenError) -> Self {
        match e {
            TextGenError::BackendUnreachable(_) | TextGenError::BackendProtocol(_) => CliError::Backend(e.to_string()),
            _ => CliError::Data(e.to_string()),
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "boardmap", version, about = "Probe a text generator with chess narration and map what it learned")]
pub struct Cli {
    /// Pipeline configuration file (TOML).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Store directory, overriding the configuration.
    #[arg(long, global = true)]
    pub store: Option<PathBuf>,
    /// Export directory, overriding the configuration.
    #[arg(long, global = true)]
    pub export: Option<PathBuf>,
    /// Run seed, overriding the configuration.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Parse a PGN file, or simulate self-play games, into a new corpus tag.
    Ingest {
        #[arg(required_unless_present = "simulate")]
        pgn: Option<PathBuf>,
        /// Simulate seeded self-play games until this many moves exist.
        #[arg(long, conflicts_with = "pgn")]
        simulate: Option<usize>,
        #[arg(long)]
        tag: String,
        /// Fail when any game fails to parse instead of skipping it.
        #[arg(long)]
        strict: bool,
    },
    /// Narrate the games of a PGN file as training and evaluation text.
    Narrate {
        pgn: PathBuf,
        /// Output directory; defaults to the export directory.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value_t = 0.9)]
        split: f64,
    },
    /// Fit the surrogate generator to a human corpus tag.
    TrainSurrogate {
        #[arg(long)]
        tag: String,
        #[arg(long, default_value_t = 0.0)]
        epsilon: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Generate lines for every prompt and store them, with extracted moves, under a new tag.
    Generate(GenerateArgs),
    /// Extract moves from stored lines of a tag, or from a text file.
    Extract {
        #[arg(long, conflicts_with = "input", required_unless_present = "input")]
        tag: Option<String>,
        #[arg(long)]
        input: Option<PathBuf>,
        /// Treat the input file as human narration rather than generated text.
        #[arg(long)]
        human: bool,
    },
    /// Legality table for a tag, or an audit of a PGN file.
    Validate {
        #[arg(long, conflicts_with = "pgn", required_unless_present = "pgn")]
        tag: Option<String>,
        #[arg(long)]
        pgn: Option<PathBuf>,
    },
    /// Piece, legality and column tables for one or more tags.
    Stats {
        #[arg(long, value_delimiter = ',', required = true)]
        tags: Vec<String>,
        /// Also print the per-tag illegal-percentage summary.
        #[arg(long)]
        ablation: bool,
    },
    /// Build the square graph from the moves of one or more tags.
    Graph {
        #[arg(long, value_delimiter = ',', required = true)]
        tags: Vec<String>,
        /// Leave out moves that fail the legality check.
        #[arg(long)]
        legal_only: bool,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        gexf: Option<PathBuf>,
    },
    /// Lay out a graph document.
    Layout {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        weighted: bool,
        #[arg(long)]
        iterations: Option<u32>,
    },
    /// Plan a path between two squares on a laid-out graph.
    Path(PathArgs),
    /// Draw a laid-out graph, or paths on the board, as SVG.
    Render {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Path overlays as from:to:mode, e.g. a1:h8:coarse.
        #[arg(long = "path")]
        paths: Vec<String>,
        /// Add coarse and granular paths for both board diagonals.
        #[arg(long)]
        diagonals: bool,
        /// Draw on the 8x8 board instead of the layout.
        #[arg(long)]
        board: bool,
    },
    /// Serve the graph, paths and statistics as read-only JSON.
    Serve {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long, value_delimiter = ',')]
        tags: Vec<String>,
        #[arg(long, default_value = "127.0.0.1:8080")]
        addr: String,
    },
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    #[arg(long)]
    pub tag: String,
    /// Surrogate model file written by train-surrogate.
    #[arg(long)]
    pub model: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub backend: Option<BackendKind>,
    #[arg(long)]
    pub endpoint: Option<String>,
    #[arg(long)]
    pub batches: Option<u32>,
    #[arg(long)]
    pub lines: Option<u32>,
    /// Prompts to use instead of the configured battery.
    #[arg(long = "prompt")]
    pub prompts: Vec<String>,
    /// Store lines only.
    #[arg(long)]
    pub no_extract: bool,
}

#[derive(Debug, Args)]
pub struct PathArgs {
    #[arg(long)]
    pub graph: PathBuf,
    #[arg(long)]
    pub from: String,
    #[arg(long)]
    pub to: String,
    #[arg(long, default_value = "coarse")]
    pub mode: String,
    #[arg(long)]
    pub svg: Option<PathBuf>,
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

/// Parses arguments, runs the command and returns the process exit code.
pub fn main_with<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match run(cli, &mut std::io::stdout()) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("{}", e.to_json());
            e.exit_code()
        }
    }
}

struct Ctx {
    cfg: PipelineConfig,
}

impl Ctx {
    fn store(&self) -> Result<MoveStore, CliError> {
        Ok(MoveStore::open(&self.cfg.store)?)
    }

    fn templates(&self) -> Result<TemplateSet, CliError> {
        let t = match &self.cfg.templates {
            Some(p) => TemplateSet::load(p).map_err(|e| CliError::Data(e.to_string()))?,
            None => TemplateSet::default(),
        };
        Ok(t.with_seed(self.cfg.seed))
    }

    fn export(&self, name: &str) -> PathBuf {
        self.cfg.export.join(name)
    }

    fn run_info(&self, description: String) -> RunInfo {
        RunInfo {
            seeds: vec![self.cfg.seed],
            config_text: self.cfg.canonical(),
            description,
        }
    }
}

/// Writes through a temporary file so a failed run leaves nothing behind.
pub fn write_output(path: &Path, contents: &[u8]) -> Result<(), CliError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| CliError::Data(format!("{}: {e}", dir.display())))?;
    }
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".partial");
    let tmp = PathBuf::from(tmp);
    let result = fs::write(&tmp, contents).and_then(|()| fs::rename(&tmp, path));
    if let Err(e) = result {
        let _ = fs::remove_file(&tmp);
        return Err(CliError::Data(format!("{}: {e}", path.display())));
    }
    Ok(())
}

fn read_text(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))
}

fn read_document(path: &Path) -> Result<GraphDocument, CliError> {
    serde_json::from_str(&read_text(path)?).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))
}

fn laid_out(path: &Path) -> Result<(boardmap_core::graph::BoardGraph, LayoutMap), CliError> {
    let (g, l) = read_document(path)?.to_graph();
    let l = l.ok_or_else(|| CliError::Data(format!("{}: no layout positions; run `layout` first", path.display())))?;
    Ok((g, l))
}

fn emit(out: &mut dyn std::io::Write, text: &str) -> Result<(), CliError> {
    out.write_all(text.as_bytes()).map_err(|e| CliError::Data(format!("stdout: {e}")))
}

fn pretty(v: &impl serde::Serialize) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("value serializes");
    s.push('\n');
    s
}

/// Removes a tag directory created by a run that then failed.
fn discard_tag(store: &MoveStore, tag: &str) {
    let _ = fs::remove_dir_all(store.root().join(tag));
}

pub fn run(cli: Cli, out: &mut dyn std::io::Write) -> Result<(), CliError> {
    let mut cfg = match &cli.config {
        Some(p) => PipelineConfig::load(p)?,
        None => PipelineConfig::default(),
    };
    if let Some(s) = cli.store {
        cfg.store = s;
    }
    if let Some(e) = cli.export {
        cfg.export = e;
    }
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    let ctx = Ctx { cfg };
    match cli.command {
        Command::Ingest { pgn, simulate, tag, strict } => match pgn {
            Some(pgn) => ingest(&ctx, &pgn, &tag, strict, out),
            None => simulate_into(&ctx, simulate.expect("clap requires pgn or simulate"), &tag, out),
        },
        Command::Narrate { pgn, out: dir, split } => narrate(&ctx, &pgn, dir, split, out),
        Command::TrainSurrogate { tag, epsilon, out: path } => {
            let store = ctx.store()?;
            let moves: Vec<MoveRecord> = store.moves(&tag, &MoveFilter::default())?.into_iter().map(|m| m.record).collect();
            let model = train_surrogate(&moves, epsilon)?;
            write_output(&path, pretty(&model).as_bytes())?;
            emit(out, &pretty(&json!({ "tag": tag, "moves": moves.len(), "epsilon": epsilon, "model": path })))
        }
        Command::Generate(args) => generate(&ctx, args, out),
        Command::Extract { tag, input, human } => extract(&ctx, tag, input, human, out),
        Command::Validate { tag, pgn } => validate(&ctx, tag, pgn, out),
        Command::Stats { tags, ablation } => stats(&ctx, &tags, ablation, out),
        Command::Graph {
            tags,
            legal_only,
            out: path,
            gexf,
        } => {
            let store = ctx.store()?;
            let filter = MoveFilter {
                legal: legal_only.then_some(true),
                ..MoveFilter::default()
            };
            let mut moves = Vec::new();
            for t in &tags {
                moves.extend(store.moves(t, &filter)?.into_iter().map(|m| m.record));
            }
            let g = build_graph(&moves);
            let doc = GraphDocument::new(&g, None);
            let path = path.unwrap_or_else(|| ctx.export("graph.json"));
            write_output(&path, pretty(&doc).as_bytes())?;
            if let Some(gx) = gexf {
                write_output(&gx, doc.to_gexf().as_bytes())?;
            }
            emit(out, &pretty(&json!({ "moves": moves.len(), "nodes": g.node_count(), "edges": g.edge_count(), "graph": path })))
        }
        Command::Layout {
            graph,
            out: path,
            weighted,
            iterations,
        } => {
            let (g, _) = read_document(&graph)?.to_graph();
            let mut params = ctx.cfg.layout.clone();
            params.weighted_attraction |= weighted;
            if let Some(i) = iterations {
                params.iterations = i;
            }
            let layout = force_layout(&g, &params, ctx.cfg.seed).map_err(|e| CliError::Data(e.to_string()))?;
            let doc = GraphDocument::new(&g, Some(&layout));
            let path = path.unwrap_or_else(|| ctx.export("layout.json"));
            write_output(&path, pretty(&doc).as_bytes())?;
            let fid = layout_fidelity(&layout).ok();
            emit(
                out,
                &pretty(&json!({
                    "layout": path,
                    "spearman_rho": fid.map(|f| f.spearman_rho),
                    "procrustes_residual": fid.map(|f| f.procrustes_residual),
                })),
            )
        }
        Command::Path(args) => path(&args, out),
        Command::Render {
            graph,
            out: path,
            paths,
            diagonals,
            board,
        } => {
            let (g, l) = laid_out(&graph)?;
            let mut results = Vec::new();
            for spec in &paths {
                let parts: Vec<&str> = spec.split(':').collect();
                let [a, b, rest @ ..] = parts.as_slice() else {
                    return Err(CliError::Usage(format!("path overlay `{spec}` is not from:to[:mode]")));
                };
                let q = query(a, b, rest.first().copied().unwrap_or("coarse"))?;
                match plan_path(&g, &l, &q) {
                    Ok(p) => results.push(p),
                    Err(e) => results.extend(e.partial().cloned()),
                }
            }
            if diagonals {
                results.extend(serve::diagonal_paths(&g, &l));
            }
            let text = if board { svg::board_svg(&results) } else { svg::layout_svg(&g, &l, &results) };
            write_output(&path, text.as_bytes())?;
            emit(out, &pretty(&json!({ "svg": path, "paths": results.len() })))
        }
        Command::Serve { graph, tags, addr } => {
            let doc = read_document(&graph)?;
            let store = if tags.is_empty() { None } else { Some(ctx.store()?) };
            let snap = serve::Snapshot::new(&doc, store.as_ref(), &tags)?;
            serve::run(snap, &addr)
        }
    }
}

fn ingest(ctx: &Ctx, pgn: &Path, tag: &str, strict: bool, out: &mut dyn std::io::Write) -> Result<(), CliError> {
    let text = read_text(pgn)?;
    let (games, errors) = parse_pgn_lenient(&text, "g");
    if strict && !errors.is_empty() {
        return Err(CliError::Data(format!("{}: {}", pgn.display(), errors[0])));
    }
    if games.is_empty() {
        return Err(CliError::Data(format!("{}: no games parsed", pgn.display())));
    }
    let store = ctx.store()?;
    store.register_tag(tag, &ctx.run_info(format!("ingest {}", pgn.display())))?;
    let moves: Vec<MoveRecord> = games.iter().flat_map(|g| g.moves.iter().cloned()).collect();
    let written = match store.append_moves(tag, &moves) {
        Ok(n) => n,
        Err(e) => {
            discard_tag(&store, tag);
            return Err(e.into());
        }
    };
    let audit = legality_audit(&games);
    emit(
        out,
        &pretty(&json!({
            "tag": tag,
            "games": games.len(),
            "moves": written,
            "skipped_games": errors.len(),
            "illegal": audit.illegal,
        })),
    )
}

fn simulate_into(ctx: &Ctx, min_moves: usize, tag: &str, out: &mut dyn std::io::Write) -> Result<(), CliError> {
    let games = simulate_corpus(min_moves, ctx.cfg.seed, &SelfPlayConfig::default());
    let store = ctx.store()?;
    store.register_tag(tag, &ctx.run_info(format!("self-play, {min_moves} moves")))?;
    let moves: Vec<MoveRecord> = games.iter().flat_map(|g| g.moves.iter().cloned()).collect();
    let written = match store.append_moves(tag, &moves) {
        Ok(n) => n,
        Err(e) => {
            discard_tag(&store, tag);
            return Err(e.into());
        }
    };
    emit(out, &pretty(&json!({ "tag": tag, "games": games.len(), "moves": written, "skipped_games": 0, "illegal": legality_audit(&games).illegal })))
}

fn narrate(ctx: &Ctx, pgn: &Path, dir: Option<PathBuf>, split: f64, out: &mut dyn std::io::Write) -> Result<(), CliError> {
    let (games, _) = parse_pgn_lenient(&read_text(pgn)?, "g");
    let corpus = narrate_corpus(&games, &ctx.templates()?, split).map_err(|e| CliError::Data(e.to_string()))?;
    let dir = dir.unwrap_or_else(|| ctx.cfg.export.clone());
    let join = |lines: &[String]| {
        let mut s = lines.join("\n");
        s.push('\n');
        s
    };
    write_output(&dir.join("train.txt"), join(&corpus.train).as_bytes())?;
    write_output(&dir.join("eval.txt"), join(&corpus.eval).as_bytes())?;
    emit(out, &pretty(&corpus.stats))
}

fn backend_for(ctx: &Ctx, args: &GenerateArgs) -> Result<Box<dyn Backend>, CliError> {
    let kind = args.backend.unwrap_or(ctx.cfg.generate.backend);
    match kind {
        BackendKind::Surrogate => {
            let path = args
                .model
                .as_ref()
                .ok_or_else(|| CliError::Usage("surrogate backend needs --model".into()))?;
            let model: SurrogateModel =
                serde_json::from_str(&read_text(path)?).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
            Ok(Box::new(model.with_templates(ctx.templates()?)))
        }
        BackendKind::Remote => {
            let url = args
                .endpoint
                .clone()
                .or_else(|| ctx.cfg.generate.endpoint.clone())
                .ok_or_else(|| CliError::Usage("remote backend needs an endpoint".into()))?;
            let mut b = RemoteBackend::from_env(&url)?;
            if ctx.cfg.generate.timeout_secs > 0 {
                let token = std::env::var(boardmap_core::textgen::TOKEN_ENV).ok().filter(|t| !t.is_empty());
                b = RemoteBackend::new(&url, token, Duration::from_secs(ctx.cfg.generate.timeout_secs))?;
            }
            Ok(Box::new(b))
        }
    }
}

fn generate(ctx: &Ctx, args: GenerateArgs, out: &mut dyn std::io::Write) -> Result<(), CliError> {
    let g = &ctx.cfg.generate;
    let backend = backend_for(ctx, &args)?;
    let prompts = if args.prompts.is_empty() { g.prompts.clone() } else { args.prompts.clone() };
    let extractor = Extractor::new(&ctx.templates()?);
    let store = ctx.store()?;
    store.register_tag(&args.tag, &ctx.run_info(format!("generate {} prompts", prompts.len())))?;
    let result = (|| -> Result<(usize, usize), CliError> {
        let (mut lines_written, mut moves_written) = (0, 0);
        for (i, prompt) in prompts.iter().enumerate() {
            let req = GenerationRequest {
                prompt: prompt.clone(),
                num_lines: args.lines.unwrap_or(g.num_lines),
                max_chars_per_line: g.max_chars_per_line,
                seed: batch_seed(ctx.cfg.seed, i as u32),
                temperature: g.temperature,
            };
            let lines = generate_batches(&req, args.batches.unwrap_or(g.batches), g.max_in_flight, backend.as_ref())?;
            lines_written += store.append_lines(&args.tag, &lines)?;
            if !args.no_extract {
                let moves: Vec<MoveRecord> = lines
                    .iter()
                    .flat_map(|l| {
                        extractor
                            .extract(&l.text, Source::Synthetic)
                            .with_provenance(&l.prompt, l.batch_index, l.line_index)
                            .moves
                    })
                    .collect();
                moves_written += store.append_moves(&args.tag, &moves)?;
            }
        }
        Ok((lines_written, moves_written))
    })();
    match result {
        Ok((lines, moves)) => emit(out, &pretty(&json!({ "tag": args.tag, "lines": lines, "moves": moves }))),
        Err(e) => {
            discard_tag(&store, &args.tag);
            Err(e)
        }
    }
}

fn extract(ctx: &Ctx, tag: Option<String>, input: Option<PathBuf>, human: bool, out: &mut dyn std::io::Write) -> Result<(), CliError> {
    let extractor = Extractor::new(&ctx.templates()?);
    if let Some(path) = input {
        let source = if human { Source::Human } else { Source::Synthetic };
        let r = extractor.extract(&read_text(&path)?, source);
        return emit(out, &pretty(&r));
    }
    let tag = tag.expect("clap requires tag or input");
    let store = ctx.store()?;
    let lines = store.lines(&tag)?;
    let mut moves = Vec::new();
    let mut unparsed = 0;
    for l in &lines {
        let r = extractor
            .extract(&l.text, Source::Synthetic)
            .with_provenance(&l.prompt, l.batch_index, l.line_index);
        unparsed += r.unparsed_spans.len();
        moves.extend(r.moves);
    }
    let written = store.append_moves(&tag, &moves)?;
    emit(
        out,
        &pretty(&json!({ "tag": tag, "lines": lines.len(), "moves": moves.len(), "new_moves": written, "unparsed_spans": unparsed })),
    )
}

fn validate(ctx: &Ctx, tag: Option<String>, pgn: Option<PathBuf>, out: &mut dyn std::io::Write) -> Result<(), CliError> {
    if let Some(path) = pgn {
        let (games, errors) = parse_pgn_lenient(&read_text(&path)?, "g");
        let audit = legality_audit(&games);
        emit(
            out,
            &pretty(&json!({
                "games": games.len(),
                "skipped_games": errors.len(),
                "moves": audit.total,
                "illegal": audit.illegal,
                "illegal_moves": audit.illegal_moves,
            })),
        )?;
        if audit.illegal > 0 {
            return Err(CliError::Data(format!("{} illegal moves in {}", audit.illegal, path.display())));
        }
        return Ok(());
    }
    let t = legality_table(&ctx.store()?, &tag.expect("clap requires tag or pgn"))?;
    emit(out, &t.text())
}

fn stats(ctx: &Ctx, tags: &[String], ablation: bool, out: &mut dyn std::io::Write) -> Result<(), CliError> {
    let store = ctx.store()?;
    let tables = tags.iter().map(|t| piece_table(&store, t)).collect::<Result<Vec<_>, _>>()?;
    let mut text = String::from("Descriptive statistics\n");
    text.push_str(&piece_tables_text(&tables));
    if let [a, b, ..] = tables.as_slice() {
        let pc = pearson_r(&a.percents(), &b.percents());
        let cc = pearson_r(&a.counts.map(|c| c as f64), &b.counts.map(|c| c as f64));
        let chi = chi_square_independence(&[a.counts.map(|c| c as f64).to_vec(), b.counts.map(|c| c as f64).to_vec()]);
        text.push('\n');
        match (pc, cc) {
            (Ok(p), Ok(c)) => {
                text.push_str(&format!("Pearson r on percentages: {:.5} (two-tailed p {:.5})\n", p.r, p.p));
                text.push_str(&format!("Pearson r on counts: {:.5} (two-tailed p {:.5})\n", c.r, c.p));
            }
            (Err(e), _) | (_, Err(e)) => text.push_str(&format!("Pearson r: {e}\n")),
        }
        match chi {
            Ok(x) => text.push_str(&format!("Chi-square: {:.2} with {} dof, p {:.3e}\n", x.statistic, x.dof, x.p)),
            Err(e) => text.push_str(&format!("Chi-square: {e}\n")),
        }
    }
    let mut legality_csv = String::new();
    let mut columns_csv = String::from("tag,file,count\n");
    for t in tags {
        let l = legality_table(&store, t)?;
        text.push_str(&format!("\nIllegal moves: {t}\n{}", l.text()));
        let csv = l.csv();
        if legality_csv.is_empty() {
            legality_csv.push_str(&csv);
        } else {
            legality_csv.extend(csv.lines().skip(1).map(|l| format!("{l}\n")));
        }
        let moves: Vec<MoveRecord> = store.moves(t, &MoveFilter::default())?.into_iter().map(|m| m.record).collect();
        let occ = column_occupancy_moves(&moves);
        text.push_str(&format!("Destination files {t}: {:?}\n", occ.counts));
        for (i, c) in occ.counts.iter().enumerate() {
            columns_csv.push_str(&format!("{t},{},{c}\n", (b'a' + i as u8) as char));
        }
    }
    write_output(&ctx.export("pieces.csv"), piece_tables_csv(&tables).as_bytes())?;
    write_output(&ctx.export("legality.csv"), legality_csv.as_bytes())?;
    write_output(&ctx.export("columns.csv"), columns_csv.as_bytes())?;
    if ablation {
        let refs: Vec<&str> = tags.iter().map(String::as_str).collect();
        let s = ablation_summary(&store, &refs)?;
        text.push_str(&format!("\nIllegal moves by corpus\n{}", s.text()));
        write_output(&ctx.export("ablation.csv"), s.csv().as_bytes())?;
    }
    emit(out, &text)
}

fn query(from: &str, to: &str, mode: &str) -> Result<PathQuery, CliError> {
    let sq = |s: &str| square_from_name(s).map_err(|e| CliError::Usage(e.to_string()));
    let mode = PathMode::from_name(mode).ok_or_else(|| CliError::Usage(format!("unknown mode `{mode}`; use coarse or granular")))?;
    Ok(PathQuery::new(sq(from)?, sq(to)?, mode))
}

fn steps_csv(p: &PathResult) -> String {
    let mut s = String::from("step,from,to,layout_length,board_length,pieces\n");
    for (i, st) in p.steps.iter().enumerate() {
        let pieces: Vec<String> = st.pieces_capable.iter().map(|(k, c)| format!("{} {}", c.name(), k.name())).collect();
        s.push_str(&format!(
            "{},{},{},{:.6},{:.6},{}\n",
            i + 1,
            st.from,
            st.to,
            st.layout_length,
            st.board_length,
            pieces.join(";")
        ));
    }
    s
}

fn path(args: &PathArgs, out: &mut dyn std::io::Write) -> Result<(), CliError> {
    let (g, l) = laid_out(&args.graph)?;
    let q = query(&args.from, &args.to, &args.mode)?;
    let p = match plan_path(&g, &l, &q) {
        Ok(p) => p,
        Err(e) => {
            let partial = e.partial().map(|p| serde_json::to_string(p).expect("path serializes"));
            return Err(CliError::Data(match partial {
                Some(pj) => format!("{e}; partial path {pj}"),
                None => e.to_string(),
            }));
        }
    };
    if let Some(svg_path) = &args.svg {
        write_output(svg_path, svg::layout_svg(&g, &l, std::slice::from_ref(&p)).as_bytes())?;
    }
    if let Some(csv_path) = &args.csv {
        write_output(csv_path, steps_csv(&p).as_bytes())?;
    }
    emit(out, &pretty(&p))
}
