//! Read-only JSON service over an immutable snapshot of a laid-out graph
//! and the move statistics of selected corpus tags.

use std::collections::HashMap;
use std::sync::Arc;

use axum::extract::{Query, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::get;
use axum::{Json, Router};
use boardmap_core::analytics::{column_occupancy_moves, column_occupancy_paths, pearson_r, piece_table, ColumnOccupancy, Correlation, PieceTable, TABLE_ORDER};
use boardmap_core::graph::{BoardGraph, GraphDocument, LayoutMap};
use boardmap_core::store::{MoveFilter, MoveStore};
use boardmap_core::wayfinder::{plan_path, PathError, PathMode, PathQuery, PathResult};
use boardmap_core::{square_from_name, MoveRecord, Square};
use serde::Serialize;
use serde_json::json;

use crate::CliError;

/// Corner-to-corner queries whose paths feed the path column histogram.
pub const DIAGONAL_QUERIES: [(&str, &str); 2] = [("a1", "h8"), ("a8", "h1")];

pub struct Snapshot {
    graph: BoardGraph,
    layout: LayoutMap,
    graph_json: String,
    pieces: Vec<PieceTable>,
    move_columns: ColumnOccupancy,
    path_columns: ColumnOccupancy,
}

/// Coarse and granular paths for both board diagonals; failed queries
/// contribute their partial paths.
pub fn diagonal_paths(graph: &BoardGraph, layout: &LayoutMap) -> Vec<PathResult> {
    let mut out = Vec::new();
    for (a, b) in DIAGONAL_QUERIES {
        for mode in [PathMode::Coarse, PathMode::Granular] {
            let q = PathQuery::new(square_from_name(a).expect("valid"), square_from_name(b).expect("valid"), mode);
            match plan_path(graph, layout, &q) {
                Ok(p) => out.push(p),
                Err(e) => out.extend(e.partial().cloned()),
            }
        }
    }
    out
}

impl Snapshot {
    pub fn new(doc: &GraphDocument, store: Option<&MoveStore>, tags: &[String]) -> Result<Snapshot, CliError> {
        let (graph, layout) = doc.to_graph();
        let layout = layout.ok_or_else(|| CliError::Data("graph document has no layout positions".into()))?;
        let mut pieces = Vec::new();
        let mut moves: Vec<MoveRecord> = Vec::new();
        if let Some(store) = store {
            for t in tags {
                pieces.push(piece_table(store, t)?);
                moves.extend(store.moves(t, &MoveFilter::default())?.into_iter().map(|m| m.record));
            }
        }
        let path_columns = column_occupancy_paths(&diagonal_paths(&graph, &layout));
        Ok(Snapshot {
            graph_json: serde_json::to_string(doc).expect("document serializes"),
            move_columns: column_occupancy_moves(&moves),
            path_columns,
            pieces,
            graph,
            layout,
        })
    }
}

pub fn router(snapshot: Snapshot) -> Router {
    Router::new()
        .route("/graph", get(graph))
        .route("/path", get(path))
        .route("/stats/columns", get(columns))
        .route("/stats/pieces", get(pieces))
        .with_state(Arc::new(snapshot))
}

type Shared = State<Arc<Snapshot>>;

fn error(status: StatusCode, message: impl Into<String>) -> Response {
    (status, Json(json!({ "error": message.into() }))).into_response()
}

fn wants_csv(q: &HashMap<String, String>) -> bool {
    q.get("format").is_some_and(|f| f == "csv")
}

fn csv(body: String) -> Response {
    ([(header::CONTENT_TYPE, "text/csv")], body).into_response()
}

async fn graph(State(s): Shared) -> Response {
    ([(header::CONTENT_TYPE, "application/json")], s.graph_json.clone()).into_response()
}

fn square_param(q: &HashMap<String, String>, key: &str) -> Result<Square, String> {
    let v = q.get(key).ok_or_else(|| format!("missing parameter `{key}`"))?;
    square_from_name(v).map_err(|e| e.to_string())
}

async fn path(State(s): Shared, Query(q): Query<HashMap<String, String>>) -> Response {
    let (origin, target) = match (square_param(&q, "from"), square_param(&q, "to")) {
        (Ok(a), Ok(b)) => (a, b),
        (Err(m), _) | (_, Err(m)) => return error(StatusCode::BAD_REQUEST, m),
    };
    let mode = match q.get("mode").map(String::as_str) {
        None => PathMode::Coarse,
        Some(m) => match PathMode::from_name(m) {
            Some(m) => m,
            None => return error(StatusCode::BAD_REQUEST, format!("unknown mode `{m}`")),
        },
    };
    match plan_path(&s.graph, &s.layout, &PathQuery::new(origin, target, mode)) {
        Ok(p) => Json(p).into_response(),
        Err(e @ (PathError::NoProgress { .. } | PathError::StepBudgetExceeded { .. })) => (
            StatusCode::UNPROCESSABLE_ENTITY,
            Json(json!({ "error": e.to_string(), "partial": e.partial() })),
        )
            .into_response(),
        Err(e @ PathError::NotInGraph(_)) => error(StatusCode::NOT_FOUND, e.to_string()),
        Err(e) => error(StatusCode::BAD_REQUEST, e.to_string()),
    }
}

#[derive(Serialize)]
struct ColumnsBody {
    files: [char; 8],
    moves: [u64; 8],
    paths: [u64; 8],
}

async fn columns(State(s): Shared, Query(q): Query<HashMap<String, String>>) -> Response {
    let files = ['a', 'b', 'c', 'd', 'e', 'f', 'g', 'h'];
    if wants_csv(&q) {
        let mut out = String::from("file,moves,paths\n");
        for ((f, m), p) in files.iter().zip(s.move_columns.counts).zip(s.path_columns.counts) {
            out.push_str(&format!("{f},{m},{p}\n"));
        }
        return csv(out);
    }
    Json(ColumnsBody {
        files,
        moves: s.move_columns.counts,
        paths: s.path_columns.counts,
    })
    .into_response()
}

#[derive(Serialize)]
struct PieceRow {
    piece: &'static str,
    count: u64,
    percent: f64,
}

#[derive(Serialize)]
struct PieceBody {
    tag: String,
    total: u64,
    rows: Vec<PieceRow>,
}

async fn pieces(State(s): Shared, Query(q): Query<HashMap<String, String>>) -> Response {
    if wants_csv(&q) {
        return csv(boardmap_core::analytics::piece_tables_csv(&s.pieces));
    }
    let tables: Vec<PieceBody> = s
        .pieces
        .iter()
        .map(|t| PieceBody {
            tag: t.label.clone(),
            total: t.total,
            rows: TABLE_ORDER
                .iter()
                .enumerate()
                .map(|(i, p)| PieceRow {
                    piece: p.name(),
                    count: t.counts[i],
                    percent: t.percents()[i],
                })
                .collect(),
        })
        .collect();
    let correlation: Option<Correlation> = match s.pieces.as_slice() {
        [a, b, ..] => pearson_r(&a.percents(), &b.percents()).ok(),
        _ => None,
    };
    Json(json!({ "tables": tables, "correlation": correlation })).into_response()
}

/// Serves until the process is stopped.
pub fn run(snapshot: Snapshot, addr: &str) -> Result<(), CliError> {
    let rt = tokio::runtime::Builder::new_multi_thread()
        .enable_all()
        .build()
        .map_err(|e| CliError::Data(format!("runtime: {e}")))?;
    rt.block_on(async {
        let listener = tokio::net::TcpListener::bind(addr)
            .await
            .map_err(|e| CliError::Usage(format!("bind {addr}: {e}")))?;
        eprintln!("serving on http://{}", listener.local_addr().map_err(|e| CliError::Data(e.to_string()))?);
        axum::serve(listener, router(snapshot))
            .await
            .map_err(|e| CliError::Data(format!("server: {e}")))
    })
}
