//! Chess as ground truth for auditing what a text generator has learned.
//!
//! The pipeline narrates PGN games as English text, probes a generator with
//! prompts, extracts the moves it writes back, checks them against the rules
//! of piece movement, compares the resulting statistics with human play, and
//! rebuilds the board as a force-laid-out graph that can be navigated.

pub mod analytics;
pub mod chess;
pub mod extract;
pub mod graph;
pub mod narrator;
pub mod pgn;
pub mod position;
pub mod record;
pub mod selfplay;
pub mod store;
pub mod textgen;
pub mod wayfinder;

pub use chess::{board_distance, is_legal_geometry, pieces_capable, square_from_name, Color, MoveGeometry, PieceKind, Special, Square};
pub use record::{GameMeta, GameRecord, MoveRecord, Source};
