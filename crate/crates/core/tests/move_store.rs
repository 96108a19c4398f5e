use boardmap_core::extract::extract_moves;
use boardmap_core::pgn::{parse_pgn, EXAMPLE_GAME_PGN};
use boardmap_core::selfplay::{simulate_corpus, SelfPlayConfig};
use boardmap_core::store::{MoveFilter, MoveStore, RunInfo, StoreError};
use boardmap_core::textgen::{generate, train_surrogate, GeneratedLine, GenerationRequest};
use boardmap_core::{Color, MoveRecord, PieceKind, Source};
use proptest::prelude::*;

fn human() -> Vec<MoveRecord> {
    parse_pgn(EXAMPLE_GAME_PGN).unwrap().remove(0).moves
}

fn synthetic_run(epsilon: f64, n: u32) -> (Vec<GeneratedLine>, Vec<MoveRecord>) {
    let corpus: Vec<MoveRecord> = simulate_corpus(5_000, 2, &SelfPlayConfig::default()).into_iter().flat_map(|g| g.moves).collect();
    let model = train_surrogate(&corpus, epsilon).unwrap();
    let req = GenerationRequest {
        num_lines: n,
        ..GenerationRequest::new("Check. ", 11)
    };
    let lines = generate(&req, &model).unwrap();
    let moves = lines
        .iter()
        .flat_map(|l| extract_moves(&l.text, Source::Synthetic).with_provenance(&l.prompt, l.batch_index, l.line_index).moves)
        .collect();
    (lines, moves)
}

#[test]
fn counts_and_idempotency() {
    let dir = tempfile::tempdir().unwrap();
    let s = MoveStore::open(dir.path()).unwrap();
    s.register_tag("surrogate-test", &RunInfo::default()).unwrap();
    let (lines, moves) = synthetic_run(0.0, 100);
    assert_eq!(s.append_lines("surrogate-test", &lines).unwrap(), 100);
    assert_eq!(s.append_lines("surrogate-test", &lines).unwrap(), 0);
    assert_eq!(s.append_moves("surrogate-test", &moves).unwrap(), moves.len());
    assert_eq!(s.append_moves("surrogate-test", &moves).unwrap(), 0);
    let m = s.manifest("surrogate-test").unwrap();
    assert_eq!((m.lines, m.moves), (100, moves.len() as u64));
    assert_eq!(s.lines("surrogate-test").unwrap(), lines);
}

#[test]
fn unregistered_and_duplicate_tags() {
    let dir = tempfile::tempdir().unwrap();
    let s = MoveStore::open(dir.path()).unwrap();
    assert!(matches!(s.append_moves("nope", &human()), Err(StoreError::UnknownTag(_))));
    assert!(matches!(s.query("nope", &MoveFilter::default()), Err(StoreError::UnknownTag(_))));
    s.register_tag("human-test", &RunInfo::default()).unwrap();
    assert!(matches!(s.register_tag("human-test", &RunInfo::default()), Err(StoreError::TagExists(_))));
    assert!(matches!(s.register_tag("../escape", &RunInfo::default()), Err(StoreError::BadTag(_))));
    assert_eq!(s.tags().unwrap(), vec!["human-test".to_string()]);
}

#[test]
fn synthetic_moves_need_their_lines() {
    let dir = tempfile::tempdir().unwrap();
    let s = MoveStore::open(dir.path()).unwrap();
    s.register_tag("gen", &RunInfo::default()).unwrap();
    let (lines, moves) = synthetic_run(0.0, 5);
    assert!(matches!(s.append_moves("gen", &moves), Err(StoreError::OrphanMove { index: 0, .. })));
    s.append_lines("gen", &lines).unwrap();
    assert!(s.append_moves("gen", &moves).is_ok());
}

#[test]
fn empty_tag_and_clean_surrogate_queries() {
    let dir = tempfile::tempdir().unwrap();
    let s = MoveStore::open(dir.path()).unwrap();
    s.register_tag("empty", &RunInfo::default()).unwrap();
    assert_eq!(s.moves("empty", &MoveFilter::default()).unwrap().len(), 0);
    s.register_tag("eps0", &RunInfo::default()).unwrap();
    let (lines, moves) = synthetic_run(0.0, 300);
    s.append_lines("eps0", &lines).unwrap();
    s.append_moves("eps0", &moves).unwrap();
    let illegal = MoveFilter {
        legal: Some(false),
        ..MoveFilter::default()
    };
    assert_eq!(s.moves("eps0", &illegal).unwrap().len(), 0);
    let by_prompt = MoveFilter {
        prompt: Some("Check. ".into()),
        ..MoveFilter::default()
    };
    assert_eq!(s.moves("eps0", &by_prompt).unwrap().len(), moves.len());
}

#[test]
fn illegal_flags_are_stored() {
    let dir = tempfile::tempdir().unwrap();
    let s = MoveStore::open(dir.path()).unwrap();
    s.register_tag("eps", &RunInfo::default()).unwrap();
    let (lines, moves) = synthetic_run(0.3, 200);
    s.append_lines("eps", &lines).unwrap();
    s.append_moves("eps", &moves).unwrap();
    let flagged = s
        .moves(
            "eps",
            &MoveFilter {
                legal: Some(false),
                ..MoveFilter::default()
            },
        )
        .unwrap();
    assert_eq!(flagged.len(), moves.iter().filter(|m| !m.is_legal()).count());
    assert!(!flagged.is_empty());
}

#[test]
fn schema_field_names() {
    let dir = tempfile::tempdir().unwrap();
    let s = MoveStore::open(dir.path()).unwrap();
    s.register_tag("human-test", &RunInfo::default()).unwrap();
    s.append_moves("human-test", &human()[..1]).unwrap();
    let text = std::fs::read_to_string(dir.path().join("human-test/moves.ndjson")).unwrap();
    let v: serde_json::Value = serde_json::from_str(text.lines().next().unwrap()).unwrap();
    let mut keys: Vec<&str> = v.as_object().unwrap().keys().map(String::as_str).collect();
    keys.sort();
    let mut want = vec![
        "game_id", "move_number", "color", "piece", "from", "to", "capture", "special", "check", "source", "prompt", "batch", "line", "legal",
    ];
    want.sort();
    assert_eq!(keys, want);
    assert_eq!(v["from"], "c2");
    assert_eq!(v["piece"], "pawn");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn piece_counts_partition_and_round_trip(seed in 0u64..10_000) {
        let dir = tempfile::tempdir().unwrap();
        let s = MoveStore::open(dir.path()).unwrap();
        s.register_tag("human", &RunInfo::default()).unwrap();
        let games = simulate_corpus(400, seed, &SelfPlayConfig::default());
        let moves: Vec<MoveRecord> = games.into_iter().flat_map(|g| g.moves).collect();
        s.append_moves("human", &moves).unwrap();
        let all = s.moves("human", &MoveFilter::default()).unwrap();
        let back: Vec<MoveRecord> = all.iter().map(|m| m.record.clone()).collect();
        prop_assert_eq!(&back, &moves);
        let mut total = 0;
        for piece in PieceKind::ALL {
            for color in Color::ALL {
                total += s.moves("human", &MoveFilter { piece: Some(piece), color: Some(color), ..MoveFilter::default() }).unwrap().len();
            }
        }
        prop_assert_eq!(total, moves.len());
    }
}
