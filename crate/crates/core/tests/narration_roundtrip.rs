mod common;

use boardmap_core::extract::{extract_moves, Extractor};
use boardmap_core::narrator::{narrate_game, TemplateSet};
use boardmap_core::pgn::{parse_pgn, EXAMPLE_GAME_PGN};
use boardmap_core::record::GameResult;
use boardmap_core::selfplay::{simulate_corpus, SelfPlayConfig};
use boardmap_core::Source;
use common::{keys, round_trip, Key};
use proptest::prelude::*;

#[test]
fn example_game_round_trips_for_many_seeds() {
    let g = parse_pgn(EXAMPLE_GAME_PGN).unwrap().remove(0);
    for seed in 0..50 {
        round_trip(&g, &TemplateSet::default().with_seed(seed)).unwrap();
    }
}

#[test]
fn awkward_names_and_results() {
    let mut games = simulate_corpus(3_000, 17, &SelfPlayConfig::default());
    let names = [
        ("Same", "Same"),
        ("White", "Black"),
        ("", "?"),
        ("O'Neil,Kevin", "Tal, M."),
        ("Moves To", "From The"),
        ("Smith, J.", "Smith,J"),
    ];
    for (i, g) in games.iter_mut().enumerate() {
        let (w, b) = names[i % names.len()];
        g.meta.white_name = w.to_owned();
        g.meta.black_name = b.to_owned();
        g.meta.result = [GameResult::WhiteWin, GameResult::Draw, GameResult::Unknown, GameResult::BlackWin][i % 4];
        if i % 3 == 0 {
            g.meta.white_elo = None;
        }
        g.meta.eco_code = Some(["B90", "A11", "Z99", "C65"][i % 4].to_owned());
    }
    for g in &games {
        for seed in 0..3 {
            round_trip(g, &TemplateSet::default().with_seed(seed)).unwrap();
        }
    }
}

#[test]
fn custom_templates_round_trip() {
    let t = TemplateSet {
        moves: vec!["The {color} {piece} travels from {from} to {to}".into(), "{player} shifts a {piece} from {from} to {to}".into()],
        move_number: vec!["Turn {n} - ".into(), "At move {n}, ".into()],
        flavor_rate: 1.0,
        ..TemplateSet::default()
    };
    let games = simulate_corpus(2_000, 4, &SelfPlayConfig::default());
    let ex = Extractor::new(&t);
    for g in &games {
        let text = narrate_game(g, &t);
        let got: Vec<Key> = ex.extract(&text, Source::Human).moves.iter().map(|m| m.move_key()).collect();
        assert_eq!(got, keys(g));
    }
}

#[test]
fn periods_inside_ply_templates_are_rejected() {
    let t = TemplateSet {
        move_number: vec!["Turn {n}. ".into()],
        ..TemplateSet::default()
    };
    assert!(t.validate().is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn simulated_games_round_trip(corpus_seed in 0u64..1_000_000, template_seed in any::<u64>()) {
        let games = simulate_corpus(1, corpus_seed, &SelfPlayConfig::default());
        let t = TemplateSet::default().with_seed(template_seed);
        prop_assert!(round_trip(&games[0], &t).is_ok(), "{}", round_trip(&games[0], &t).unwrap_err());
    }

    #[test]
    fn extracted_squares_appear_verbatim(corpus_seed in 0u64..1_000_000, template_seed in any::<u64>()) {
        let games = simulate_corpus(1, corpus_seed, &SelfPlayConfig::default());
        let text = narrate_game(&games[0], &TemplateSet::default().with_seed(template_seed));
        let r = extract_moves(&text, Source::Human);
        let mut cursor = 0;
        for m in &r.moves {
            let from = text[cursor..].find(&m.from.name());
            prop_assert!(from.is_some());
            prop_assert!(text.contains(&m.to.name()));
            cursor += from.unwrap();
        }
    }
}
