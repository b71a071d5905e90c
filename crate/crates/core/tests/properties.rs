mod common;

use std::sync::OnceLock;

use proptest::prelude::*;
use tourdesk_core::gateway::{fill, slot_markers};
use tourdesk_core::interview::{
    select_loc_questions, AnswerLexicon, CustomerProfile, InterviewState, QuestionGraph, Step, Target,
};
use tourdesk_core::sightdb::{
    derive_features, field_tokens, hit_order, query_tokens, record_fields, score, CatalogOptions,
    FeatureThresholds, Review, SearchHit, SightCatalog, SightRecord,
};
use tourdesk_core::text::{digit_runs, fold, ungrounded_digits};
use tourdesk_core::TriState;

const WORDS: &[&str] = &[
    "museum", "park", "ticket", "price", "open", "hours", "station", "walk", "yen", "adult", "child",
    "view", "night", "train", "line", "closed", "monday", "free", "where", "address",
];

fn lexicon() -> &'static AnswerLexicon {
    static LEXICON: OnceLock<AnswerLexicon> = OnceLock::new();
    LEXICON.get_or_init(AnswerLexicon::english)
}

fn phrase(max: usize) -> impl Strategy<Value = String> {
    prop::collection::vec(prop::sample::select(WORDS), 1..max).prop_map(|w| w.join(" "))
}

fn tri() -> impl Strategy<Value = TriState> {
    prop_oneof![Just(TriState::Yes), Just(TriState::No), Just(TriState::Unknown)]
}

fn record(id: usize) -> impl Strategy<Value = SightRecord> {
    (
        phrase(8),
        phrase(6),
        phrase(6),
        prop_oneof![
            (0u32..5000).prop_map(|y| format!("Adult: {y}yen")),
            Just("Free".to_string()),
            phrase(4),
        ],
        prop::collection::vec((phrase(6), 1u8..=5), 0..4),
        0u32..1000,
        tri(),
        prop::option::of(0u32..3000),
    )
        .prop_map(move |(summary, hours, access, charge, reviews, n, indoor, distance)| SightRecord {
            sight_id: format!("sight_{id}"),
            name: format!("Sight {id}"),
            summary_long: summary,
            summary_one_line: String::new(),
            business_hours: hours,
            location: format!("{id}-1 Daiba, Minato-ku"),
            access,
            charge,
            reviews: reviews.into_iter().map(|(text, rating)| Review { text, rating }).collect(),
            review_score: (n > 0).then_some(4.0),
            n_reviews: n,
            indoor,
            distance_from_station: distance,
            price_override: None,
        })
}

fn corpus() -> impl Strategy<Value = Vec<SightRecord>> {
    (1usize..=10).prop_flat_map(|n| (0..n).map(record).collect::<Vec<_>>())
}

/// Scores every field of every record directly.
fn brute_force(records: &[SightRecord], query: &str) -> Vec<SearchHit> {
    let q = query_tokens(query, false);
    let mut hits = Vec::new();
    for r in records {
        for (field, text) in record_fields(r) {
            let s = score(&q, field, &field_tokens(field, text, false));
            if s > 0.0 {
                hits.push(SearchHit {
                    sight_id: r.sight_id.clone(),
                    field,
                    text: text.to_string(),
                    score: s,
                });
            }
        }
    }
    hits.sort_by(hit_order);
    hits
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn catalog_round_trips(records in corpus()) {
        let catalog = SightCatalog::from_records(records, CatalogOptions::default()).unwrap();
        let again = SightCatalog::ingest_str(&catalog.serialize(), CatalogOptions::default()).unwrap();
        prop_assert_eq!(&again, &catalog);
        for r in catalog.records() {
            prop_assert_eq!(again.features(&r.sight_id), catalog.features(&r.sight_id));
        }
    }

    #[test]
    fn search_matches_brute_force_and_is_ordered(records in corpus(), query in phrase(4), k in 0usize..8) {
        let catalog = SightCatalog::from_records(records.clone(), CatalogOptions::default()).unwrap();
        let hits = catalog.search(&query, None, k);
        let oracle = brute_force(&records, &query);
        prop_assert!(hits.len() <= k);
        prop_assert_eq!(&hits[..], &oracle[..k.min(oracle.len())]);
        for w in hits.windows(2) {
            prop_assert_ne!(hit_order(&w[0], &w[1]), std::cmp::Ordering::Greater);
        }
        prop_assert_eq!(catalog.search(&query, None, k), hits);
    }

    #[test]
    fn features_are_pure(r in record(0)) {
        let t = FeatureThresholds::default();
        prop_assert_eq!(derive_features(&r, &t), derive_features(&r.clone(), &t));
    }

    #[test]
    fn positive_reviews_are_sorted(r in record(0), k in 0usize..5) {
        let catalog = SightCatalog::from_records(vec![r.clone()], CatalogOptions::default()).unwrap();
        let got = catalog.positive_reviews(&r.sight_id, k);
        prop_assert!(got.len() <= k);
        let rating = |text: &str| r.reviews.iter().find(|x| x.text == text).unwrap().rating;
        for w in got.windows(2) {
            let (a, b) = (rating(w[0]), rating(w[1]));
            prop_assert!(a > b || (a == b && w[0].chars().count() >= w[1].chars().count()));
        }
        prop_assert!(got.iter().all(|t| rating(t) >= 4));
    }

    #[test]
    fn interview_terminates_within_eight_questions(
        answers in prop::collection::vec(prop::sample::select(&[
            "yes", "no", "hmm", "with my family", "alone", "with friends", "5 and 2", "good food", "",
        ][..]), 0..40),
        loc in 0usize..=3,
    ) {
        let graph = QuestionGraph::standard();
        let lexicon = lexicon();
        let mut state = InterviewState::default();
        let mut profile = CustomerProfile::default();
        let mut target = state.begin(&graph, loc);
        let mut answers = answers.into_iter().chain(std::iter::repeat("hmm"));
        let mut steps = 0;
        while target != Target::Exit {
            let before = profile.clone();
            if let Some(Step::Answered { next, .. }) =
                state.answer(&graph, lexicon, &mut profile, answers.next().unwrap(), "s", loc)
            {
                target = next;
            }
            // Slots, once set, keep their value.
            if before.participants != Default::default() {
                prop_assert_eq!(profile.participants, before.participants);
            }
            if before.uses_car != TriState::Unknown {
                prop_assert_eq!(profile.uses_car, before.uses_car);
            }
            if !before.children_ages.is_empty() {
                prop_assert_eq!(&profile.children_ages, &before.children_ages);
            }
            steps += 1;
            prop_assert!(steps <= 16);
        }
        prop_assert!(state.asked.len() <= 8);
        prop_assert!(state.asked.ends_with(&[4, 5]));
        if !profile.children_ages.is_empty() {
            prop_assert_eq!(profile.brings_children, TriState::Yes);
        }
        let loc_asked = state.asked.iter().filter(|n| (6..=8).contains(*n)).count();
        prop_assert_eq!(loc_asked, loc);
    }

    #[test]
    fn loc_selection_ignores_later_duplicates(
        picks in prop::collection::vec(0usize..6, 1..10),
        dup_at in 0usize..10,
    ) {
        const POOL: [&str; 6] = [
            "Do you like history?", "Do you like the sea?", "Do you like robots?",
            "Do you like views?", "Visit now!", "Do you like games?",
        ];
        let lexicon = lexicon();
        let candidates: Vec<String> = picks.iter().map(|&i| POOL[i].to_string()).collect();
        let mut with_dup = candidates.clone();
        if let Some(first) = candidates.first() {
            with_dup.insert(dup_at.min(with_dup.len()).max(1), first.to_uppercase());
        }
        let a = select_loc_questions(&candidates, 3, lexicon);
        let b = select_loc_questions(&with_dup, 3, lexicon);
        prop_assert_eq!(a.is_ok(), b.is_ok());
        if let (Ok(a), Ok(b)) = (a, b) {
            prop_assert_eq!(&a, &b);
            prop_assert!(a.len() <= 3);
            let folded: std::collections::BTreeSet<_> = a.iter().map(|q| fold(q)).collect();
            prop_assert_eq!(folded.len(), a.len());
        }
    }

    #[test]
    fn fill_binds_every_marker(name in "[a-z]{1,8}", value in "[^{}]{0,20}") {
        let template = format!("Hello {{{{{name}}}}}, again {{{{{name}}}}}.");
        prop_assert_eq!(slot_markers(&template).into_iter().collect::<Vec<_>>(), vec![name.clone()]);
        let filled = fill(&template, &[(name.as_str(), value.as_str())], "test").unwrap();
        prop_assert_eq!(filled, format!("Hello {value}, again {value}."));
    }

    #[test]
    fn digits_in_context_are_grounded(context in "[a-z0-9 ,]{0,40}") {
        prop_assert!(ungrounded_digits(&context, [context.as_str()]).is_empty());
        for run in digit_runs(&context) {
            prop_assert!(run.chars().all(|c| c.is_ascii_digit()));
        }
    }
}
