mod common;

use tourdesk_core::interview::{AnswerLexicon, Companion, YesNo};

fn label(s: &str) -> YesNo {
    match s {
        "yes" => YesNo::Yes,
        "no" => YesNo::No,
        "unknown" => YesNo::Unknown,
        other => panic!("bad label {other:?}"),
    }
}

/// Share of the labeled yes/no fixture the English lexicon agrees with.
pub fn yes_no_agreement(lexicon: &AnswerLexicon) -> (usize, usize, Vec<String>) {
    let text = common::fixture("yes_no_labeled.tsv");
    let mut total = 0;
    let mut agree = 0;
    let mut misses = Vec::new();
    for line in text.lines().filter(|l| !l.starts_with('#') && !l.trim().is_empty()) {
        let (utterance, expected) = line.split_once('\t').expect("tab-separated");
        total += 1;
        let got = lexicon.classify_yes_no(utterance);
        if got == label(expected.trim()) {
            agree += 1;
        } else {
            misses.push(format!("{utterance:?}: got {got:?}, labeled {expected}"));
        }
    }
    (agree, total, misses)
}

#[test]
fn yes_no_fixture_agreement_at_least_ninety_percent() {
    let (agree, total, misses) = yes_no_agreement(&AnswerLexicon::english());
    assert_eq!(total, 50);
    assert!(agree * 10 >= total * 9, "{agree}/{total}: {misses:#?}");
}

#[test]
fn companion_examples() {
    let lex = AnswerLexicon::english();
    for (utterance, expected) in [
        ("with my family", Companion::Family),
        ("by myself", Companion::Alone),
        ("with my wife and son", Companion::Family),
        ("with my partner", Companion::Friend),
        ("with some friends from work", Companion::Friend),
        ("just me", Companion::Alone),
        ("my parents are coming", Companion::Family),
    ] {
        assert_eq!(lex.classify_companion(utterance), expected, "{utterance}");
    }
}

#[test]
fn age_examples() {
    let lex = AnswerLexicon::english();
    assert_eq!(lex.extract_ages("They are 5 and 2 years old."), vec![5, 2]);
    assert_eq!(lex.extract_ages("no kids"), Vec::<u32>::new());
    assert_eq!(lex.extract_ages("a 12-year-old and a newborn"), vec![12, 0]);
}

#[test]
fn negated_affirmatives_are_negative() {
    let lex = AnswerLexicon::english();
    assert_eq!(lex.classify_yes_no("not really"), YesNo::No);
    assert_eq!(lex.classify_yes_no("yes, I have"), YesNo::Yes);
    assert_eq!(lex.classify_yes_no("no"), YesNo::No);
}

