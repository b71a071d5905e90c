mod common;

use common::*;
use tourdesk_core::session::{parse_transcript, persist_transcript, replay, transcript_jsonl, Speaker};

fn finished() -> (tourdesk_core::session::Engine, tourdesk_core::session::Session) {
    let engine = engine();
    let mut session = engine.start(assignment(), 9).unwrap();
    engine.advance(&mut session, None).unwrap();
    for line in SCRIPT {
        engine.advance(&mut session, Some(line)).unwrap();
    }
    (engine, session)
}

#[test]
fn persisted_transcript_parses_back() {
    let (_, session) = finished();
    let mut file = tempfile::NamedTempFile::new().unwrap();
    persist_transcript(&session, &mut file).unwrap();
    let text = std::fs::read_to_string(file.path()).unwrap();
    assert_eq!(text.lines().count(), session.turns.len());
    assert_eq!(parse_transcript(&text).unwrap(), session.turns);
    let first: serde_json::Value = serde_json::from_str(text.lines().next().unwrap()).unwrap();
    for key in ["ts", "speaker", "phase", "text", "annotations"] {
        assert!(first.get(key).is_some(), "{key}");
    }
    let customer = text.lines().find(|l| l.contains("\"customer\"")).unwrap();
    assert!(!customer.contains("annotations"));
}

#[test]
fn replay_reproduces_agent_turns() {
    let (engine, session) = finished();
    let records = parse_transcript(&transcript_jsonl(&session.turns)).unwrap();
    let replayed = replay(&engine, assignment(), &records, 9).unwrap();
    assert_eq!(replayed.turns, session.turns);
    assert_eq!(replayed.profile, session.profile);
    assert_eq!(replayed.metrics, session.metrics);
    assert!(replayed.is_done());
}

#[test]
fn replay_rejects_turns_after_the_end() {
    let (engine, session) = finished();
    let mut records = session.turns.clone();
    let mut extra = records
        .iter()
        .rfind(|t| t.speaker == Speaker::Customer)
        .unwrap()
        .clone();
    extra.ts = records.last().unwrap().ts;
    records.push(extra);
    assert!(replay(&engine, assignment(), &records, 9).is_err());
    assert!(replay(&engine, assignment(), &[], 9).is_err());
}

#[test]
fn garbage_transcript_is_an_error() {
    assert!(parse_transcript("{\"ts\": 1}\n").is_err());
    assert!(parse_transcript("\n\n").unwrap().is_empty());
}
