//! JSON-lines transcripts and deterministic replay.

use std::io::Write;
use std::sync::Arc;

use super::{Assignment, Engine, Session, Speaker, Turn};
use crate::clock::ManualClock;
use crate::error::{Error, SessionError};

/// One transcript line: `{ts, speaker, phase, text, annotations?}`.
pub type TranscriptRecord = Turn;

/// The whole transcript as JSON lines.
pub fn transcript_jsonl(turns: &[Turn]) -> String {
    let mut out = String::new();
    for turn in turns {
        out.push_str(&serde_json::to_string(turn).expect("turns serialize"));
        out.push('\n');
    }
    out
}

/// Writes the transcript in one call so a reader never sees a partial
/// line from this session.
pub fn persist_transcript(session: &Session, sink: &mut impl Write) -> std::io::Result<()> {
    sink.write_all(transcript_jsonl(&session.turns).as_bytes())?;
    sink.flush()
}

pub fn parse_transcript(text: &str) -> Result<Vec<TranscriptRecord>, Error> {
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| serde_json::from_str(l).map_err(Error::from))
        .collect()
}

/// Re-runs a session from the customer turns of `records`, each advanced
/// at its recorded timestamp. With the same engine resources and `seed` the agent turns come
/// out identical to the original run.
pub fn replay(
    engine: &Engine,
    assignment: Assignment,
    records: &[TranscriptRecord],
    seed: u64,
) -> Result<Session, Error> {
    let first = records
        .first()
        .ok_or_else(|| SessionError::Replay("empty transcript".into()))?;
    let clock = Arc::new(ManualClock::new(first.ts));
    let engine = engine.with_clock(clock.clone());
    let mut session = engine.start_at(assignment, seed, first.ts)?;
    if first.speaker == Speaker::Agent {
        engine.advance(&mut session, None)?;
    }
    for record in records.iter().filter(|r| r.speaker == Speaker::Customer) {
        if session.is_done() {
            return Err(SessionError::Replay(format!(
                "session ended before the customer turn at {}",
                record.ts
            ))
            .into());
        }
        clock.set(record.ts);
        engine.advance(&mut session, Some(&record.text))?;
    }
    Ok(session)
}
