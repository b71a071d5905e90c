//! Consultation sessions: the scenario state machine and its transcript.

mod engine;
mod transcript;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use uuid::Uuid;

use crate::gateway::{GenMetrics, Provenance};
use crate::interview::{CustomerProfile, InterviewState};

pub use engine::{Engine, EngineSettings, DEFAULT_MAX_QA_ROUNDS, DEFAULT_TIME_BUDGET_SECS};
pub use transcript::{parse_transcript, persist_transcript, replay, transcript_jsonl, TranscriptRecord};

/// Scenario phases in order. `Done` is absorbing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Phase {
    Greeting,
    Icebreaker,
    BriefExplanation,
    Interview,
    Recommendation,
    Qa,
    Closing,
    Done,
}

impl Phase {
    pub fn as_str(self) -> &'static str {
        match self {
            Phase::Greeting => "greeting",
            Phase::Icebreaker => "icebreaker",
            Phase::BriefExplanation => "brief_explanation",
            Phase::Interview => "interview",
            Phase::Recommendation => "recommendation",
            Phase::Qa => "qa",
            Phase::Closing => "closing",
            Phase::Done => "done",
        }
    }

    /// Phases in which the agent points at the monitor.
    pub fn shows_monitor(self) -> bool {
        matches!(self, Phase::BriefExplanation | Phase::Recommendation)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Speaker {
    Agent,
    Customer,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Expression {
    #[default]
    Neutral,
    Surprised,
}

/// Presentation cues attached to agent turns.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Annotations {
    pub expression: Expression,
    /// Nod while waiting for the customer to speak.
    pub nod_cue: bool,
    pub look_at_monitor: bool,
    pub provenance: Provenance,
}

/// One utterance in a session.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Turn {
    pub ts: DateTime<Utc>,
    pub speaker: Speaker,
    pub phase: Phase,
    pub text: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub annotations: Option<Annotations>,
}

/// The two candidate sights and which one to recommend.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Assignment {
    pub candidate_a: String,
    pub candidate_b: String,
    pub recommended: String,
}

impl Assignment {
    pub fn new(a: impl Into<String>, b: impl Into<String>, recommended: impl Into<String>) -> Self {
        Self {
            candidate_a: a.into(),
            candidate_b: b.into(),
            recommended: recommended.into(),
        }
    }

    /// The candidate that is not recommended.
    pub fn other(&self) -> &str {
        if self.recommended == self.candidate_a {
            &self.candidate_b
        } else {
            &self.candidate_a
        }
    }
}

/// Progress through the question-answering phase.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QaStage {
    /// Waiting for a reply to "any questions?".
    #[default]
    Offered,
    /// The customer said yes; waiting for the question itself.
    AwaitingQuestion,
}

/// A consultation in progress.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Session {
    pub id: Uuid,
    pub assignment: Assignment,
    pub phase: Phase,
    pub started_at: DateTime<Utc>,
    pub turns: Vec<Turn>,
    pub profile: CustomerProfile,
    pub interview: InterviewState,
    /// Agent questions asked in the icebreaker so far.
    pub icebreak_turn: u8,
    pub qa_stage: QaStage,
    pub qa_rounds: u32,
    /// The customer said they had visited a candidate before.
    pub visited_before: Option<bool>,
    pub metrics: GenMetrics,
}

impl Session {
    pub fn is_done(&self) -> bool {
        self.phase == Phase::Done
    }

    /// The most recent agent turn.
    pub fn last_agent_turn(&self) -> Option<&Turn> {
        self.turns.iter().rev().find(|t| t.speaker == Speaker::Agent)
    }

    pub fn last_ts(&self) -> Option<DateTime<Utc>> {
        self.turns.last().map(|t| t.ts)
    }
}
