use std::sync::Arc;

use chrono::{DateTime, Duration, Utc};
use uuid::Uuid;

use super::{Annotations, Assignment, Expression, Phase, QaStage, Session, Speaker, Turn};
use crate::bundle::ArtifactBundle;
use crate::clock::Clock;
use crate::closing::closing_utterances;
use crate::error::{Error, SessionError};
use crate::gateway::{GenMetrics, Gateway, Generation, KanaConfig, Provenance};
use crate::interview::{
    question_text, AnswerLexicon, CustomerProfile, InterviewState, NodeId, QuestionGraph, Step, Target, YesNo,
};
use crate::qa::{self, wants_question, QaContext, QaIntent};
use crate::recommendation::{
    counter_utterance, join_sentences, point_evidence, recommend_utterance, select_points,
    RecommendInput,
};
use crate::sightdb::{SightCatalog, SightRecord};
use crate::text::has_exclamation;

pub const DEFAULT_TIME_BUDGET_SECS: i64 = 300;
pub const DEFAULT_MAX_QA_ROUNDS: u32 = 5;

#[derive(Debug, Clone, PartialEq)]
pub struct EngineSettings {
    /// Once this much time has passed since the session started, the next
    /// advance goes straight to closing.
    pub time_budget: Duration,
    /// Questions answered before closing.
    pub max_qa_rounds: u32,
    /// Reading disambiguation for agent utterances; off when `None`.
    pub kana: Option<KanaConfig>,
}

impl Default for EngineSettings {
    fn default() -> Self {
        Self {
            time_budget: Duration::seconds(DEFAULT_TIME_BUDGET_SECS),
            max_qa_rounds: DEFAULT_MAX_QA_ROUNDS,
            kana: None,
        }
    }
}

/// Shared, immutable resources plus the scenario rules. One engine serves
/// any number of sessions.
#[derive(Clone)]
pub struct Engine {
    bundle: Arc<ArtifactBundle>,
    catalog: Arc<SightCatalog>,
    gateway: Gateway,
    lexicon: Arc<AnswerLexicon>,
    graph: Arc<QuestionGraph>,
    clock: Arc<dyn Clock>,
    settings: EngineSettings,
}

impl std::fmt::Debug for Engine {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Engine")
            .field("sights", &self.catalog.len())
            .field("gateway", &self.gateway)
            .field("settings", &self.settings)
            .finish_non_exhaustive()
    }
}

/// Agent turns produced by one advance, all stamped with the same instant.
struct Emitter {
    now: DateTime<Utc>,
    first: usize,
}

impl Engine {
    pub fn new(
        bundle: Arc<ArtifactBundle>,
        gateway: Gateway,
        lexicon: Arc<AnswerLexicon>,
        graph: Arc<QuestionGraph>,
        clock: Arc<dyn Clock>,
        settings: EngineSettings,
    ) -> Result<Self, Error> {
        let catalog = Arc::new(bundle.catalog()?);
        Ok(Self {
            bundle,
            catalog,
            gateway,
            lexicon,
            graph,
            clock,
            settings,
        })
    }

    /// The same engine reading time from `clock`.
    pub fn with_clock(&self, clock: Arc<dyn Clock>) -> Self {
        Self {
            clock,
            ..self.clone()
        }
    }

    pub fn catalog(&self) -> &SightCatalog {
        &self.catalog
    }

    pub fn bundle(&self) -> &ArtifactBundle {
        &self.bundle
    }

    pub fn gateway(&self) -> &Gateway {
        &self.gateway
    }

    pub fn settings(&self) -> &EngineSettings {
        &self.settings
    }

    pub fn now(&self) -> DateTime<Utc> {
        self.clock.now()
    }

    /// Checks the assignment and opens a session in the greeting phase.
    pub fn start(&self, assignment: Assignment, seed: u64) -> Result<Session, Error> {
        let started_at = self.clock.now();
        self.start_at(assignment, seed, started_at)
    }

    pub(crate) fn start_at(
        &self,
        assignment: Assignment,
        seed: u64,
        started_at: DateTime<Utc>,
    ) -> Result<Session, Error> {
        self.validate(&assignment)?;
        Ok(Session {
            id: Uuid::new_v4(),
            assignment,
            phase: Phase::Greeting,
            started_at,
            turns: Vec::new(),
            profile: CustomerProfile::default(),
            interview: InterviewState::default(),
            icebreak_turn: 0,
            qa_stage: QaStage::default(),
            qa_rounds: 0,
            visited_before: None,
            metrics: GenMetrics::new(seed),
        })
    }

    fn validate(&self, a: &Assignment) -> Result<(), SessionError> {
        if a.candidate_a == a.candidate_b {
            return Err(SessionError::SameCandidates(a.candidate_a.clone()));
        }
        for id in [&a.candidate_a, &a.candidate_b] {
            if !self.catalog.contains(id) {
                return Err(SessionError::UnknownSight(id.clone()));
            }
            if self.bundle.artifacts(id).is_none() {
                return Err(SessionError::MissingArtifacts(id.clone()));
            }
        }
        if a.recommended != a.candidate_a && a.recommended != a.candidate_b {
            return Err(SessionError::InvalidAssignment {
                candidate_a: a.candidate_a.clone(),
                candidate_b: a.candidate_b.clone(),
                recommended: a.recommended.clone(),
            });
        }
        Ok(())
    }

    /// Feeds one customer utterance (or `None` to let the agent open the
    /// session) and returns the agent turns it produced. Every turn of one
    /// advance carries the same timestamp, never earlier than the previous
    /// turn.
    pub fn advance(&self, session: &mut Session, utterance: Option<&str>) -> Result<Vec<Turn>, Error> {
        if session.is_done() {
            return Err(SessionError::Terminal.into());
        }
        let floor = session.last_ts().unwrap_or(session.started_at);
        let now = self.clock.now().max(floor);
        if session.turns.is_empty() {
            // The conversation, and its time budget, starts with the first
            // utterance rather than with session creation.
            session.started_at = now;
        }
        let text = utterance.map(str::trim).unwrap_or("");
        if utterance.is_some() {
            session.turns.push(Turn {
                ts: now,
                speaker: Speaker::Customer,
                phase: session.phase,
                text: text.to_string(),
                annotations: None,
            });
        }
        let out = Emitter {
            now,
            first: session.turns.len(),
        };
        let over_budget = now - session.started_at >= self.settings.time_budget;
        if over_budget && session.phase != Phase::Closing {
            self.close(session, &out)?;
        } else {
            match session.phase {
                Phase::Greeting => self.greet(session, &out)?,
                Phase::Icebreaker => self.icebreak(session, &out, text)?,
                Phase::BriefExplanation => self.brief(session, &out, text)?,
                Phase::Interview => self.interview(session, &out, text)?,
                Phase::Recommendation => self.recommend(session, &out)?,
                Phase::Qa => self.qa(session, &out, text)?,
                Phase::Closing => self.close(session, &out)?,
                Phase::Done => unreachable!("checked above"),
            }
        }
        if !session.is_done() {
            if let Some(annotations) = session.turns[out.first..]
                .last_mut()
                .and_then(|t| t.annotations.as_mut())
            {
                annotations.nod_cue = true;
            }
        }
        Ok(session.turns[out.first..].to_vec())
    }

    fn say(&self, session: &mut Session, out: &Emitter, text: String, provenance: Provenance) -> Result<(), Error> {
        let text = match &self.settings.kana {
            Some(kana) => self.gateway.kana_normalize(&text, kana, &mut session.metrics)?,
            None => text,
        };
        let phase = session.phase;
        session.turns.push(Turn {
            ts: out.now,
            speaker: Speaker::Agent,
            phase,
            annotations: Some(Annotations {
                expression: if has_exclamation(&text) {
                    Expression::Surprised
                } else {
                    Expression::Neutral
                },
                nod_cue: false,
                look_at_monitor: phase.shows_monitor(),
                provenance,
            }),
            text,
        });
        Ok(())
    }

    fn say_line(&self, session: &mut Session, out: &Emitter, key: &str, bindings: &[(&str, &str)]) -> Result<(), Error> {
        let text = self.gateway.line(key, bindings);
        self.say(session, out, text, Provenance::Fixed)
    }

    fn say_generated(&self, session: &mut Session, out: &Emitter, generation: Generation) -> Result<(), Error> {
        self.say(session, out, generation.text, generation.provenance)
    }

    fn record(&self, id: &str) -> &SightRecord {
        self.catalog.get(id).expect("assignment validated at start")
    }

    fn summary(&self, id: &str) -> &str {
        self.bundle
            .artifacts(id)
            .map(|a| a.summary.as_str())
            .expect("assignment validated at start")
    }

    fn loc_questions(&self, session: &Session) -> Vec<String> {
        self.bundle
            .loc_set(&session.assignment.recommended)
            .map(|s| s.questions)
            .unwrap_or_default()
    }

    fn greet(&self, session: &mut Session, out: &Emitter) -> Result<(), Error> {
        for key in ["greeting", "self_intro", "speak_loudly"] {
            self.say_line(session, out, key, &[])?;
        }
        session.phase = Phase::Icebreaker;
        session.icebreak_turn = 1;
        self.say_line(session, out, "icebreak_opening", &[])
    }

    fn icebreak(&self, session: &mut Session, out: &Emitter, answer: &str) -> Result<(), Error> {
        let question = session
            .last_agent_turn()
            .map(|t| t.text.clone())
            .unwrap_or_default();
        if session.icebreak_turn <= 1 {
            let g = self
                .gateway
                .icebreak_question("", &question, answer, &mut session.metrics)?;
            self.say_generated(session, out, g)?;
            session.icebreak_turn = 2;
            return Ok(());
        }
        let g = self
            .gateway
            .icebreak_comment(&question, answer, &mut session.metrics)?;
        self.say_generated(session, out, g)?;
        session.icebreak_turn = 3;
        session.phase = Phase::BriefExplanation;
        self.say_line(session, out, "brief_intro", &[])?;
        self.say_line(session, out, "brief_ask", &[])
    }

    fn brief(&self, session: &mut Session, out: &Emitter, answer: &str) -> Result<(), Error> {
        let key = match self.lexicon.classify_yes_no(answer) {
            YesNo::Yes => {
                session.visited_before = Some(true);
                "brief_yes"
            }
            YesNo::No => {
                session.visited_before = Some(false);
                "brief_no"
            }
            YesNo::Unknown => "brief_unknown",
        };
        self.say_line(session, out, key, &[])?;
        let assignment = session.assignment.clone();
        for (key, id) in [
            ("sight_intro_first", &assignment.candidate_a),
            ("sight_intro_second", &assignment.candidate_b),
        ] {
            let name = self.record(id).name.clone();
            let summary = self.summary(id).to_string();
            self.say_line(session, out, key, &[("name", &name), ("summary", &summary)])?;
        }
        session.phase = Phase::Interview;
        self.say_line(session, out, "interview_intro", &[])?;
        let loc = self.loc_questions(session);
        match session.interview.begin(&self.graph, loc.len()) {
            Target::Node(id) => self.ask(session, out, id, &loc, None),
            Target::Exit => self.recommend(session, out),
        }
    }

    fn ask(&self, session: &mut Session, out: &Emitter, id: NodeId, loc: &[String], preamble: Option<String>) -> Result<(), Error> {
        let node = self.graph.node(id).expect("interview targets are validated");
        let question = question_text(node, loc).to_string();
        let text = match preamble {
            Some(p) => join_sentences(&[p, question]),
            None => question,
        };
        self.say(session, out, text, Provenance::Fixed)
    }

    fn interview(&self, session: &mut Session, out: &Emitter, answer: &str) -> Result<(), Error> {
        let loc = self.loc_questions(session);
        let asked = session
            .interview
            .current
            .and_then(|id| self.graph.node(id))
            .map(|n| question_text(n, &loc).to_string())
            .unwrap_or_default();
        let recommended = session.assignment.recommended.clone();
        let step = session.interview.answer(
            &self.graph,
            &self.lexicon,
            &mut session.profile,
            answer,
            &recommended,
            loc.len(),
        );
        match step {
            None => self.recommend(session, out),
            Some(Step::Reask(id)) => {
                let preamble = self.gateway.line("clarification", &[]);
                self.ask(session, out, id, &loc, Some(preamble))
            }
            Some(Step::Answered { next, .. }) => {
                let context = session.profile.describe();
                let g = self
                    .gateway
                    .comment(&asked, answer, &context, &mut session.metrics)?;
                self.say_generated(session, out, g)?;
                match next {
                    Target::Node(id) => self.ask(session, out, id, &loc, None),
                    Target::Exit => self.recommend(session, out),
                }
            }
        }
    }

    fn recommend(&self, session: &mut Session, out: &Emitter) -> Result<(), Error> {
        session.phase = Phase::Recommendation;
        let rec_id = session.assignment.recommended.clone();
        let other_id = session.assignment.other().to_string();
        let record = self.record(&rec_id);
        let features = self.catalog.features(&rec_id).expect("validated sight");
        let artifacts = self.bundle.artifacts(&rec_id).expect("validated sight");
        let loc_set = self.bundle.loc_set(&rec_id);
        let points = select_points(&self.gateway, &session.profile, loc_set.as_ref(), record, features);
        let evidence = point_evidence(&self.catalog, &rec_id, &points);
        let g = recommend_utterance(
            &self.gateway,
            RecommendInput {
                record,
                summary: &artifacts.summary,
                appeal: &artifacts.appeal,
                points: &points,
                evidence: &evidence,
            },
            &mut session.metrics,
        )?;
        self.say_generated(session, out, g)?;
        let other = self.record(&other_id);
        let g = counter_utterance(
            &self.gateway,
            other,
            self.summary(&other_id),
            self.catalog.features(&other_id).expect("validated sight"),
            record,
            &mut session.metrics,
        )?;
        self.say_generated(session, out, g)?;
        session.phase = Phase::Qa;
        session.qa_stage = QaStage::Offered;
        self.say_line(session, out, "qa_offer", &[])
    }

    fn qa(&self, session: &mut Session, out: &Emitter, utterance: &str) -> Result<(), Error> {
        let question = match session.qa_stage {
            QaStage::AwaitingQuestion => utterance.to_string(),
            QaStage::Offered => match wants_question(utterance, &self.lexicon) {
                QaIntent::Decline => return self.close(session, out),
                QaIntent::WantsToAsk => {
                    session.qa_stage = QaStage::AwaitingQuestion;
                    return self.say_line(session, out, "qa_go_ahead", &[]);
                }
                QaIntent::Question(q) => q,
            },
        };
        let a = &session.assignment;
        let ctx = QaContext {
            gateway: &self.gateway,
            catalog: &self.catalog,
            first: self.record(&a.candidate_a),
            first_summary: self.summary(&a.candidate_a),
            second: self.record(&a.candidate_b),
            second_summary: self.summary(&a.candidate_b),
            recommended_id: &a.recommended,
        };
        let mut metrics = std::mem::take(&mut session.metrics);
        let answer = qa::answer(ctx, &question, &mut metrics);
        session.metrics = metrics;
        self.say_generated(session, out, answer?.generation)?;
        session.qa_rounds += 1;
        if session.qa_rounds >= self.settings.max_qa_rounds {
            return self.close(session, out);
        }
        session.qa_stage = QaStage::Offered;
        self.say_line(session, out, "qa_more", &[])
    }

    fn close(&self, session: &mut Session, out: &Emitter) -> Result<(), Error> {
        session.phase = Phase::Closing;
        let rec_id = session.assignment.recommended.clone();
        let summary = self.summary(&rec_id).to_string();
        let utterances = closing_utterances(&self.gateway, &self.catalog, &rec_id, &summary, &mut session.metrics)?;
        for g in utterances {
            self.say_generated(session, out, g)?;
        }
        session.phase = Phase::Done;
        Ok(())
    }
}
