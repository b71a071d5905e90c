//! Prompt rendering, backend calls and output filtering.
//!
//! Every generated utterance goes through [`Gateway::complete_with_policy`]:
//! the prompt is rendered from a template, the backend is sampled, stop
//! sequences are applied and the result is checked against a
//! [`FilterPolicy`]. A rejected output is re-sampled with a new seed; after
//! `max_retries` calls the policy's fallback is used instead.

mod backend;
mod filter;
mod remote;
mod template;

use std::collections::BTreeMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::GatewayError;
use crate::interview::{select_loc_questions, strip_list_marker, AnswerLexicon};
use crate::sightdb::{HitField, SearchHit};
use crate::text::{first_sentence, truncate_chars};

pub use backend::{GenBackend, GenParams, MockBackend, MockNoise, Scripted, ScriptedBackend};
pub use filter::{apply_stop, FilterPolicy, Reject, RejectReason, DEFAULT_MAX_RETRIES, FORBIDDEN_PHRASES};
pub use remote::RemoteBackend;
pub use template::{fill, query_block, slot_markers, PromptTemplate, TemplateName, TemplatePack, REQUIRED_LINES};

/// Where an utterance's text came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    Fixed,
    Generated,
    Retrieved,
}

/// Result of one filtered generation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Generation {
    pub text: String,
    pub provenance: Provenance,
    /// Backend calls made.
    pub attempts: u32,
    /// Whether the fallback was used.
    pub fell_back: bool,
}

impl Generation {
    pub fn fixed(text: impl Into<String>) -> Self {
        Self {
            text: text.into(),
            provenance: Provenance::Fixed,
            attempts: 0,
            fell_back: false,
        }
    }
}

/// Per-session generation counters. The seed of every request is derived
/// from `seed` and the number of generations so far, so a session is
/// reproducible given its inputs.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct GenMetrics {
    pub seed: u64,
    pub generations: u64,
    pub backend_calls: u64,
    pub fallbacks: u64,
    pub rejections: BTreeMap<RejectReason, u64>,
}

impl GenMetrics {
    pub fn new(seed: u64) -> Self {
        Self {
            seed,
            ..Self::default()
        }
    }

    pub fn total_rejections(&self) -> u64 {
        self.rejections.values().sum()
    }

    fn request_seed(&self, attempt: u32) -> u64 {
        self.seed
            .wrapping_mul(0x9e37_79b9_7f4a_7c15)
            .wrapping_add(self.generations << 8)
            .wrapping_add(u64::from(attempt))
    }
}

/// Readings for characters whose pronunciation depends on context.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct KanaConfig {
    pub targets: BTreeMap<String, Vec<String>>,
}

impl Default for KanaConfig {
    fn default() -> Self {
        Self {
            targets: [("方".to_string(), vec!["かた".to_string(), "ほう".to_string()])]
                .into_iter()
                .collect(),
        }
    }
}

/// Template pack plus backend, shared by all sessions.
#[derive(Clone)]
pub struct Gateway {
    pack: Arc<TemplatePack>,
    backend: Arc<dyn GenBackend>,
    max_retries: u32,
}

impl std::fmt::Debug for Gateway {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Gateway")
            .field("language", &self.pack.language())
            .field("max_retries", &self.max_retries)
            .finish_non_exhaustive()
    }
}

impl Gateway {
    pub fn new(pack: Arc<TemplatePack>, backend: Arc<dyn GenBackend>) -> Self {
        Self {
            pack,
            backend,
            max_retries: DEFAULT_MAX_RETRIES,
        }
    }

    pub fn with_max_retries(mut self, max_retries: u32) -> Self {
        self.max_retries = max_retries;
        self
    }

    pub fn pack(&self) -> &TemplatePack {
        &self.pack
    }

    pub fn max_retries(&self) -> u32 {
        self.max_retries
    }

    /// A fixed line with slots filled.
    pub fn line(&self, key: &str, bindings: &[(&str, &str)]) -> String {
        self.pack.line(key, bindings)
    }

    /// A policy with this gateway's retry budget and the template's own
    /// fallback, plus the empty-output and length rules every call uses.
    pub fn policy(&self, name: TemplateName, bindings: &[(&str, &str)]) -> FilterPolicy {
        let template = self.pack.template(name);
        let fallback = fill(&template.fallback, bindings, name.as_str())
            .unwrap_or_else(|_| template.fallback.clone());
        FilterPolicy::new(fallback)
            .retries(self.max_retries)
            .reject(Reject::OverLength(template.max_length))
    }

    pub fn complete_with_policy(
        &self,
        name: TemplateName,
        bindings: &[(&str, &str)],
        policy: &FilterPolicy,
        metrics: &mut GenMetrics,
    ) -> Result<Generation, GatewayError> {
        let template = self.pack.template(name);
        let prompt = template.render(bindings)?;
        let mut attempts = 0;
        while attempts < policy.max_retries {
            let params = GenParams {
                temperature: template.temperature,
                max_length: template.max_length,
                stop: template.stop.clone(),
                seed: metrics.request_seed(attempts),
                task: name.as_str().to_string(),
            };
            attempts += 1;
            metrics.backend_calls += 1;
            let reason = match self.backend.complete(&prompt, &params) {
                Ok(raw) => {
                    let text = apply_stop(&raw, &template.stop).trim().to_string();
                    match policy.check(&text) {
                        None => {
                            metrics.generations += 1;
                            return Ok(Generation {
                                text,
                                provenance: Provenance::Generated,
                                attempts,
                                fell_back: false,
                            });
                        }
                        Some(reason) => reason,
                    }
                }
                Err(_) => RejectReason::BackendError,
            };
            *metrics.rejections.entry(reason).or_default() += 1;
        }
        metrics.generations += 1;
        metrics.fallbacks += 1;
        Ok(Generation {
            text: policy.fallback.clone(),
            provenance: Provenance::Fixed,
            attempts,
            fell_back: true,
        })
    }

    /// A follow-up question about the customer's answer to the opening
    /// icebreaker question.
    pub fn icebreak_question(
        &self,
        context: &str,
        question: &str,
        answer: &str,
        metrics: &mut GenMetrics,
    ) -> Result<Generation, GatewayError> {
        let name = TemplateName::IcebreakQuestion;
        let bindings = [("context", context), ("question", question), ("answer", answer)];
        let policy = self
            .policy(name, &bindings)
            .reject(Reject::NotQuestion)
            .reject(Reject::MultiLine);
        self.complete_with_policy(name, &bindings, &policy, metrics)
    }

    /// A comment on an icebreaker answer. Never a question.
    pub fn icebreak_comment(
        &self,
        question: &str,
        answer: &str,
        metrics: &mut GenMetrics,
    ) -> Result<Generation, GatewayError> {
        let name = TemplateName::IcebreakComment;
        let bindings = [("question", question), ("answer", answer)];
        let policy = self
            .policy(name, &bindings)
            .reject(Reject::QuestionMark)
            .reject(Reject::MultiLine);
        self.complete_with_policy(name, &bindings, &policy, metrics)
    }

    /// One-line summary of a sight description within the template's
    /// character budget.
    pub fn summarize(
        &self,
        sight_name: &str,
        text: &str,
        metrics: &mut GenMetrics,
    ) -> Result<Generation, GatewayError> {
        if text.trim().is_empty() {
            return Err(GatewayError::EmptyInput("summarize"));
        }
        let name = TemplateName::Summarize;
        let budget = self.pack.template(name).max_length;
        let bindings = [("name", sight_name), ("text", text)];
        let mut policy = self
            .policy(name, &bindings)
            .reject(Reject::MultiLine)
            .reject(Reject::UngroundedDigits(vec![text.to_string()]));
        policy.fallback = truncate_chars(first_sentence(text), budget);
        self.complete_with_policy(name, &bindings, &policy, metrics)
    }

    /// Up to `k` well-formed, distinct location-wise questions for a sight.
    pub fn generate_questions(
        &self,
        sight_name: &str,
        summary: &str,
        k: usize,
        lexicon: &AnswerLexicon,
        metrics: &mut GenMetrics,
    ) -> Result<Vec<String>, GatewayError> {
        let name = TemplateName::GenerateQuestions;
        let bindings = [("name", sight_name), ("summary", summary)];
        let shape = lexicon.clone();
        let mut policy = self.policy(name, &bindings).reject(Reject::Custom(
            "no well-formed question",
            Arc::new(move |text: &str| !text.lines().any(|l| shape.is_loc_question(strip_list_marker(l)))),
        ));
        policy.fallback = String::new();
        let generation = self.complete_with_policy(name, &bindings, &policy, metrics)?;
        let lines: Vec<String> = generation.text.lines().map(str::to_string).collect();
        select_loc_questions(&lines, k, lexicon)
            .map_err(|_| GatewayError::NoQuestions(sight_name.to_string()))
    }

    /// Turns a location-wise question into a declarative recommendation
    /// point naming the sight.
    pub fn translate_point(
        &self,
        sight_name: &str,
        question: &str,
        metrics: &mut GenMetrics,
    ) -> Result<Generation, GatewayError> {
        let name = TemplateName::PointTranslation;
        let bindings = [("name", sight_name), ("question", question)];
        let mut policy = self
            .policy(name, &bindings)
            .reject(Reject::QuestionMark)
            .reject(Reject::MultiLine)
            .reject(Reject::MustContain(vec![sight_name.to_string()]));
        policy.fallback = rule_based_point(sight_name, question);
        self.complete_with_policy(name, &bindings, &policy, metrics)
    }

    /// A polite comment repeating part of the customer's answer.
    pub fn comment(
        &self,
        question: &str,
        answer: &str,
        context: &str,
        metrics: &mut GenMetrics,
    ) -> Result<Generation, GatewayError> {
        let name = TemplateName::Comment;
        let bindings = [("context", context), ("question", question), ("answer", answer)];
        let policy = self
            .policy(name, &bindings)
            .reject(Reject::QuestionMark)
            .reject(Reject::MultiLine)
            .reject(Reject::MissingEcho(answer.to_string()));
        self.complete_with_policy(name, &bindings, &policy, metrics)
    }

    /// The part of `hits` relevant to `question`. Every number in the result
    /// occurs in the hits; when nothing passes the filters the top hit's
    /// text is returned as is.
    pub fn extract_info(
        &self,
        hits: &[SearchHit],
        question: &str,
        metrics: &mut GenMetrics,
    ) -> Result<Generation, GatewayError> {
        let Some(top) = hits.first() else {
            return Ok(Generation::fixed(""));
        };
        let name = TemplateName::ExtractInfo;
        let info = render_hits(hits);
        let bindings = [("info", info.as_str()), ("question", question)];
        let texts: Vec<String> = hits.iter().map(|h| h.text.clone()).collect();
        let mut policy = self
            .policy(name, &bindings)
            .reject(Reject::MultiLine)
            .reject(Reject::Forbidden(forbidden()))
            .reject(Reject::UngroundedDigits(texts));
        policy.fallback = top.text.clone();
        let mut generation = self.complete_with_policy(name, &bindings, &policy, metrics)?;
        if generation.fell_back {
            generation.provenance = Provenance::Retrieved;
        } else {
            generation.text = strip_field_label(&generation.text).to_string();
            if hits.iter().any(|h| h.text == generation.text) {
                generation.provenance = Provenance::Retrieved;
            }
        }
        Ok(generation)
    }

    /// Replaces each occurrence of a configured character with the reading
    /// chosen for its context.
    pub fn kana_normalize(
        &self,
        text: &str,
        config: &KanaConfig,
        metrics: &mut GenMetrics,
    ) -> Result<String, GatewayError> {
        let name = TemplateName::KanaNormalize;
        let mut out = String::with_capacity(text.len());
        let mut rest = text;
        loop {
            let next = config
                .targets
                .iter()
                .filter(|(_, readings)| !readings.is_empty())
                .filter_map(|(target, readings)| rest.find(target.as_str()).map(|p| (p, target, readings)))
                .min_by_key(|(p, _, _)| *p);
            let Some((pos, target, readings)) = next else {
                out.push_str(rest);
                return Ok(out);
            };
            let after = &rest[pos + target.len()..];
            let sentence = format!("{out}{}[{target}]{after}", &rest[..pos]);
            let joined = readings.join(" / ");
            let bindings = [("sentence", sentence.as_str()), ("readings", joined.as_str())];
            let mut policy = self
                .policy(name, &bindings)
                .reject(Reject::NotOneOf(readings.clone()));
            policy.fallback = readings[0].clone();
            let reading = self.complete_with_policy(name, &bindings, &policy, metrics)?;
            out.push_str(&rest[..pos]);
            out.push_str(reading.text.trim());
            rest = after;
        }
    }
}

/// Phrases no generated utterance may contain.
pub fn forbidden() -> Vec<String> {
    FORBIDDEN_PHRASES.iter().map(|s| s.to_string()).collect()
}

/// Search hits as `Label: text` lines.
pub fn render_hits(hits: &[SearchHit]) -> String {
    hits.iter()
        .map(|h| format!("{}: {}", h.field.label(), h.text))
        .collect::<Vec<_>>()
        .join("\n")
}

/// Drops a leading `Charge:`-style field label.
pub fn strip_field_label(text: &str) -> &str {
    for field in HitField::ALL {
        if let Some(rest) = text
            .strip_prefix(field.label())
            .and_then(|r| r.strip_prefix(':'))
        {
            return rest.trim();
        }
    }
    text.trim()
}

/// "Do you like X?" becomes "<sight> is recommended to people who like X."
pub fn rule_based_point(sight_name: &str, question: &str) -> String {
    let q = strip_list_marker(question)
        .trim_end_matches(['?', '？', ' '])
        .to_string();
    if let Some(x) = q.strip_prefix("Do you like ") {
        return format!("{sight_name} is recommended to people who like {x}.");
    }
    if let Some(x) = q.strip_suffix("が好きですか").or_else(|| q.strip_suffix("は好きですか")) {
        return format!("{x}が好きな方に{sight_name}はおすすめです。");
    }
    format!("{sight_name} is a good match for you.")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::BackendError;

    fn gateway(backend: impl GenBackend + 'static) -> Gateway {
        Gateway::new(Arc::new(TemplatePack::english()), Arc::new(backend))
    }

    #[test]
    fn fallback_after_exactly_max_retries() {
        let gw = gateway(ScriptedBackend::new(["Is it?", "Really?", "never used"]));
        let mut m = GenMetrics::new(0);
        let g = gw.icebreak_comment("q", "a", &mut m).unwrap();
        assert!(g.fell_back);
        assert_eq!(g.attempts, 2);
        assert_eq!(m.backend_calls, 2);
        assert_eq!(m.rejections[&RejectReason::QuestionMark], 2);
        assert_eq!(g.text, gw.pack().template(TemplateName::IcebreakComment).fallback);
    }

    #[test]
    fn backend_error_counts_as_rejection() {
        let gw = gateway(ScriptedBackend::from_script([
            Scripted::Error(BackendError::Transport("down".into())),
            Scripted::Text("Nice to hear.".into()),
        ]));
        let mut m = GenMetrics::new(0);
        let g = gw.icebreak_comment("q", "a", &mut m).unwrap();
        assert_eq!(g.text, "Nice to hear.");
        assert_eq!(g.attempts, 2);
        assert_eq!(m.rejections[&RejectReason::BackendError], 1);
    }

    #[test]
    fn stop_sequences_are_applied() {
        let gw = gateway(ScriptedBackend::new(["What is hard?\nCustomer: made up"]));
        let g = gw
            .icebreak_question("ctx", "What do you do?", "I am a cook.", &mut GenMetrics::new(0))
            .unwrap();
        assert_eq!(g.text, "What is hard?");
    }

    #[test]
    fn comment_requires_echo() {
        let gw = gateway(ScriptedBackend::new(["Okay.", "Five and two, okay."]));
        let mut m = GenMetrics::new(0);
        let g = gw
            .comment("How old?", "five and two years old", "", &mut m)
            .unwrap();
        assert_eq!(g.text, "Five and two, okay.");
        assert_eq!(m.rejections[&RejectReason::MissingEcho], 1);
    }

    #[test]
    fn extract_info_strips_label_and_grounds_digits() {
        let hits = vec![SearchHit {
            sight_id: "x".into(),
            field: HitField::Charge,
            text: "Adult: 1,000yen".into(),
            score: 1.0,
        }];
        let gw = gateway(ScriptedBackend::new(["Charge: Adult: 1,000yen"]));
        let g = gw.extract_info(&hits, "How much?", &mut GenMetrics::new(0)).unwrap();
        assert_eq!(g.text, "Adult: 1,000yen");
        assert_eq!(g.provenance, Provenance::Retrieved);

        let gw = gateway(ScriptedBackend::new(["It is 900 yen.", "It is 800 yen."]));
        let g = gw.extract_info(&hits, "How much?", &mut GenMetrics::new(0)).unwrap();
        assert_eq!(g.text, "Adult: 1,000yen");
        assert!(g.fell_back);
    }

    #[test]
    fn mock_questions_are_filtered_and_deduplicated() {
        let gw = gateway(MockBackend::new(3));
        let lex = AnswerLexicon::english();
        let qs = gw
            .generate_questions(
                "Daiba Park",
                "Remains of an Edo shogunate cannon fort. Visitors can walk along its old stone walls.",
                3,
                &lex,
                &mut GenMetrics::new(0),
            )
            .unwrap();
        assert_eq!(qs[0], "Do you like Edo-era history?");
        assert!(qs.len() <= 3);
        assert!(qs.iter().all(|q| lex.is_loc_question(q)));
    }

    #[test]
    fn kana_readings_per_occurrence() {
        let gw = gateway(MockBackend::new(0));
        let out = gw
            .kana_normalize("行き方はこちらの方が簡単です", &KanaConfig::default(), &mut GenMetrics::new(0))
            .unwrap();
        assert_eq!(out, "行きかたはこちらのほうが簡単です");
    }

    #[test]
    fn kana_rejects_non_reading_output() {
        let gw = gateway(ScriptedBackend::new(["ぽう", "ぱう"]));
        let out = gw
            .kana_normalize("この方", &KanaConfig::default(), &mut GenMetrics::new(0))
            .unwrap();
        assert_eq!(out, "このかた");
    }

    #[test]
    fn summarize_rejects_empty_input() {
        let gw = gateway(MockBackend::new(0));
        assert!(matches!(
            gw.summarize("X", "  ", &mut GenMetrics::new(0)),
            Err(GatewayError::EmptyInput(_))
        ));
    }

    #[test]
    fn rule_point() {
        assert_eq!(
            rule_based_point("Daiba Park", "Do you like Edo-era history?"),
            "Daiba Park is recommended to people who like Edo-era history."
        );
    }
}
