//! Few-shot prompt templates and the fixed utterances that go with them.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::Path;
use std::sync::OnceLock;

use regex::Regex;
use serde::{Deserialize, Serialize};

use crate::error::{DataError, GatewayError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TemplateName {
    IcebreakQuestion,
    IcebreakComment,
    Summarize,
    GenerateQuestions,
    PointTranslation,
    Comment,
    ExtractInfo,
    RecommendAppeal,
    RecommendUtterance,
    CounterUtterance,
    QaAnswer,
    ClosingNarration,
    KanaNormalize,
}

impl TemplateName {
    pub const ALL: [TemplateName; 13] = [
        TemplateName::IcebreakQuestion,
        TemplateName::IcebreakComment,
        TemplateName::Summarize,
        TemplateName::GenerateQuestions,
        TemplateName::PointTranslation,
        TemplateName::Comment,
        TemplateName::ExtractInfo,
        TemplateName::RecommendAppeal,
        TemplateName::RecommendUtterance,
        TemplateName::CounterUtterance,
        TemplateName::QaAnswer,
        TemplateName::ClosingNarration,
        TemplateName::KanaNormalize,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            TemplateName::IcebreakQuestion => "icebreak_question",
            TemplateName::IcebreakComment => "icebreak_comment",
            TemplateName::Summarize => "summarize",
            TemplateName::GenerateQuestions => "generate_questions",
            TemplateName::PointTranslation => "point_translation",
            TemplateName::Comment => "comment",
            TemplateName::ExtractInfo => "extract_info",
            TemplateName::RecommendAppeal => "recommend_appeal",
            TemplateName::RecommendUtterance => "recommend_utterance",
            TemplateName::CounterUtterance => "counter_utterance",
            TemplateName::QaAnswer => "qa_answer",
            TemplateName::ClosingNarration => "closing_narration",
            TemplateName::KanaNormalize => "kana_normalize",
        }
    }

    pub fn parse(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|t| t.as_str() == name)
    }

    /// Slots the engine binds when rendering this template.
    pub fn slots(self) -> &'static [&'static str] {
        match self {
            TemplateName::IcebreakQuestion => &["context", "question", "answer"],
            TemplateName::IcebreakComment => &["question", "answer"],
            TemplateName::Summarize => &["name", "text"],
            TemplateName::GenerateQuestions => &["name", "summary"],
            TemplateName::PointTranslation => &["name", "question"],
            TemplateName::Comment => &["context", "question", "answer"],
            TemplateName::ExtractInfo => &["info", "question"],
            TemplateName::RecommendAppeal => &["name", "summary"],
            TemplateName::RecommendUtterance => &["name", "summary", "search", "points"],
            TemplateName::CounterUtterance => &["other", "other_summary", "weak", "recommended"],
            TemplateName::QaAnswer => &[
                "name1",
                "s1",
                "d1",
                "name2",
                "s2",
                "d2",
                "recommended",
                "question",
            ],
            TemplateName::ClosingNarration => &["name", "reviews"],
            TemplateName::KanaNormalize => &["sentence", "readings"],
        }
    }

    /// Templates whose output must never be a question.
    pub fn is_comment_class(self) -> bool {
        matches!(
            self,
            TemplateName::IcebreakComment | TemplateName::Comment | TemplateName::ClosingNarration
        )
    }
}

impl fmt::Display for TemplateName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Fixed utterances every pack must define.
pub const REQUIRED_LINES: &[&str] = &[
    "greeting",
    "self_intro",
    "speak_loudly",
    "icebreak_opening",
    "brief_intro",
    "brief_ask",
    "brief_yes",
    "brief_no",
    "brief_unknown",
    "sight_intro_first",
    "sight_intro_second",
    "interview_intro",
    "clarification",
    "recommend_frame",
    "appeal_stem",
    "qa_offer",
    "qa_go_ahead",
    "qa_more",
    "qa_no_info",
    "steer_cheaper",
    "steer_general",
    "point_popular",
    "point_free",
    "point_cheap",
    "point_near",
    "point_indoor",
    "weak_unpopular",
    "weak_expensive",
    "weak_far",
    "weak_none",
    "qa_fact",
    "time_notice",
    "farewell",
];

const SEPARATOR: &str = "\n###\n";

fn slot_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"\{\{([a-z0-9_]+)\}\}").expect("slot pattern"))
}

/// Slot names referenced by `{{name}}` markers in `text`.
pub fn slot_markers(text: &str) -> BTreeSet<String> {
    slot_re()
        .captures_iter(text)
        .map(|c| c[1].to_string())
        .collect()
}

/// Replaces every `{{slot}}` in one pass. Values are inserted verbatim and
/// never rescanned.
pub fn fill(
    text: &str,
    bindings: &[(&str, &str)],
    template: &str,
) -> Result<String, GatewayError> {
    let mut out = String::with_capacity(text.len());
    let mut last = 0;
    for caps in slot_re().captures_iter(text) {
        let whole = caps.get(0).expect("match");
        let name = &caps[1];
        let value = bindings
            .iter()
            .find(|(k, _)| *k == name)
            .map(|(_, v)| *v)
            .ok_or_else(|| GatewayError::UnboundSlot {
                template: template.to_string(),
                slot: name.to_string(),
            })?;
        out.push_str(&text[last..whole.start()]);
        out.push_str(value);
        last = whole.end();
    }
    out.push_str(&text[last..]);
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PromptTemplate {
    pub name: TemplateName,
    pub header: String,
    #[serde(default)]
    pub shots: Vec<String>,
    /// The block bound per request; slot markers are `{{name}}`.
    pub query: String,
    #[serde(default)]
    pub stop: Vec<String>,
    /// Output budget in characters.
    pub max_length: usize,
    #[serde(default = "default_temperature")]
    pub temperature: f32,
    /// Utterance used when every attempt is rejected. May contain slots.
    #[serde(default)]
    pub fallback: String,
}

fn default_temperature() -> f32 {
    0.3
}

impl PromptTemplate {
    pub fn slots(&self) -> BTreeSet<String> {
        let mut slots = slot_markers(&self.header);
        slots.extend(slot_markers(&self.query));
        slots
    }

    /// Header, shots and the bound query block, separated by `###` lines.
    pub fn render(&self, bindings: &[(&str, &str)]) -> Result<String, GatewayError> {
        let name = self.name.as_str();
        let mut parts = Vec::with_capacity(self.shots.len() + 2);
        parts.push(fill(self.header.trim_end(), bindings, name)?);
        parts.extend(self.shots.iter().map(|s| s.trim().to_string()));
        parts.push(fill(self.query.trim_start(), bindings, name)?);
        Ok(parts.join(SEPARATOR))
    }
}

/// The final query block of a rendered prompt.
pub fn query_block(prompt: &str) -> &str {
    prompt.rsplit(SEPARATOR).next().unwrap_or(prompt)
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct PackFile {
    language: String,
    lines: BTreeMap<String, String>,
    template: Vec<PromptTemplate>,
}

/// A language's full set of templates and fixed lines.
#[derive(Debug, Clone, PartialEq)]
pub struct TemplatePack {
    language: String,
    lines: BTreeMap<String, String>,
    templates: BTreeMap<TemplateName, PromptTemplate>,
}

const ENGLISH: &str = include_str!("../../data/templates/en.toml");
const JAPANESE: &str = include_str!("../../data/templates/ja.toml");

impl TemplatePack {
    pub fn english() -> Self {
        Self::parse(ENGLISH).expect("bundled English templates")
    }

    pub fn japanese() -> Self {
        Self::parse(JAPANESE).expect("bundled Japanese templates")
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, DataError> {
        Self::parse(&DataError::read(path.as_ref())?)
    }

    pub fn parse(text: &str) -> Result<Self, DataError> {
        let file: PackFile = toml::from_str(text).map_err(|e| DataError::Parse {
            what: "template pack".into(),
            message: e.to_string(),
        })?;
        let invalid = |m: String| DataError::invalid("template pack", m);
        let mut templates = BTreeMap::new();
        for template in file.template {
            let name = template.name;
            let known: BTreeSet<&str> = name.slots().iter().copied().collect();
            if let Some(slot) = template.slots().iter().find(|s| !known.contains(s.as_str())) {
                return Err(invalid(format!("{name} uses unknown slot {slot:?}")));
            }
            if template.shots.is_empty() {
                return Err(invalid(format!("{name} has no shots")));
            }
            if template.max_length == 0 {
                return Err(invalid(format!("{name} has a zero max_length")));
            }
            if templates.insert(name, template).is_some() {
                return Err(invalid(format!("{name} defined twice")));
            }
        }
        if let Some(missing) = TemplateName::ALL.iter().find(|n| !templates.contains_key(n)) {
            return Err(invalid(format!("missing template {missing}")));
        }
        if let Some(missing) = REQUIRED_LINES.iter().find(|k| !file.lines.contains_key(**k)) {
            return Err(invalid(format!("missing line {missing:?}")));
        }
        Ok(Self {
            language: file.language,
            lines: file.lines,
            templates,
        })
    }

    pub fn language(&self) -> &str {
        &self.language
    }

    pub fn template(&self, name: TemplateName) -> &PromptTemplate {
        &self.templates[&name]
    }

    pub fn templates(&self) -> impl Iterator<Item = &PromptTemplate> {
        self.templates.values()
    }

    /// A fixed line with its `{{slot}}` markers filled.
    pub fn line(&self, key: &str, bindings: &[(&str, &str)]) -> String {
        let raw = self.lines.get(key).map(String::as_str).unwrap_or(key);
        fill(raw, bindings, key).unwrap_or_else(|_| raw.to_string())
    }

    pub fn render(
        &self,
        name: TemplateName,
        bindings: &[(&str, &str)],
    ) -> Result<String, GatewayError> {
        self.template(name).render(bindings)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fill_is_single_pass() {
        let out = fill("A {{x}} B {{y}}", &[("x", "{{y}}"), ("y", "2")], "t").unwrap();
        assert_eq!(out, "A {{y}} B 2");
    }

    #[test]
    fn unbound_slot_is_named() {
        let err = fill("{{answer}}", &[], "icebreak_question").unwrap_err();
        assert!(err.to_string().contains("\"answer\""), "{err}");
    }

    #[test]
    fn packs_load_and_declare_known_slots() {
        for pack in [TemplatePack::english(), TemplatePack::japanese()] {
            for t in pack.templates() {
                let declared: BTreeSet<String> =
                    t.name.slots().iter().map(|s| s.to_string()).collect();
                assert!(t.slots().is_subset(&declared), "{}", t.name);
                assert!(!t.shots.is_empty());
            }
        }
    }

    #[test]
    fn icebreak_prompt_places_answer_after_customer_tag() {
        let pack = TemplatePack::english();
        let prompt = pack
            .render(
                TemplateName::IcebreakQuestion,
                &[
                    ("context", "A client is visiting the counter."),
                    ("question", "What do you do for a living?"),
                    ("answer", "I am a designer at a toy maker."),
                ],
            )
            .unwrap();
        let block = query_block(&prompt);
        assert!(block.contains("Customer: I am a designer at a toy maker.\n"));
        assert!(prompt.starts_with(&pack.template(TemplateName::IcebreakQuestion).header));
        assert!(slot_markers(&prompt).is_empty());
    }

    #[test]
    fn missing_template_rejected() {
        let text = ENGLISH.replace("name = \"kana_normalize\"", "name = \"summarize\"");
        assert!(TemplatePack::parse(&text).is_err());
    }

    #[test]
    fn line_fills_slots() {
        let pack = TemplatePack::english();
        let frame = pack.line("recommend_frame", &[("name", "Daiba Park")]);
        assert!(frame.contains("Daiba Park"));
        assert!(!frame.contains("{{"));
    }
}
