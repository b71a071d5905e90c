//! Interview phase: question graph, answer classification and slot filling.

mod graph;
mod lexicon;
mod profile;

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::error::GatewayError;
use crate::text::{fold, has_question_mark};
use crate::TriState;

pub use graph::{
    AnswerClass, AnswerSchema, Item, NodeId, NodeKind, QuestionGraph, QuestionNode, Target,
};
pub use lexicon::{AnswerLexicon, Companion, YesNo};
pub use profile::{CustomerProfile, Participants};

/// Maximum number of location-wise questions kept per sight.
pub const LOC_QUESTIONS_PER_SIGHT: usize = 3;

/// Questions asked for one sight during the interview, each paired with the
/// recommendation point used when the customer answers yes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LocWiseQuestionSet {
    pub sight_id: String,
    pub questions: Vec<String>,
    pub source_points: Vec<String>,
}

impl LocWiseQuestionSet {
    pub fn new(
        sight_id: impl Into<String>,
        questions: Vec<String>,
        source_points: Vec<String>,
    ) -> Result<Self, String> {
        let set = Self {
            sight_id: sight_id.into(),
            questions,
            source_points,
        };
        set.validate()?;
        Ok(set)
    }

    pub fn validate(&self) -> Result<(), String> {
        let n = self.questions.len();
        if !(1..=LOC_QUESTIONS_PER_SIGHT).contains(&n) {
            return Err(format!("{}: {n} questions, expected 1 to 3", self.sight_id));
        }
        if self.source_points.len() != n {
            return Err(format!(
                "{}: {} points for {n} questions",
                self.sight_id,
                self.source_points.len()
            ));
        }
        let distinct: HashSet<String> = self.questions.iter().map(|q| fold(q)).collect();
        if distinct.len() != n {
            return Err(format!("{}: duplicate questions", self.sight_id));
        }
        if let Some(p) = self
            .source_points
            .iter()
            .find(|p| p.trim().is_empty() || has_question_mark(p))
        {
            return Err(format!("{}: point {p:?} is not a declarative sentence", self.sight_id));
        }
        Ok(())
    }
}

/// Strips list markers such as "- ", "* ", "3. " from a generated line.
pub fn strip_list_marker(line: &str) -> &str {
    let line = line.trim();
    let line = line
        .strip_prefix("- ")
        .or_else(|| line.strip_prefix("* "))
        .or_else(|| line.strip_prefix("・"))
        .or_else(|| line.strip_prefix("• "))
        .unwrap_or(line);
    let digits = line.chars().take_while(char::is_ascii_digit).count();
    if digits > 0 {
        if let Some(rest) = line[digits..]
            .strip_prefix(". ")
            .or_else(|| line[digits..].strip_prefix(") "))
        {
            return rest.trim();
        }
    }
    line.trim()
}

/// Keeps well-formed questions, drops repeats (case, spacing and
/// punctuation folded) and returns at most `k` in generation order.
pub fn select_loc_questions(
    candidates: &[String],
    k: usize,
    lexicon: &AnswerLexicon,
) -> Result<Vec<String>, GatewayError> {
    let mut seen = HashSet::new();
    let selected: Vec<String> = candidates
        .iter()
        .map(|c| strip_list_marker(c))
        .filter(|c| lexicon.is_loc_question(c))
        .filter(|c| seen.insert(fold(c)))
        .take(k)
        .map(str::to_string)
        .collect();
    if selected.is_empty() {
        return Err(GatewayError::NoQuestions("the candidate list".into()));
    }
    Ok(selected)
}

/// A classified customer answer.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Classified {
    pub class: AnswerClass,
    pub ages: Vec<u32>,
}

pub fn classify(schema: AnswerSchema, utterance: &str, lexicon: &AnswerLexicon) -> Classified {
    let mut ages = Vec::new();
    let class = match schema {
        AnswerSchema::YesNo => match lexicon.classify_yes_no(utterance) {
            YesNo::Yes => AnswerClass::Yes,
            YesNo::No => AnswerClass::No,
            YesNo::Unknown => AnswerClass::Unknown,
        },
        AnswerSchema::Companion => match lexicon.classify_companion(utterance) {
            Companion::Alone => AnswerClass::Alone,
            Companion::Friend => AnswerClass::Friend,
            Companion::Family => AnswerClass::Family,
            Companion::Unknown => AnswerClass::Unknown,
        },
        AnswerSchema::Ages => {
            ages = lexicon.extract_ages(utterance);
            if ages.is_empty() {
                AnswerClass::Unknown
            } else {
                AnswerClass::Ages
            }
        }
        AnswerSchema::Open => {
            if utterance.trim().is_empty() {
                AnswerClass::Unknown
            } else {
                AnswerClass::Any
            }
        }
    };
    Classified { class, ages }
}

/// Writes a classified answer into the profile slot of `node`.
pub fn fill_slot(
    profile: &mut CustomerProfile,
    node: &QuestionNode,
    answer: &Classified,
    utterance: &str,
    sight_id: &str,
) {
    let tri = match answer.class {
        AnswerClass::Yes => TriState::Yes,
        AnswerClass::No => TriState::No,
        _ => TriState::Unknown,
    };
    match node.item {
        Item::Participants => {
            let p = match answer.class {
                AnswerClass::Alone => Participants::Alone,
                AnswerClass::Friend => Participants::Friend,
                AnswerClass::Family => Participants::Family,
                _ => Participants::Unknown,
            };
            profile.set_participants(p);
        }
        Item::Children => {
            profile.set_brings_children(tri);
        }
        Item::ChildrenAges => {
            profile.set_children_ages(&answer.ages);
        }
        Item::Transportation => {
            profile.set_uses_car(tri);
        }
        Item::PointsOfInterest => {
            profile.set_points_of_interest(utterance);
        }
        Item::LocPoint => {
            if let Some(index) = node.loc_index {
                profile.set_loc_answer(sight_id, index, tri);
            }
        }
    }
}

/// Where the interview stands inside a session.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct InterviewState {
    /// Node whose answer is awaited.
    pub current: Option<NodeId>,
    /// The current node was already asked again after an unclear answer.
    pub reasked: bool,
    /// Nodes asked so far, in order.
    pub asked: Vec<NodeId>,
}

/// Result of feeding one answer to the interview.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Step {
    /// The answer was unclear; ask the same node again.
    Reask(NodeId),
    /// The answer was taken (or defaulted); move to `next`.
    Answered {
        node: NodeId,
        class: AnswerClass,
        next: Target,
    },
}

/// Question text for `node`, taking location-wise text from `loc_questions`.
pub fn question_text<'a>(node: &'a QuestionNode, loc_questions: &'a [String]) -> &'a str {
    match node.loc_index {
        Some(i) => loc_questions.get(i).map_or(node.text.as_str(), String::as_str),
        None => node.text.as_str(),
    }
}

impl InterviewState {
    /// Enters the graph; returns the first node to ask.
    pub fn begin(&mut self, graph: &QuestionGraph, loc_questions: usize) -> Target {
        let target = graph.resolve(Target::Node(graph.start()), loc_questions);
        self.enter(target);
        target
    }

    fn enter(&mut self, target: Target) {
        self.reasked = false;
        match target {
            Target::Node(id) => {
                self.current = Some(id);
                self.asked.push(id);
            }
            Target::Exit => self.current = None,
        }
    }

    /// Classifies `utterance` against the current node, fills the profile
    /// and advances. An unclear answer is re-asked once; a second unclear
    /// answer follows the node's default edge and leaves the slot unknown.
    pub fn answer(
        &mut self,
        graph: &QuestionGraph,
        lexicon: &AnswerLexicon,
        profile: &mut CustomerProfile,
        utterance: &str,
        sight_id: &str,
        loc_questions: usize,
    ) -> Option<Step> {
        let node = graph.node(self.current?)?;
        let classified = classify(node.answer_schema, utterance, lexicon);
        if classified.class == AnswerClass::Unknown && !self.reasked {
            self.reasked = true;
            return Some(Step::Reask(node.id));
        }
        fill_slot(profile, node, &classified, utterance, sight_id);
        let next = graph.resolve(node.next(classified.class), loc_questions);
        let id = node.id;
        self.enter(next);
        Some(Step::Answered {
            node: id,
            class: classified.class,
            next,
        })
    }
}
