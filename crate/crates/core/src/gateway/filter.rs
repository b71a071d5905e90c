//! Output filters applied to every generated utterance.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::text::{content_tokens, has_question_mark, ungrounded_digits};

/// Phrases a generated answer must never contain.
pub const FORBIDDEN_PHRASES: &[&str] = &[
    "please search by yourself",
    "search by yourself",
    "i'm not sure",
    "i am not sure",
    "ご自身で検索",
];

/// One rejection rule.
#[derive(Clone)]
pub enum Reject {
    Empty,
    QuestionMark,
    /// The output must be a question.
    NotQuestion,
    OverLength(usize),
    MultiLine,
    /// Case-insensitive substrings.
    Forbidden(Vec<String>),
    /// Every digit run must occur in one of these texts.
    UngroundedDigits(Vec<String>),
    /// At least one content token of this text must be echoed.
    MissingEcho(String),
    /// Every one of these strings must appear.
    MustContain(Vec<String>),
    /// The output must equal one of these strings.
    NotOneOf(Vec<String>),
    /// Named custom rule; the closure returns true to reject.
    Custom(&'static str, Arc<dyn Fn(&str) -> bool + Send + Sync>),
}

impl fmt::Debug for Reject {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Reject::Custom(name, _) => write!(f, "Custom({name})"),
            other => f.write_str(other.label()),
        }
    }
}

/// Why an output was rejected.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RejectReason {
    Empty,
    QuestionMark,
    NotQuestion,
    OverLength,
    MultiLine,
    Forbidden,
    UngroundedDigits,
    MissingEcho,
    MustContain,
    NotOneOf,
    Custom,
    BackendError,
}

impl Reject {
    fn label(&self) -> &'static str {
        match self {
            Reject::Empty => "Empty",
            Reject::QuestionMark => "QuestionMark",
            Reject::NotQuestion => "NotQuestion",
            Reject::OverLength(_) => "OverLength",
            Reject::MultiLine => "MultiLine",
            Reject::Forbidden(_) => "Forbidden",
            Reject::UngroundedDigits(_) => "UngroundedDigits",
            Reject::MissingEcho(_) => "MissingEcho",
            Reject::MustContain(_) => "MustContain",
            Reject::NotOneOf(_) => "NotOneOf",
            Reject::Custom(..) => "Custom",
        }
    }

    pub fn reason(&self) -> RejectReason {
        match self {
            Reject::Empty => RejectReason::Empty,
            Reject::QuestionMark => RejectReason::QuestionMark,
            Reject::NotQuestion => RejectReason::NotQuestion,
            Reject::OverLength(_) => RejectReason::OverLength,
            Reject::MultiLine => RejectReason::MultiLine,
            Reject::Forbidden(_) => RejectReason::Forbidden,
            Reject::UngroundedDigits(_) => RejectReason::UngroundedDigits,
            Reject::MissingEcho(_) => RejectReason::MissingEcho,
            Reject::MustContain(_) => RejectReason::MustContain,
            Reject::NotOneOf(_) => RejectReason::NotOneOf,
            Reject::Custom(..) => RejectReason::Custom,
        }
    }

    /// True when `text` violates this rule.
    pub fn rejects(&self, text: &str) -> bool {
        match self {
            Reject::Empty => text.trim().is_empty(),
            Reject::QuestionMark => has_question_mark(text),
            Reject::NotQuestion => !text.trim_end().ends_with(['?', '？']),
            Reject::OverLength(max) => text.chars().count() > *max,
            Reject::MultiLine => text.trim().contains('\n'),
            Reject::Forbidden(phrases) => {
                let lower = text.to_lowercase();
                phrases.iter().any(|p| lower.contains(&p.to_lowercase()))
            }
            Reject::UngroundedDigits(context) => {
                !ungrounded_digits(text, context.iter().map(String::as_str)).is_empty()
            }
            Reject::MissingEcho(source) => {
                let wanted = content_tokens(source);
                !wanted.is_empty() && content_tokens(text).is_disjoint(&wanted)
            }
            Reject::MustContain(items) => items.iter().any(|i| !text.contains(i.as_str())),
            Reject::NotOneOf(options) => !options.iter().any(|o| o == text.trim()),
            Reject::Custom(_, f) => f(text),
        }
    }
}

/// The rejection rules and retry budget for one generation call.
#[derive(Debug, Clone)]
pub struct FilterPolicy {
    pub reject_if: Vec<Reject>,
    /// Maximum number of backend calls before the fallback is used.
    pub max_retries: u32,
    pub fallback: String,
}

pub const DEFAULT_MAX_RETRIES: u32 = 2;

impl FilterPolicy {
    pub fn new(fallback: impl Into<String>) -> Self {
        Self {
            reject_if: vec![Reject::Empty],
            max_retries: DEFAULT_MAX_RETRIES,
            fallback: fallback.into(),
        }
    }

    pub fn reject(mut self, rule: Reject) -> Self {
        self.reject_if.push(rule);
        self
    }

    pub fn retries(mut self, max_retries: u32) -> Self {
        self.max_retries = max_retries;
        self
    }

    /// The first violated rule, if any.
    pub fn check(&self, text: &str) -> Option<RejectReason> {
        self.reject_if
            .iter()
            .find(|r| r.rejects(text))
            .map(Reject::reason)
    }
}

/// Cuts `text` at the earliest stop sequence.
pub fn apply_stop(text: &str, stop: &[String]) -> String {
    let cut = stop
        .iter()
        .filter(|s| !s.is_empty())
        .filter_map(|s| text.find(s.as_str()))
        .min()
        .unwrap_or(text.len());
    text[..cut].to_string()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rules() {
        assert!(Reject::QuestionMark.rejects("Really？"));
        assert!(Reject::NotQuestion.rejects("Nice."));
        assert!(!Reject::NotQuestion.rejects("Nice? "));
        assert!(Reject::OverLength(3).rejects("abcd"));
        assert!(Reject::Forbidden(vec!["search by yourself".into()])
            .rejects("Please Search by yourself."));
        let grounded = Reject::UngroundedDigits(vec!["Adult 1,200 yen".into()]);
        assert!(!grounded.rejects("It is 1200 yen."));
        assert!(grounded.rejects("It is 120 yen."));
        assert!(Reject::MissingEcho("my kids are 5".into()).rejects("Okay."));
        assert!(!Reject::MissingEcho("my kids are 5".into()).rejects("Kids, okay."));
        assert!(Reject::NotOneOf(vec!["かた".into()]).rejects("ほう"));
    }

    #[test]
    fn stop_cuts_at_earliest() {
        let stop = vec!["\n".to_string(), "Customer:".to_string()];
        assert_eq!(apply_stop("Hi there\nCustomer: x", &stop), "Hi there");
        assert_eq!(apply_stop("no stop", &stop), "no stop");
    }
}
