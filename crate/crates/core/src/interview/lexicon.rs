//! Answer lexicon: ordered regular-expression lists per answer class.

use std::collections::BTreeMap;
use std::path::Path;

use regex::{Regex, RegexBuilder};
use serde::Deserialize;

use crate::error::DataError;
use crate::text::has_question_mark;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum YesNo {
    Yes,
    No,
    Unknown,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Companion {
    Alone,
    Friend,
    Family,
    Unknown,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ClassPatternsFile {
    class: String,
    patterns: Vec<String>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct AgesFile {
    #[serde(default)]
    words: BTreeMap<String, u32>,
    #[serde(default)]
    count_nouns: Vec<String>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct LexiconFile {
    language: String,
    yes_no: Vec<ClassPatternsFile>,
    companion: Vec<ClassPatternsFile>,
    ages: AgesFile,
    interrogative: Vec<String>,
    loc_question: String,
}

#[derive(Debug, Clone)]
struct ClassPatterns<C> {
    class: C,
    patterns: Vec<Regex>,
}

/// Compiled lexicon. Classes are tried in file order and the first class
/// with a matching pattern wins, so negative cues listed before positive
/// ones take precedence ("not really" is a no). A class may be `unknown`
/// to pin hedges such as "no idea" before the negative patterns see them.
#[derive(Debug, Clone)]
pub struct AnswerLexicon {
    language: String,
    yes_no: Vec<ClassPatterns<YesNo>>,
    companion: Vec<ClassPatterns<Companion>>,
    number: Regex,
    number_words: BTreeMap<String, u32>,
    count_nouns: Vec<String>,
    interrogative: Vec<Regex>,
    loc_question: Regex,
}

const ENGLISH: &str = include_str!("../../data/lexicon/en.toml");
const JAPANESE: &str = include_str!("../../data/lexicon/ja.toml");

fn compile(pattern: &str, what: &str) -> Result<Regex, DataError> {
    RegexBuilder::new(pattern)
        .case_insensitive(true)
        .build()
        .map_err(|e| DataError::invalid(what, format!("pattern {pattern:?}: {e}")))
}

fn compile_classes<C: Copy>(
    entries: Vec<ClassPatternsFile>,
    what: &str,
    parse: impl Fn(&str) -> Option<C>,
) -> Result<Vec<ClassPatterns<C>>, DataError> {
    entries
        .into_iter()
        .map(|entry| {
            let class = parse(&entry.class).ok_or_else(|| {
                DataError::invalid(what, format!("unknown answer class {:?}", entry.class))
            })?;
            let patterns = entry
                .patterns
                .iter()
                .map(|p| compile(p, what))
                .collect::<Result<_, _>>()?;
            Ok(ClassPatterns { class, patterns })
        })
        .collect()
}

impl AnswerLexicon {
    pub fn english() -> Self {
        Self::parse(ENGLISH).expect("bundled English lexicon")
    }

    pub fn japanese() -> Self {
        Self::parse(JAPANESE).expect("bundled Japanese lexicon")
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, DataError> {
        Self::parse(&DataError::read(path.as_ref())?)
    }

    pub fn parse(text: &str) -> Result<Self, DataError> {
        let file: LexiconFile = toml::from_str(text).map_err(|e| DataError::Parse {
            what: "lexicon".into(),
            message: e.to_string(),
        })?;
        let yes_no = compile_classes(file.yes_no, "lexicon yes_no", |c| match c {
            "yes" => Some(YesNo::Yes),
            "no" => Some(YesNo::No),
            "unknown" => Some(YesNo::Unknown),
            _ => None,
        })?;
        let companion = compile_classes(file.companion, "lexicon companion", |c| match c {
            "alone" => Some(Companion::Alone),
            "friend" => Some(Companion::Friend),
            "family" => Some(Companion::Family),
            "unknown" => Some(Companion::Unknown),
            _ => None,
        })?;
        let mut alternatives = vec![r"\d+".to_string()];
        // Longest words first so "seventeen" is not read as "seven".
        let mut words: Vec<&String> = file.ages.words.keys().collect();
        words.sort_by_key(|w| std::cmp::Reverse(w.chars().count()));
        for word in words {
            let escaped = regex::escape(word);
            if word.chars().all(|c| c.is_ascii_alphanumeric()) {
                alternatives.push(format!(r"\b{escaped}\b"));
            } else {
                alternatives.push(escaped);
            }
        }
        let number = compile(&alternatives.join("|"), "lexicon ages")?;
        let interrogative = file
            .interrogative
            .iter()
            .map(|p| compile(p, "lexicon interrogative"))
            .collect::<Result<_, _>>()?;
        let loc_question = Regex::new(&file.loc_question)
            .map_err(|e| DataError::invalid("lexicon loc_question", e.to_string()))?;
        Ok(Self {
            language: file.language,
            yes_no,
            companion,
            number,
            number_words: file
                .ages
                .words
                .into_iter()
                .map(|(k, v)| (k.to_lowercase(), v))
                .collect(),
            count_nouns: file.ages.count_nouns.iter().map(|n| n.to_lowercase()).collect(),
            interrogative,
            loc_question,
        })
    }

    pub fn language(&self) -> &str {
        &self.language
    }

    pub fn classify_yes_no(&self, utterance: &str) -> YesNo {
        first_match(&self.yes_no, utterance).unwrap_or(YesNo::Unknown)
    }

    pub fn classify_companion(&self, utterance: &str) -> Companion {
        first_match(&self.companion, utterance).unwrap_or(Companion::Unknown)
    }

    /// Every age-like number in order of mention. Numbers that count
    /// something ("two kids") and values above 120 are skipped.
    pub fn extract_ages(&self, utterance: &str) -> Vec<u32> {
        let lower = utterance.to_lowercase();
        let mut ages = Vec::new();
        for m in self.number.find_iter(&lower) {
            let value = match m.as_str().parse::<u32>() {
                Ok(v) => Some(v),
                Err(_) => self.number_words.get(m.as_str()).copied(),
            };
            let Some(value) = value else { continue };
            let rest = lower[m.end()..].trim_start();
            if self.count_nouns.iter().any(|n| rest.starts_with(n.as_str())) {
                continue;
            }
            if value <= 120 {
                ages.push(value);
            }
        }
        ages
    }

    /// Question mark or a leading interrogative word.
    pub fn is_question(&self, utterance: &str) -> bool {
        has_question_mark(utterance)
            || self
                .interrogative
                .iter()
                .any(|p| p.is_match(utterance.trim()))
    }

    /// Whether a generated line has the location-wise question shape.
    pub fn is_loc_question(&self, line: &str) -> bool {
        self.loc_question.is_match(line.trim())
    }
}

fn first_match<C: Copy>(classes: &[ClassPatterns<C>], utterance: &str) -> Option<C> {
    classes
        .iter()
        .find(|c| c.patterns.iter().any(|p| p.is_match(utterance)))
        .map(|c| c.class)
}
