//! Question answering about the two candidate sights, grounded in search
//! results.

use crate::error::GatewayError;
use crate::gateway::{
    forbidden, GenMetrics, Gateway, Generation, Provenance, Reject, TemplateName,
};
use crate::interview::{AnswerLexicon, YesNo};
use crate::recommendation::join_sentences;
use crate::sightdb::{parse_first_price, HitField, SearchHit, SightCatalog, SightRecord};
use crate::text::content_tokens;

/// Hits retrieved per sight for one question.
pub const HITS_PER_SIGHT: usize = 5;

/// Words that only signal agreement and carry no question content.
const AGREEMENT_WORDS: &[&str] = &[
    "yeah", "yep", "sure", "ok", "okay", "please", "well", "one", "have", "got", "actually",
    "はい", "ええ", "あります",
];

/// What the customer wants after being offered questions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum QaIntent {
    /// A question to answer right away.
    Question(String),
    /// The customer has a question but has not said it yet.
    WantsToAsk,
    Decline,
}

/// Interprets the reply to "do you have any questions". A recognizable
/// question wins over a yes/no cue; an unclassifiable reply is treated as
/// the question itself.
pub fn wants_question(utterance: &str, lexicon: &AnswerLexicon) -> QaIntent {
    let text = utterance.trim();
    if lexicon.is_question(text) {
        return QaIntent::Question(text.to_string());
    }
    match lexicon.classify_yes_no(text) {
        YesNo::No => QaIntent::Decline,
        YesNo::Yes => {
            let has_content = content_tokens(text)
                .iter()
                .any(|t| !AGREEMENT_WORDS.contains(&t.as_str()) && !is_yes_word(t, lexicon));
            if has_content {
                QaIntent::Question(text.to_string())
            } else {
                QaIntent::WantsToAsk
            }
        }
        YesNo::Unknown if text.is_empty() => QaIntent::WantsToAsk,
        YesNo::Unknown => QaIntent::Question(text.to_string()),
    }
}

fn is_yes_word(token: &str, lexicon: &AnswerLexicon) -> bool {
    lexicon.classify_yes_no(token) == YesNo::Yes
}

/// Everything the answerer needs about the two candidates.
#[derive(Debug, Clone, Copy)]
pub struct QaContext<'a> {
    pub gateway: &'a Gateway,
    pub catalog: &'a SightCatalog,
    pub first: &'a SightRecord,
    pub first_summary: &'a str,
    pub second: &'a SightRecord,
    pub second_summary: &'a str,
    pub recommended_id: &'a str,
}

impl<'a> QaContext<'a> {
    fn recommended(&self) -> &'a SightRecord {
        if self.first.sight_id == self.recommended_id {
            self.first
        } else {
            self.second
        }
    }

    fn other(&self) -> &'a SightRecord {
        if self.first.sight_id == self.recommended_id {
            self.second
        } else {
            self.first
        }
    }
}

/// The answer plus what it was built from.
#[derive(Debug, Clone, PartialEq)]
pub struct QaAnswer {
    pub generation: Generation,
    pub first_hits: Vec<SearchHit>,
    pub second_hits: Vec<SearchHit>,
    pub steered: bool,
}

/// Label of the hit an extraction came from, or of the top hit.
fn label_for(hits: &[SearchHit], text: &str) -> &'static str {
    hits.iter()
        .find(|h| h.text == text)
        .or_else(|| hits.first())
        .map(|h| h.field.label())
        .unwrap_or("")
}

fn bound_info(hits: &[SearchHit], extracted: &str) -> String {
    if extracted.is_empty() {
        "(no information)".to_string()
    } else {
        format!("{}: {extracted}", label_for(hits, extracted))
    }
}

/// Answers `question` from the top hits of each sight. Every number in the
/// answer occurs in the retrieved hits. When both sights return nothing the
/// fixed no-information line is used.
pub fn answer(ctx: QaContext<'_>, question: &str, metrics: &mut GenMetrics) -> Result<QaAnswer, GatewayError> {
    let gateway = ctx.gateway;
    let first_hits = ctx.catalog.search(question, Some(&ctx.first.sight_id), HITS_PER_SIGHT);
    let second_hits = ctx.catalog.search(question, Some(&ctx.second.sight_id), HITS_PER_SIGHT);
    if first_hits.is_empty() && second_hits.is_empty() {
        return Ok(QaAnswer {
            generation: Generation::fixed(gateway.line("qa_no_info", &[])),
            first_hits,
            second_hits,
            steered: false,
        });
    }
    let d1 = gateway.extract_info(&first_hits, question, metrics)?.text;
    let d2 = gateway.extract_info(&second_hits, question, metrics)?.text;
    let info1 = bound_info(&first_hits, &d1);
    let info2 = bound_info(&second_hits, &d2);
    let recommended = ctx.recommended();
    let name = TemplateName::QaAnswer;
    let bindings = [
        ("name1", ctx.first.name.as_str()),
        ("s1", ctx.first_summary),
        ("d1", info1.as_str()),
        ("name2", ctx.second.name.as_str()),
        ("s2", ctx.second_summary),
        ("d2", info2.as_str()),
        ("recommended", recommended.name.as_str()),
        ("question", question),
    ];
    let grounding: Vec<String> = first_hits
        .iter()
        .chain(&second_hits)
        .map(|h| h.text.clone())
        .collect();
    let facts: Vec<String> = [(ctx.first, &d1), (ctx.second, &d2)]
        .into_iter()
        .filter(|(_, d)| !d.is_empty())
        .map(|(r, d)| {
            let fact = d.trim_end_matches(['.', '。']);
            gateway.line("qa_fact", &[("name", &r.name), ("fact", fact)])
        })
        .collect();
    let mut policy = gateway
        .policy(name, &bindings)
        .reject(Reject::MultiLine)
        .reject(Reject::Forbidden(forbidden()))
        .reject(Reject::UngroundedDigits(grounding));
    policy.fallback = join_sentences(&facts);
    let mut generation = gateway.complete_with_policy(name, &bindings, &policy, metrics)?;
    if generation.fell_back {
        generation.provenance = Provenance::Retrieved;
    }
    let steer = steering_line(ctx, &first_hits, &second_hits);
    let steered = steer.is_some();
    if let Some(line) = steer {
        generation.text = join_sentences(&[generation.text, line]);
    }
    Ok(QaAnswer {
        generation,
        first_hits,
        second_hits,
        steered,
    })
}

/// When the question is about the same kind of information for both
/// sights, a line nudging the customer toward the recommended one.
pub fn steering_line(ctx: QaContext<'_>, first: &[SearchHit], second: &[SearchHit]) -> Option<String> {
    let (a, b) = (first.first()?, second.first()?);
    if a.field != b.field {
        return None;
    }
    let recommended = ctx.recommended();
    let other = ctx.other();
    if a.field == HitField::Charge {
        if let (Some(r), Some(o)) = (
            parse_first_price(&recommended.charge),
            parse_first_price(&other.charge),
        ) {
            if r < o {
                return Some(ctx.gateway.line("steer_cheaper", &[("other", &other.name)]));
            }
        }
    }
    Some(
        ctx.gateway
            .line("steer_general", &[("recommended", &recommended.name)]),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn intents() {
        let lex = AnswerLexicon::english();
        assert_eq!(wants_question("No, thank you.", &lex), QaIntent::Decline);
        assert_eq!(wants_question("Yes.", &lex), QaIntent::WantsToAsk);
        assert_eq!(
            wants_question("How much is it?", &lex),
            QaIntent::Question("How much is it?".into())
        );
        assert_eq!(
            wants_question("Yes, the opening hours of the park", &lex),
            QaIntent::Question("Yes, the opening hours of the park".into())
        );
        assert_eq!(
            wants_question("the parking situation", &lex),
            QaIntent::Question("the parking situation".into())
        );
    }
}
