//! Fielded lexical index over the basic-information fields and reviews.
//!
//! A hit's score is the share of (non-stopword) query tokens found in the
//! field, where each field also "contains" a small vocabulary of words that
//! describe it (a charge line matches "price" even if the word never occurs
//! in it). Charge and business-hours fields get a boost when the query uses
//! their vocabulary.

use std::cmp::Ordering;
use std::collections::{BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use super::record::SightRecord;
use crate::text::{is_stopword, tokenize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HitField {
    BusinessHours,
    Location,
    Access,
    Charge,
    Review,
}

impl HitField {
    pub const ALL: [HitField; 5] = [
        HitField::BusinessHours,
        HitField::Location,
        HitField::Access,
        HitField::Charge,
        HitField::Review,
    ];

    pub fn label(self) -> &'static str {
        match self {
            HitField::BusinessHours => "Business hours",
            HitField::Location => "Location",
            HitField::Access => "Access",
            HitField::Charge => "Charge",
            HitField::Review => "Review",
        }
    }

    /// Words that refer to this kind of field.
    pub fn vocabulary(self) -> &'static [&'static str] {
        match self {
            HitField::BusinessHours => &[
                "business", "close", "closed", "closing", "hour", "hours", "late", "open",
                "opening", "opens", "time", "times", "when", "営業", "時間", "開館", "閉館", "何時",
            ],
            HitField::Location => &[
                "address", "located", "location", "place", "where", "場所", "住所", "どこ",
            ],
            HitField::Access => &[
                "access", "bus", "car", "drive", "get", "line", "parking", "reach", "station",
                "train", "walk", "アク", "クセ", "徒歩", "電車", "駐車",
            ],
            HitField::Charge => &[
                "admission", "charge", "cheap", "cost", "costs", "expensive", "fee", "fees",
                "much", "price", "prices", "ticket", "tickets", "yen", "料金", "値段", "入場",
                "チケ",
            ],
            HitField::Review => &[
                "fun", "good", "popular", "rating", "recommend", "review", "reviews",
                "visitors", "評判", "口コ", "コミ", "人気",
            ],
        }
    }

    fn boosted(self) -> bool {
        matches!(self, HitField::Charge | HitField::BusinessHours)
    }
}

pub const VOCABULARY_BOOST: f64 = 1.5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchHit {
    pub sight_id: String,
    pub field: HitField,
    pub text: String,
    pub score: f64,
}

/// Query tokens that take part in scoring.
pub fn query_tokens(query: &str, bigrams: bool) -> BTreeSet<String> {
    tokenize(query, bigrams)
        .into_iter()
        .filter(|t| !is_stopword(t))
        .collect()
}

pub fn field_tokens(field: HitField, text: &str, bigrams: bool) -> BTreeSet<String> {
    tokenize(text, bigrams)
        .into_iter()
        .chain(field.vocabulary().iter().map(|s| s.to_string()))
        .collect()
}

/// Score of one field against a prepared query token set.
pub fn score(query: &BTreeSet<String>, field: HitField, tokens: &BTreeSet<String>) -> f64 {
    if query.is_empty() {
        return 0.0;
    }
    let matched = query.iter().filter(|t| tokens.contains(*t)).count();
    if matched == 0 {
        return 0.0;
    }
    let boost = if field.boosted()
        && query
            .iter()
            .any(|t| field.vocabulary().contains(&t.as_str()))
    {
        VOCABULARY_BOOST
    } else {
        1.0
    };
    matched as f64 / query.len() as f64 * boost
}

/// Descending score, then field order, then text, then sight id.
pub fn hit_order(a: &SearchHit, b: &SearchHit) -> Ordering {
    b.score
        .partial_cmp(&a.score)
        .unwrap_or(Ordering::Equal)
        .then_with(|| a.field.cmp(&b.field))
        .then_with(|| a.text.cmp(&b.text))
        .then_with(|| a.sight_id.cmp(&b.sight_id))
}

/// Every searchable (field, text) pair of a record, in field order.
pub fn record_fields(record: &SightRecord) -> Vec<(HitField, &str)> {
    let mut out = vec![
        (HitField::BusinessHours, record.business_hours.as_str()),
        (HitField::Location, record.location.as_str()),
        (HitField::Access, record.access.as_str()),
        (HitField::Charge, record.charge.as_str()),
    ];
    out.extend(record.reviews.iter().map(|r| (HitField::Review, r.text.as_str())));
    out.retain(|(_, text)| !text.trim().is_empty());
    out
}

#[derive(Debug, Clone)]
struct Entry {
    sight: usize,
    field: HitField,
    text: String,
    tokens: BTreeSet<String>,
}

#[derive(Debug, Clone, Default)]
pub struct SearchIndex {
    entries: Vec<Entry>,
    postings: HashMap<String, Vec<usize>>,
    bigrams: bool,
}

impl SearchIndex {
    pub fn build(records: &[SightRecord], bigrams: bool) -> Self {
        let mut index = SearchIndex {
            bigrams,
            ..Default::default()
        };
        for (sight, record) in records.iter().enumerate() {
            for (field, text) in record_fields(record) {
                let tokens = field_tokens(field, text, bigrams);
                let id = index.entries.len();
                for token in &tokens {
                    index.postings.entry(token.clone()).or_default().push(id);
                }
                index.entries.push(Entry {
                    sight,
                    field,
                    text: text.to_string(),
                    tokens,
                });
            }
        }
        index
    }

    pub fn bigrams(&self) -> bool {
        self.bigrams
    }

    pub(super) fn search(
        &self,
        records: &[SightRecord],
        query: &str,
        sight_filter: Option<usize>,
        k: usize,
    ) -> Vec<SearchHit> {
        if k == 0 {
            return Vec::new();
        }
        let query = query_tokens(query, self.bigrams);
        let candidates: BTreeSet<usize> = query
            .iter()
            .filter_map(|t| self.postings.get(t))
            .flatten()
            .copied()
            .collect();
        let mut hits: Vec<SearchHit> = candidates
            .into_iter()
            .map(|id| &self.entries[id])
            .filter(|e| sight_filter.is_none_or(|s| s == e.sight))
            .map(|e| SearchHit {
                sight_id: records[e.sight].sight_id.clone(),
                field: e.field,
                text: e.text.clone(),
                score: score(&query, e.field, &e.tokens),
            })
            .filter(|h| h.score > 0.0)
            .collect();
        hits.sort_by(hit_order);
        hits.truncate(k);
        hits
    }
}
