//! Recommendation of the assigned sight and the counter explanation for
//! the other candidate.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::GatewayError;
use crate::gateway::{forbidden, GenMetrics, Gateway, Generation, Provenance, Reject, TemplateName};
use crate::interview::{CustomerProfile, LocWiseQuestionSet};
use crate::sightdb::{
    DerivedFeatures, Popularity, PriceBand, SearchHit, SightCatalog, SightRecord, StationProximity,
};
use crate::text::{first_sentence, has_question_mark, tokenize};
use crate::TriState;

/// Points mentioned in one recommendation.
pub const MAX_POINTS: usize = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PointOrigin {
    /// The customer answered yes to a location-wise question.
    LocAnswer,
    /// Derived from the sight's own features.
    Independent,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RecommendationPoint {
    pub text: String,
    pub origin: PointOrigin,
    /// The question asked, or the line key of the feature.
    pub source: String,
}

/// Feature-based points in priority order: popularity, price, station
/// proximity, indoor.
pub fn independent_points(
    gateway: &Gateway,
    record: &SightRecord,
    features: &DerivedFeatures,
) -> Vec<RecommendationPoint> {
    let mut keys = Vec::new();
    if features.popularity == Popularity::High {
        keys.push("point_popular");
    }
    match features.price_band {
        PriceBand::Free => keys.push("point_free"),
        PriceBand::Low => keys.push("point_cheap"),
        PriceBand::Mid | PriceBand::High => {}
    }
    if features.station_proximity == StationProximity::Near {
        keys.push("point_near");
    }
    if features.indoor == TriState::Yes {
        keys.push("point_indoor");
    }
    keys.into_iter()
        .map(|key| RecommendationPoint {
            text: gateway.line(key, &[("name", &record.name)]),
            origin: PointOrigin::Independent,
            source: key.to_string(),
        })
        .collect()
}

/// Points for the recommendation: location-wise points the customer
/// answered yes to, in question order, then independent points, at most
/// [`MAX_POINTS`] in total.
pub fn select_points(
    gateway: &Gateway,
    profile: &CustomerProfile,
    loc_set: Option<&LocWiseQuestionSet>,
    record: &SightRecord,
    features: &DerivedFeatures,
) -> Vec<RecommendationPoint> {
    let mut points: Vec<RecommendationPoint> = loc_set
        .into_iter()
        .flat_map(|set| {
            set.questions
                .iter()
                .zip(&set.source_points)
                .enumerate()
                .filter(|(i, _)| profile.loc_answer(&set.sight_id, *i) == TriState::Yes)
                .map(|(_, (q, p))| RecommendationPoint {
                    text: p.clone(),
                    origin: PointOrigin::LocAnswer,
                    source: q.clone(),
                })
        })
        .collect();
    points.extend(independent_points(gateway, record, features));
    points.truncate(MAX_POINTS);
    points
}

/// "This place is appealing because ..." for a sight summary.
pub fn build_appeal(
    gateway: &Gateway,
    sight_name: &str,
    summary: &str,
    metrics: &mut GenMetrics,
) -> Result<Generation, GatewayError> {
    let name = TemplateName::RecommendAppeal;
    let bindings = [("name", sight_name), ("summary", summary)];
    let mut policy = gateway
        .policy(name, &bindings)
        .reject(Reject::QuestionMark)
        .reject(Reject::MultiLine)
        .reject(Reject::UngroundedDigits(vec![summary.to_string()]));
    policy.fallback = String::new();
    let stem = gateway.line("appeal_stem", &[]);
    let mut generation = gateway.complete_with_policy(name, &bindings, &policy, metrics)?;
    let reason = if generation.fell_back {
        first_sentence(summary).to_string()
    } else {
        generation.text.clone()
    };
    generation.text = join_appeal(&stem, &reason);
    Ok(generation)
}

fn join_appeal(stem: &str, reason: &str) -> String {
    join_sentences(&[stem.to_string(), reason.to_string()])
}

/// Search hits supporting the points, best hit per point, deduplicated.
/// Words of the sight's own name are left out of the queries, since every
/// point mentions it.
pub fn point_evidence(
    catalog: &SightCatalog,
    sight_id: &str,
    points: &[RecommendationPoint],
) -> Vec<SearchHit> {
    let name_tokens: BTreeSet<String> = catalog
        .get(sight_id)
        .map(|r| tokenize(&r.name, false).into_iter().collect())
        .unwrap_or_default();
    let mut hits: Vec<SearchHit> = Vec::new();
    for point in points {
        let query = tokenize(&point.text, false)
            .into_iter()
            .filter(|t| !name_tokens.contains(t))
            .collect::<Vec<_>>()
            .join(" ");
        for hit in catalog.search(&query, Some(sight_id), 1) {
            if !hits.iter().any(|h| h.field == hit.field && h.text == hit.text) {
                hits.push(hit);
            }
        }
    }
    hits
}

/// Inputs to the recommendation utterance.
#[derive(Debug, Clone, Copy)]
pub struct RecommendInput<'a> {
    pub record: &'a SightRecord,
    pub summary: &'a str,
    pub appeal: &'a str,
    pub points: &'a [RecommendationPoint],
    pub evidence: &'a [SearchHit],
}

/// Frame sentence, appeal and a generated explanation of the points. The
/// explanation may only use numbers from the summary, points and evidence;
/// when it cannot be produced the frame and appeal are spoken alone.
pub fn recommend_utterance(
    gateway: &Gateway,
    input: RecommendInput<'_>,
    metrics: &mut GenMetrics,
) -> Result<Generation, GatewayError> {
    let frame = gateway.line("recommend_frame", &[("name", &input.record.name)]);
    let search = input
        .evidence
        .iter()
        .map(|h| format!("- {}: {}", h.field.label(), h.text))
        .collect::<Vec<_>>()
        .join("\n");
    let points = input
        .points
        .iter()
        .map(|p| format!("- {}", p.text))
        .collect::<Vec<_>>()
        .join("\n");
    let name = TemplateName::RecommendUtterance;
    let bindings = [
        ("name", input.record.name.as_str()),
        ("summary", input.summary),
        ("search", search.as_str()),
        ("points", points.as_str()),
    ];
    let mut grounding: Vec<String> = vec![input.summary.to_string(), input.appeal.to_string()];
    grounding.extend(input.evidence.iter().map(|h| h.text.clone()));
    grounding.extend(input.points.iter().map(|p| p.text.clone()));
    let mut policy = gateway
        .policy(name, &bindings)
        .reject(Reject::QuestionMark)
        .reject(Reject::MultiLine)
        .reject(Reject::Forbidden(forbidden()))
        .reject(Reject::UngroundedDigits(grounding));
    policy.fallback = String::new();
    let explanation = gateway.complete_with_policy(name, &bindings, &policy, metrics)?;
    let mut parts = vec![frame, input.appeal.to_string()];
    if !explanation.text.is_empty() {
        parts.push(explanation.text.clone());
    }
    Ok(Generation {
        text: join_sentences(&parts),
        provenance: if explanation.fell_back {
            Provenance::Fixed
        } else {
            Provenance::Generated
        },
        attempts: explanation.attempts,
        fell_back: explanation.fell_back,
    })
}

/// Joins sentences, with a space unless both sides of the join are
/// non-ASCII (scripts written without spaces).
pub fn join_sentences(parts: &[String]) -> String {
    let mut out = String::new();
    for part in parts.iter().map(|p| p.trim()).filter(|p| !p.is_empty()) {
        let tight = out.chars().last().is_some_and(|c| !c.is_ascii())
            && part.chars().next().is_some_and(|c| !c.is_ascii());
        if !out.is_empty() && !tight {
            out.push(' ');
        }
        out.push_str(part);
    }
    out
}

/// Line keys of the other sight's weak points, at most two, in the order
/// popularity, price, station proximity.
pub fn weak_point_keys(features: &DerivedFeatures) -> Vec<&'static str> {
    let mut keys = Vec::new();
    if features.popularity == Popularity::Low {
        keys.push("weak_unpopular");
    }
    if features.price_band == PriceBand::High {
        keys.push("weak_expensive");
    }
    if features.station_proximity == StationProximity::Far {
        keys.push("weak_far");
    }
    keys.truncate(MAX_POINTS);
    keys
}

/// True when both names occur and `recommended` is the last one mentioned.
/// Occurrences of one name inside an occurrence of the other do not count.
pub fn mentions_recommended_last(text: &str, other: &str, recommended: &str) -> bool {
    match (
        last_standalone(text, other, recommended),
        last_standalone(text, recommended, other),
    ) {
        (Some(o), Some(r)) => r > o,
        _ => false,
    }
}

fn last_standalone(text: &str, name: &str, rival: &str) -> Option<usize> {
    if name.is_empty() {
        return None;
    }
    let covered: Vec<(usize, usize)> = if rival.len() > name.len() && rival.contains(name) {
        text.match_indices(rival).map(|(i, m)| (i, i + m.len())).collect()
    } else {
        Vec::new()
    };
    text.match_indices(name)
        .map(|(i, _)| i)
        .filter(|&i| !covered.iter().any(|&(s, e)| s <= i && i + name.len() <= e))
        .last()
}

/// Explains, without asking anything, why the other candidate is the weaker
/// choice, ending on the recommended sight.
pub fn counter_utterance(
    gateway: &Gateway,
    other: &SightRecord,
    other_summary: &str,
    other_features: &DerivedFeatures,
    recommended: &SightRecord,
    metrics: &mut GenMetrics,
) -> Result<Generation, GatewayError> {
    let mut keys = weak_point_keys(other_features);
    if keys.is_empty() {
        keys.push("weak_none");
    }
    let weak: Vec<String> = keys.iter().map(|k| gateway.line(k, &[])).collect();
    let weak = weak.join(if gateway.pack().language() == "en" { " and " } else { "、" });
    let name = TemplateName::CounterUtterance;
    let bindings = [
        ("other", other.name.as_str()),
        ("other_summary", other_summary),
        ("weak", weak.as_str()),
        ("recommended", recommended.name.as_str()),
    ];
    let other_name = other.name.clone();
    let recommended_name = recommended.name.clone();
    let policy = gateway
        .policy(name, &bindings)
        .reject(Reject::QuestionMark)
        .reject(Reject::MultiLine)
        .reject(Reject::Forbidden(forbidden()))
        .reject(Reject::MustContain(vec![other.name.clone(), recommended.name.clone()]))
        .reject(Reject::Custom(
            "recommended sight not mentioned last",
            std::sync::Arc::new(move |t: &str| {
                !mentions_recommended_last(t, &other_name, &recommended_name)
            }),
        ))
        .reject(Reject::UngroundedDigits(vec![other_summary.to_string(), weak.clone()]));
    let generation = gateway.complete_with_policy(name, &bindings, &policy, metrics)?;
    debug_assert!(!has_question_mark(&generation.text));
    Ok(generation)
}
