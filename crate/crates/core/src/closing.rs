//! Closing: time notice, a narrated visit to the recommended sight and the
//! farewell.

use crate::error::GatewayError;
use crate::gateway::{forbidden, GenMetrics, Gateway, Generation, Reject, TemplateName};
use crate::sightdb::SightCatalog;

/// Positive reviews used for the narration.
pub const NARRATION_REVIEWS: usize = 3;

/// Narration of a visit built from up to three positive reviews, or from
/// the summary when the sight has none. It repeats something from its
/// source and states no number that is not in it.
pub fn narration(
    gateway: &Gateway,
    catalog: &SightCatalog,
    sight_id: &str,
    summary: &str,
    metrics: &mut GenMetrics,
) -> Result<Generation, GatewayError> {
    let name = catalog.get(sight_id).map(|r| r.name.as_str()).unwrap_or(sight_id);
    let mut sources: Vec<String> = catalog
        .positive_reviews(sight_id, NARRATION_REVIEWS)
        .into_iter()
        .map(str::to_string)
        .collect();
    if sources.is_empty() {
        sources.push(summary.to_string());
    }
    let reviews = sources
        .iter()
        .map(|r| format!("- {r}"))
        .collect::<Vec<_>>()
        .join("\n");
    let template = TemplateName::ClosingNarration;
    let bindings = [("name", name), ("reviews", reviews.as_str())];
    let mut grounding = sources.clone();
    grounding.push(summary.to_string());
    let policy = gateway
        .policy(template, &bindings)
        .reject(Reject::QuestionMark)
        .reject(Reject::MultiLine)
        .reject(Reject::Forbidden(forbidden()))
        .reject(Reject::UngroundedDigits(grounding))
        .reject(Reject::MissingEcho(sources.join(" ")));
    gateway.complete_with_policy(template, &bindings, &policy, metrics)
}

/// The three closing utterances in order.
pub fn closing_utterances(
    gateway: &Gateway,
    catalog: &SightCatalog,
    sight_id: &str,
    summary: &str,
    metrics: &mut GenMetrics,
) -> Result<[Generation; 3], GatewayError> {
    Ok([
        Generation::fixed(gateway.line("time_notice", &[])),
        narration(gateway, catalog, sight_id, summary, metrics)?,
        Generation::fixed(gateway.line("farewell", &[])),
    ])
}
