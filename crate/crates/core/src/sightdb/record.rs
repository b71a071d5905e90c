use serde::{Deserialize, Serialize};

use super::features::PriceBand;
use crate::TriState;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Review {
    pub text: String,
    /// 1 to 5.
    pub rating: u8,
}

/// One tourist sight as stored in the corpus file.
///
/// `summary_one_line` is produced by the offline build; raw corpus lines
/// leave it out.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SightRecord {
    pub sight_id: String,
    pub name: String,
    pub summary_long: String,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub summary_one_line: String,
    pub business_hours: String,
    pub location: String,
    pub access: String,
    pub charge: String,
    #[serde(default)]
    pub reviews: Vec<Review>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub review_score: Option<f64>,
    #[serde(default)]
    pub n_reviews: u32,
    pub indoor: TriState,
    /// Meters to the nearest station, when the source states it.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub distance_from_station: Option<u32>,
    /// Used when the charge text cannot be parsed.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub price_override: Option<PriceBand>,
}

impl SightRecord {
    /// Returns every violated record invariant.
    pub fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.sight_id.is_empty()
            || !self
                .sight_id
                .chars()
                .all(|c| c.is_ascii_lowercase() || c.is_ascii_digit() || c == '_')
        {
            out.push(format!(
                "sight_id {:?} must be non-empty [a-z0-9_]",
                self.sight_id
            ));
        }
        if self.name.trim().is_empty() {
            out.push("name is empty".to_string());
        }
        if self.summary_long.trim().is_empty() {
            out.push("summary_long is empty".to_string());
        }
        if self.summary_one_line.contains('\n') {
            out.push("summary_one_line spans several lines".to_string());
        }
        for (i, review) in self.reviews.iter().enumerate() {
            if !(1..=5).contains(&review.rating) {
                out.push(format!("review {i} has rating {} outside 1-5", review.rating));
            }
        }
        match (self.review_score, self.n_reviews) {
            (Some(_), 0) => out.push("review_score given but n_reviews is 0".to_string()),
            (None, n) if n > 0 => out.push(format!("n_reviews is {n} but review_score is missing")),
            (Some(score), _) if !(1.0..=5.0).contains(&score) => {
                out.push(format!("review_score {score} outside 1-5"))
            }
            _ => {}
        }
        out
    }
}
