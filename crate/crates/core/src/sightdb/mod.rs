//! Tourist-sight corpus: ingest, validation, derived features and search.
//!
//! The corpus is a JSON-lines file with one [`SightRecord`] per line. The
//! catalog is immutable once built and can be shared between sessions.

mod features;
mod index;
mod record;

use std::collections::HashMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{CorpusError, Diagnostic};

pub use features::{
    derive_features, parse_first_price, parse_walk_minutes, price_band, station_distance,
    DerivedFeatures, FeatureThresholds, Popularity, PriceBand, StationProximity,
};
pub use index::{
    field_tokens, hit_order, query_tokens, record_fields, score, HitField, SearchHit, SearchIndex,
    VOCABULARY_BOOST,
};
pub use record::{Review, SightRecord};

/// Ratings at or above this count as positive reviews.
pub const POSITIVE_RATING: u8 = 4;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CatalogOptions {
    pub thresholds: FeatureThresholds,
    /// Character-bigram tokenization for scripts written without spaces.
    pub bigrams: bool,
}

#[derive(Debug, Clone)]
pub struct SightCatalog {
    records: Vec<SightRecord>,
    features: Vec<DerivedFeatures>,
    positions: HashMap<String, usize>,
    index: SearchIndex,
    options: CatalogOptions,
}

impl PartialEq for SightCatalog {
    fn eq(&self, other: &Self) -> bool {
        self.records == other.records && self.options == other.options
    }
}

impl SightCatalog {
    pub fn ingest(path: impl AsRef<Path>, options: CatalogOptions) -> Result<Self, CorpusError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| CorpusError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::ingest_str(&text, options)
    }

    /// Parses and validates every line; any problem rejects the whole corpus.
    pub fn ingest_str(text: &str, options: CatalogOptions) -> Result<Self, CorpusError> {
        let mut records = Vec::new();
        let mut lines = Vec::new();
        let mut diagnostics = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line_no = i + 1;
            if line.trim().is_empty() {
                continue;
            }
            match serde_json::from_str::<SightRecord>(line) {
                Ok(record) => {
                    diagnostics.extend(record.violations().into_iter().map(|message| Diagnostic {
                        line: line_no,
                        message: format!("{}: {message}", record.sight_id),
                    }));
                    records.push(record);
                    lines.push(line_no);
                }
                Err(e) => diagnostics.push(Diagnostic {
                    line: line_no,
                    message: e.to_string(),
                }),
            }
        }
        let mut seen: HashMap<&str, usize> = HashMap::new();
        for (record, &line) in records.iter().zip(&lines) {
            if let Some(first) = seen.insert(record.sight_id.as_str(), line) {
                return Err(CorpusError::DuplicateId {
                    id: record.sight_id.clone(),
                    first,
                    line,
                });
            }
        }
        if !diagnostics.is_empty() {
            return Err(CorpusError::Invalid(diagnostics));
        }
        Self::from_records(records, options)
    }

    pub fn from_records(
        records: Vec<SightRecord>,
        options: CatalogOptions,
    ) -> Result<Self, CorpusError> {
        let mut positions = HashMap::with_capacity(records.len());
        for (i, record) in records.iter().enumerate() {
            if let Some(first) = positions.insert(record.sight_id.clone(), i) {
                return Err(CorpusError::DuplicateId {
                    id: record.sight_id.clone(),
                    first: first + 1,
                    line: i + 1,
                });
            }
        }
        let diagnostics: Vec<Diagnostic> = records
            .iter()
            .enumerate()
            .flat_map(|(i, r)| {
                r.violations().into_iter().map(move |message| Diagnostic {
                    line: i + 1,
                    message: format!("{}: {message}", r.sight_id),
                })
            })
            .collect();
        if !diagnostics.is_empty() {
            return Err(CorpusError::Invalid(diagnostics));
        }
        let features = records
            .iter()
            .map(|r| derive_features(r, &options.thresholds))
            .collect();
        let index = SearchIndex::build(&records, options.bigrams);
        Ok(Self {
            records,
            features,
            positions,
            index,
            options,
        })
    }

    /// The corpus file form of this catalog.
    pub fn serialize(&self) -> String {
        let mut out = String::new();
        for record in &self.records {
            out.push_str(&serde_json::to_string(record).expect("records serialize"));
            out.push('\n');
        }
        out
    }

    pub fn options(&self) -> &CatalogOptions {
        &self.options
    }

    pub fn records(&self) -> &[SightRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn contains(&self, sight_id: &str) -> bool {
        self.positions.contains_key(sight_id)
    }

    pub fn get(&self, sight_id: &str) -> Option<&SightRecord> {
        self.positions.get(sight_id).map(|&i| &self.records[i])
    }

    pub fn features(&self, sight_id: &str) -> Option<&DerivedFeatures> {
        self.positions.get(sight_id).map(|&i| &self.features[i])
    }

    /// Top `k` hits for `query`, optionally restricted to one sight. An
    /// unknown `sight_filter` yields no hits.
    pub fn search(&self, query: &str, sight_filter: Option<&str>, k: usize) -> Vec<SearchHit> {
        let filter = match sight_filter {
            Some(id) => match self.positions.get(id) {
                Some(&i) => Some(i),
                None => return Vec::new(),
            },
            None => None,
        };
        self.index.search(&self.records, query, filter, k)
    }

    /// Up to `k` reviews rated 4 or better, best rating first and longer
    /// text first among equal ratings.
    pub fn positive_reviews(&self, sight_id: &str, k: usize) -> Vec<&str> {
        let Some(record) = self.get(sight_id) else {
            return Vec::new();
        };
        let mut reviews: Vec<&Review> = record
            .reviews
            .iter()
            .filter(|r| r.rating >= POSITIVE_RATING)
            .collect();
        reviews.sort_by(|a, b| {
            b.rating
                .cmp(&a.rating)
                .then_with(|| b.text.chars().count().cmp(&a.text.chars().count()))
                .then_with(|| a.text.cmp(&b.text))
        });
        reviews.into_iter().take(k).map(|r| r.text.as_str()).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::TriState;

    fn line(id: &str, reviews: &str, extra: &str) -> String {
        format!(
            r#"{{"sight_id":"{id}","name":"{id} name","summary_long":"A place.","business_hours":"10:00 - 18:00","location":"Daiba","access":"3-minute walk from Daiba Station","charge":"Adult: 1,000yen","reviews":{reviews},"indoor":"yes"{extra}}}"#
        )
    }

    #[test]
    fn empty_corpus_is_valid() {
        let catalog = SightCatalog::ingest_str("", CatalogOptions::default()).unwrap();
        assert!(catalog.is_empty());
        assert_eq!(catalog.serialize(), "");
    }

    #[test]
    fn duplicate_id_is_named() {
        let text = format!("{}\n{}\n", line("a", "[]", ""), line("a", "[]", ""));
        let err = SightCatalog::ingest_str(&text, CatalogOptions::default()).unwrap_err();
        match &err {
            CorpusError::DuplicateId { id, first, line } => {
                assert_eq!((id.as_str(), *first, *line), ("a", 1, 2));
            }
            other => panic!("unexpected {other:?}"),
        }
        assert!(err.to_string().contains("\"a\""));
    }

    #[test]
    fn malformed_lines_are_reported_with_numbers() {
        let text = format!(
            "{}\nnot json\n{}\n",
            line("a", "[]", ""),
            line("b", r#"[{"text":"x","rating":9}]"#, "")
        );
        let err = SightCatalog::ingest_str(&text, CatalogOptions::default()).unwrap_err();
        let CorpusError::Invalid(diags) = err else {
            panic!("expected diagnostics")
        };
        let lines: Vec<usize> = diags.iter().map(|d| d.line).collect();
        assert_eq!(lines, vec![2, 3]);
    }

    #[test]
    fn review_score_requires_reviews() {
        let text = line("a", "[]", r#","review_score":4.5"#);
        assert!(SightCatalog::ingest_str(&text, CatalogOptions::default()).is_err());
        let text = line("a", "[]", r#","n_reviews":12"#);
        assert!(SightCatalog::ingest_str(&text, CatalogOptions::default()).is_err());
        let text = line("a", "[]", r#","n_reviews":12,"review_score":4.5"#);
        let catalog = SightCatalog::ingest_str(&text, CatalogOptions::default()).unwrap();
        assert_eq!(catalog.get("a").unwrap().indoor, TriState::Yes);
    }

    #[test]
    fn positive_reviews_threshold_and_order() {
        let reviews = r#"[{"text":"ok","rating":3},{"text":"great","rating":5},{"text":"bad","rating":2},{"text":"good fun","rating":4},{"text":"wonderful view","rating":5}]"#;
        let catalog = SightCatalog::ingest_str(
            &line("a", reviews, r#","n_reviews":5,"review_score":3.8"#),
            CatalogOptions::default(),
        )
        .unwrap();
        assert_eq!(catalog.positive_reviews("a", 2), vec!["wonderful view", "great"]);
        assert_eq!(
            catalog.positive_reviews("a", 10),
            vec!["wonderful view", "great", "good fun"]
        );
        assert!(catalog.positive_reviews("missing", 3).is_empty());
    }

    #[test]
    fn search_filters_and_handles_zero_k() {
        let text = format!("{}\n{}\n", line("a", "[]", ""), line("b", "[]", ""));
        let catalog = SightCatalog::ingest_str(&text, CatalogOptions::default()).unwrap();
        assert!(catalog.search("price", None, 0).is_empty());
        let hits = catalog.search("price", Some("b"), 5);
        assert_eq!(hits.len(), 1);
        assert_eq!(hits[0].sight_id, "b");
        assert_eq!(hits[0].field, HitField::Charge);
        assert!(catalog.search("price", Some("zzz"), 5).is_empty());
        assert!(catalog.search("xylophone", None, 5).is_empty());
    }
}
