//! Offline artifacts: everything generated once per sight before any
//! session runs (one-line summaries, location-wise questions with their
//! recommendation points, and appeal sentences), stored with the corpus in
//! one versioned JSON file.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{DataError, Error, GatewayError, SessionError};
use crate::gateway::{GenMetrics, Gateway};
use crate::interview::{AnswerLexicon, LocWiseQuestionSet, LOC_QUESTIONS_PER_SIGHT};
use crate::recommendation::build_appeal;
use crate::sightdb::{CatalogOptions, SightCatalog, SightRecord};
use crate::text::stable_hash;

pub const BUNDLE_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SightArtifacts {
    pub summary: String,
    /// Empty when no well-formed question could be generated; the interview
    /// then skips the location-wise nodes.
    #[serde(default)]
    pub questions: Vec<String>,
    #[serde(default)]
    pub source_points: Vec<String>,
    pub appeal: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArtifactBundle {
    pub version: u32,
    pub language: String,
    pub options: CatalogOptions,
    pub records: Vec<SightRecord>,
    pub artifacts: BTreeMap<String, SightArtifacts>,
}

/// Counters from a bundle build.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct BuildReport {
    pub sights: usize,
    pub without_questions: Vec<String>,
    pub metrics: GenMetrics,
}

impl ArtifactBundle {
    /// Generates the artifacts of every sight. Each sight uses its own seed
    /// derived from `seed` and its id, so adding a sight leaves the others
    /// unchanged.
    pub fn build(
        catalog: &SightCatalog,
        gateway: &Gateway,
        lexicon: &AnswerLexicon,
        seed: u64,
    ) -> Result<(Self, BuildReport), GatewayError> {
        let mut artifacts = BTreeMap::new();
        let mut report = BuildReport::default();
        let mut records = Vec::with_capacity(catalog.len());
        for record in catalog.records() {
            let mut metrics = GenMetrics::new(stable_hash(&[
                &seed.to_le_bytes(),
                record.sight_id.as_bytes(),
            ]));
            let summary = if record.summary_one_line.is_empty() {
                gateway
                    .summarize(&record.name, &record.summary_long, &mut metrics)?
                    .text
            } else {
                record.summary_one_line.clone()
            };
            let questions = match gateway.generate_questions(
                &record.name,
                &record.summary_long,
                LOC_QUESTIONS_PER_SIGHT,
                lexicon,
                &mut metrics,
            ) {
                Ok(q) => q,
                Err(GatewayError::NoQuestions(_)) => {
                    report.without_questions.push(record.sight_id.clone());
                    Vec::new()
                }
                Err(e) => return Err(e),
            };
            let source_points = questions
                .iter()
                .map(|q| gateway.translate_point(&record.name, q, &mut metrics).map(|g| g.text))
                .collect::<Result<Vec<_>, _>>()?;
            let appeal = build_appeal(gateway, &record.name, &summary, &mut metrics)?.text;
            accumulate(&mut report.metrics, &metrics);
            let mut stored = record.clone();
            stored.summary_one_line = summary.clone();
            records.push(stored);
            artifacts.insert(
                record.sight_id.clone(),
                SightArtifacts {
                    summary,
                    questions,
                    source_points,
                    appeal,
                },
            );
        }
        report.sights = records.len();
        let bundle = Self {
            version: BUNDLE_VERSION,
            language: gateway.pack().language().to_string(),
            options: catalog.options().clone(),
            records,
            artifacts,
        };
        Ok((bundle, report))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("bundle serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, Error> {
        let bundle: Self = serde_json::from_str(text)?;
        bundle.validate()?;
        Ok(bundle)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), Error> {
        std::fs::write(path, self.to_json())?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, Error> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    fn validate(&self) -> Result<(), Error> {
        if self.version != BUNDLE_VERSION {
            return Err(DataError::invalid(
                "bundle",
                format!(
                    "version {} is not supported (expected {BUNDLE_VERSION})",
                    self.version
                ),
            )
            .into());
        }
        for record in &self.records {
            let artifacts = self
                .artifacts
                .get(&record.sight_id)
                .ok_or_else(|| SessionError::MissingArtifacts(record.sight_id.clone()))?;
            if !artifacts.questions.is_empty() {
                self.loc_set_checked(&record.sight_id, artifacts)?;
            }
        }
        Ok(())
    }

    fn loc_set_checked(&self, id: &str, a: &SightArtifacts) -> Result<LocWiseQuestionSet, Error> {
        LocWiseQuestionSet::new(id, a.questions.clone(), a.source_points.clone())
            .map_err(|m| DataError::invalid("bundle", m).into())
    }

    /// Rebuilds the searchable catalog from the stored records.
    pub fn catalog(&self) -> Result<SightCatalog, Error> {
        Ok(SightCatalog::from_records(self.records.clone(), self.options.clone())?)
    }

    pub fn artifacts(&self, sight_id: &str) -> Option<&SightArtifacts> {
        self.artifacts.get(sight_id)
    }

    /// The location-wise questions of a sight, if any were generated.
    pub fn loc_set(&self, sight_id: &str) -> Option<LocWiseQuestionSet> {
        let a = self.artifacts.get(sight_id)?;
        if a.questions.is_empty() {
            return None;
        }
        self.loc_set_checked(sight_id, a).ok()
    }
}

fn accumulate(total: &mut GenMetrics, part: &GenMetrics) {
    total.generations += part.generations;
    total.backend_calls += part.backend_calls;
    total.fallbacks += part.fallbacks;
    for (reason, n) in &part.rejections {
        *total.rejections.entry(*reason).or_default() += n;
    }
}
