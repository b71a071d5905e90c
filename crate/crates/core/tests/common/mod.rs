#![allow(dead_code)]

use std::path::PathBuf;
use std::sync::Arc;

use chrono::{DateTime, Duration, TimeZone, Utc};
use tourdesk_core::bundle::ArtifactBundle;
use tourdesk_core::clock::ManualClock;
use tourdesk_core::gateway::{Gateway, MockBackend, TemplatePack};
use tourdesk_core::interview::{AnswerLexicon, QuestionGraph};
use tourdesk_core::session::{Assignment, Engine, EngineSettings};
use tourdesk_core::sightdb::{CatalogOptions, SightCatalog};

pub const BUILD_SEED: u64 = 11;
pub const BACKEND_SEED: u64 = 5;

pub fn data(rel: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data").join(rel)
}

pub fn fixture(rel: &str) -> String {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(rel);
    std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

pub fn odaiba() -> SightCatalog {
    SightCatalog::ingest(data("corpus/odaiba.jsonl"), CatalogOptions::default()).expect("fixture corpus")
}

pub fn towers() -> SightCatalog {
    SightCatalog::ingest(data("corpus/towers.jsonl"), CatalogOptions::default()).expect("fixture corpus")
}

pub fn mock_gateway(seed: u64) -> Gateway {
    Gateway::new(Arc::new(TemplatePack::english()), Arc::new(MockBackend::new(seed)))
}

pub fn bundle(catalog: &SightCatalog) -> ArtifactBundle {
    ArtifactBundle::build(catalog, &mock_gateway(BACKEND_SEED), &AnswerLexicon::english(), BUILD_SEED)
        .expect("bundle builds")
        .0
}

pub fn t0() -> DateTime<Utc> {
    Utc.with_ymd_and_hms(2024, 5, 1, 10, 0, 0).unwrap()
}

/// Engine over `bundle` whose clock moves two seconds per reading.
pub fn engine_with(bundle: ArtifactBundle, settings: EngineSettings) -> Engine {
    Engine::new(
        Arc::new(bundle),
        mock_gateway(BACKEND_SEED),
        Arc::new(AnswerLexicon::english()),
        Arc::new(QuestionGraph::standard()),
        Arc::new(ManualClock::stepping(t0(), Duration::seconds(2))),
        settings,
    )
    .expect("engine")
}

pub fn engine() -> Engine {
    engine_with(bundle(&odaiba()), EngineSettings::default())
}

pub fn assignment() -> Assignment {
    Assignment::new("trick_art_museum", "daiba_park", "trick_art_museum")
}

/// Customer side of a complete consultation.
pub const SCRIPT: &[&str] = &[
    "I work as a teacher.",
    "Teaching children to enjoy learning.",
    "No, this is my first time.",
    "With my family.",
    "Yes, I do.",
    "They are 5 and 2 years old.",
    "Yes, I do.",
    "No, not really.",
    "Yes!",
    "No, we take the train.",
    "Good food and interesting museums.",
    "How much is it?",
    "Where is it?",
    "No, thank you.",
];
