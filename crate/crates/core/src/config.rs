//! Engine configuration file (TOML).
//!
//! ```toml
//! language = "en"
//! corpus = "data/corpus/odaiba.jsonl"   # or bundle = "odaiba.bundle.json"
//! time_budget_secs = 300
//! max_retries = 2
//!
//! [backend]
//! kind = "mock"
//! seed = 7
//! ```
//!
//! Relative paths are resolved against the directory of the config file.

use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Duration as StdDuration;

use serde::{Deserialize, Serialize};

use crate::bundle::ArtifactBundle;
use crate::clock::Clock;
use crate::error::{DataError, Error};
use crate::gateway::{
    GenBackend, Gateway, KanaConfig, MockBackend, RemoteBackend, TemplatePack, DEFAULT_MAX_RETRIES,
};
use crate::interview::{AnswerLexicon, QuestionGraph};
use crate::session::{Engine, EngineSettings, DEFAULT_MAX_QA_ROUNDS, DEFAULT_TIME_BUDGET_SECS};
use crate::sightdb::{CatalogOptions, FeatureThresholds, SightCatalog};

pub const DEFAULT_CREDENTIAL_ENV: &str = "TOURDESK_BACKEND_KEY";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum BackendConfig {
    Mock {
        #[serde(default)]
        seed: u64,
    },
    Remote {
        endpoint: String,
        #[serde(default = "default_credential_env")]
        credential_env: String,
        #[serde(default = "default_timeout")]
        timeout_secs: u64,
    },
}

fn default_credential_env() -> String {
    DEFAULT_CREDENTIAL_ENV.to_string()
}

fn default_timeout() -> u64 {
    30
}

impl Default for BackendConfig {
    fn default() -> Self {
        BackendConfig::Mock { seed: 0 }
    }
}

impl BackendConfig {
    pub fn build(&self) -> Arc<dyn GenBackend> {
        match self {
            BackendConfig::Mock { seed } => Arc::new(MockBackend::new(*seed)),
            BackendConfig::Remote {
                endpoint,
                credential_env,
                timeout_secs,
            } => Arc::new(RemoteBackend::from_env(
                endpoint.clone(),
                credential_env,
                StdDuration::from_secs(*timeout_secs),
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EngineConfig {
    /// Selects the bundled templates and lexicon ("en" or "ja").
    pub language: String,
    pub corpus: Option<PathBuf>,
    pub bundle: Option<PathBuf>,
    pub templates: Option<PathBuf>,
    pub lexicon: Option<PathBuf>,
    pub graph: Option<PathBuf>,
    pub backend: BackendConfig,
    pub time_budget_secs: i64,
    pub max_retries: u32,
    pub max_qa_rounds: u32,
    /// Seed for offline artifact generation.
    pub build_seed: u64,
    /// Character-bigram tokenization; defaults to on for Japanese.
    pub bigrams: Option<bool>,
    /// Reading disambiguation; defaults to on for Japanese.
    pub kana: Option<bool>,
    pub thresholds: FeatureThresholds,
}

impl Default for EngineConfig {
    fn default() -> Self {
        Self {
            language: "en".into(),
            corpus: None,
            bundle: None,
            templates: None,
            lexicon: None,
            graph: None,
            backend: BackendConfig::default(),
            time_budget_secs: DEFAULT_TIME_BUDGET_SECS,
            max_retries: DEFAULT_MAX_RETRIES,
            max_qa_rounds: DEFAULT_MAX_QA_ROUNDS,
            build_seed: 0,
            bigrams: None,
            kana: None,
            thresholds: FeatureThresholds::default(),
        }
    }
}

impl EngineConfig {
    pub fn load(path: impl AsRef<Path>) -> Result<Self, DataError> {
        let path = path.as_ref();
        let mut config = Self::parse(&DataError::read(path)?)?;
        if let Some(dir) = path.parent() {
            config.resolve_paths(dir);
        }
        Ok(config)
    }

    pub fn parse(text: &str) -> Result<Self, DataError> {
        let config: Self = toml::from_str(text).map_err(|e| DataError::Parse {
            what: "config".into(),
            message: e.to_string(),
        })?;
        if !matches!(config.language.as_str(), "en" | "ja") && config.templates.is_none() {
            return Err(DataError::invalid(
                "config",
                format!("no bundled templates for language {:?}", config.language),
            ));
        }
        if config.time_budget_secs <= 0 {
            return Err(DataError::invalid("config", "time_budget_secs must be positive"));
        }
        Ok(config)
    }

    fn resolve_paths(&mut self, dir: &Path) {
        for path in [
            &mut self.corpus,
            &mut self.bundle,
            &mut self.templates,
            &mut self.lexicon,
            &mut self.graph,
        ]
        .into_iter()
        .flatten()
        {
            if path.is_relative() {
                *path = dir.join(&*path);
            }
        }
    }

    fn japanese(&self) -> bool {
        self.language == "ja"
    }

    pub fn catalog_options(&self) -> CatalogOptions {
        CatalogOptions {
            thresholds: self.thresholds.clone(),
            bigrams: self.bigrams.unwrap_or(self.japanese()),
        }
    }

    pub fn pack(&self) -> Result<TemplatePack, DataError> {
        match &self.templates {
            Some(path) => TemplatePack::load(path),
            None if self.japanese() => Ok(TemplatePack::japanese()),
            None => Ok(TemplatePack::english()),
        }
    }

    pub fn answer_lexicon(&self) -> Result<AnswerLexicon, DataError> {
        match &self.lexicon {
            Some(path) => AnswerLexicon::load(path),
            None if self.japanese() => Ok(AnswerLexicon::japanese()),
            None => Ok(AnswerLexicon::english()),
        }
    }

    pub fn question_graph(&self) -> Result<QuestionGraph, DataError> {
        match &self.graph {
            Some(path) => QuestionGraph::load(path),
            None => Ok(QuestionGraph::standard()),
        }
    }

    pub fn gateway(&self) -> Result<Gateway, DataError> {
        Ok(Gateway::new(Arc::new(self.pack()?), self.backend.build()).with_max_retries(self.max_retries))
    }

    pub fn settings(&self) -> EngineSettings {
        EngineSettings {
            time_budget: chrono::Duration::seconds(self.time_budget_secs),
            max_qa_rounds: self.max_qa_rounds,
            kana: self
                .kana
                .unwrap_or(self.japanese())
                .then(KanaConfig::default),
        }
    }

    /// The prebuilt bundle, or a bundle generated now from the corpus.
    pub fn load_bundle(&self, gateway: &Gateway, lexicon: &AnswerLexicon) -> Result<ArtifactBundle, Error> {
        if let Some(path) = &self.bundle {
            return ArtifactBundle::load(path);
        }
        let corpus = self
            .corpus
            .as_ref()
            .ok_or_else(|| DataError::invalid("config", "either corpus or bundle is required"))?;
        let catalog = SightCatalog::ingest(corpus, self.catalog_options())?;
        Ok(ArtifactBundle::build(&catalog, gateway, lexicon, self.build_seed)?.0)
    }

    /// Everything needed to serve sessions.
    pub fn engine(&self, clock: Arc<dyn Clock>) -> Result<Engine, Error> {
        let gateway = self.gateway()?;
        let lexicon = self.answer_lexicon()?;
        let bundle = self.load_bundle(&gateway, &lexicon)?;
        Engine::new(
            Arc::new(bundle),
            gateway,
            Arc::new(lexicon),
            Arc::new(self.question_graph()?),
            clock,
            self.settings(),
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_remote_backend() {
        let c = EngineConfig::parse(
            r#"
            corpus = "x.jsonl"
            [backend]
            kind = "remote"
            endpoint = "http://localhost:9000/complete"
            "#,
        )
        .unwrap();
        assert_eq!(
            c.backend,
            BackendConfig::Remote {
                endpoint: "http://localhost:9000/complete".into(),
                credential_env: DEFAULT_CREDENTIAL_ENV.into(),
                timeout_secs: 30
            }
        );
        assert_eq!(c.max_retries, DEFAULT_MAX_RETRIES);
    }

    #[test]
    fn japanese_defaults() {
        let c = EngineConfig::parse("language = \"ja\"").unwrap();
        assert!(c.catalog_options().bigrams);
        assert!(c.settings().kana.is_some());
        assert_eq!(c.pack().unwrap().language(), "ja");
    }

    #[test]
    fn rejects_unknown_keys_and_bad_budget() {
        assert!(EngineConfig::parse("colour = 1").is_err());
        assert!(EngineConfig::parse("time_budget_secs = 0").is_err());
    }
}
