use std::fmt;
use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    pub line: usize,
    pub message: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}: {}", self.line, self.message)
    }
}

fn join(diags: &[Diagnostic]) -> String {
    diags
        .iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join("; ")
}

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("cannot read corpus {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("invalid corpus: {}", join(.0))]
    Invalid(Vec<Diagnostic>),
    #[error("duplicate sight_id {id:?} on line {line} (first seen on line {first})")]
    DuplicateId { id: String, first: usize, line: usize },
}

/// Problems with template packs, lexicons, question graphs and config files.
#[derive(Debug, Error)]
pub enum DataError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("cannot parse {what}: {message}")]
    Parse { what: String, message: String },
    #[error("invalid {what}: {message}")]
    Invalid { what: String, message: String },
}

impl DataError {
    pub fn invalid(what: impl Into<String>, message: impl Into<String>) -> Self {
        DataError::Invalid {
            what: what.into(),
            message: message.into(),
        }
    }

    pub fn read(path: &std::path::Path) -> Result<String, DataError> {
        std::fs::read_to_string(path).map_err(|source| DataError::Io {
            path: path.to_path_buf(),
            source,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BackendError {
    #[error("backend transport error: {0}")]
    Transport(String),
    #[error("backend returned an unusable response: {0}")]
    Protocol(String),
}

#[derive(Debug, Error)]
pub enum GatewayError {
    #[error("template {template} has no binding for slot {slot:?}")]
    UnboundSlot { template: String, slot: String },
    #[error("template pack has no template {0:?}")]
    MissingTemplate(String),
    #[error("empty input for {0}")]
    EmptyInput(&'static str),
    #[error("no well-formed questions generated for {0}")]
    NoQuestions(String),
}

#[derive(Debug, Error)]
pub enum SessionError {
    #[error("session is finished")]
    Terminal,
    #[error("unknown sight {0:?}")]
    UnknownSight(String),
    #[error("recommended sight {recommended:?} is not one of {candidate_a:?} or {candidate_b:?}")]
    InvalidAssignment {
        candidate_a: String,
        candidate_b: String,
        recommended: String,
    },
    #[error("candidates must be two different sights, got {0:?} twice")]
    SameCandidates(String),
    #[error("no precomputed artifacts for sight {0:?}")]
    MissingArtifacts(String),
    #[error("transcript cannot be replayed: {0}")]
    Replay(String),
}

/// Crate-wide error.
#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Corpus(#[from] CorpusError),
    #[error(transparent)]
    Data(#[from] DataError),
    #[error(transparent)]
    Gateway(#[from] GatewayError),
    #[error(transparent)]
    Session(#[from] SessionError),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("serialization error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
