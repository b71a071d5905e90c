//! Scenario-driven travel consultation engine.
//!
//! A session walks a customer through greeting, icebreaker, a brief
//! explanation of two candidate sights, an interview, recommendation,
//! question answering and closing. Fixed rules drive the scenario; a
//! pluggable text-generation backend fills in comments, follow-up
//! questions, recommendations and answers grounded in a local sight corpus.

pub mod bundle;
pub mod clock;
pub mod closing;
pub mod config;
pub mod error;
pub mod gateway;
pub mod interview;
pub mod qa;
pub mod recommendation;
pub mod session;
pub mod sightdb;
pub mod text;

use serde::{Deserialize, Serialize};

pub use error::{Error, Result};

/// Yes / no / not known.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TriState {
    Yes,
    No,
    #[default]
    Unknown,
}
