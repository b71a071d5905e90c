//! HTTP completion backend.
//!
//! Wire format: `POST {endpoint}` with a JSON body `{"prompt": ..., "params":
//! {...}}` and an optional bearer credential; the response is
//! `{"completion": "..."}`.

use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::error::BackendError;
use crate::gateway::backend::{GenBackend, GenParams};

#[derive(Serialize)]
struct Request<'a> {
    prompt: &'a str,
    params: &'a GenParams,
}

#[derive(Deserialize)]
struct Response {
    completion: String,
}

#[derive(Debug, Clone)]
pub struct RemoteBackend {
    endpoint: String,
    credential: Option<String>,
    agent: ureq::Agent,
}

impl RemoteBackend {
    pub fn new(endpoint: impl Into<String>, credential: Option<String>, timeout: Duration) -> Self {
        Self {
            endpoint: endpoint.into(),
            credential,
            agent: ureq::AgentBuilder::new().timeout(timeout).build(),
        }
    }

    /// Reads the credential from the named environment variable, if set.
    pub fn from_env(endpoint: impl Into<String>, credential_env: &str, timeout: Duration) -> Self {
        let credential = std::env::var(credential_env).ok().filter(|v| !v.is_empty());
        Self::new(endpoint, credential, timeout)
    }

    pub fn endpoint(&self) -> &str {
        &self.endpoint
    }
}

impl GenBackend for RemoteBackend {
    fn complete(&self, prompt: &str, params: &GenParams) -> Result<String, BackendError> {
        let mut request = self.agent.post(&self.endpoint);
        if let Some(key) = &self.credential {
            request = request.set("Authorization", &format!("Bearer {key}"));
        }
        let response = request
            .send_json(Request { prompt, params })
            .map_err(|e| match e {
                ureq::Error::Status(code, _) => BackendError::Protocol(format!("HTTP {code}")),
                other => BackendError::Transport(other.to_string()),
            })?;
        let body: Response = response
            .into_json()
            .map_err(|e| BackendError::Protocol(e.to_string()))?;
        Ok(body.completion)
    }
}
