//! Dialogue backend selection.
//!
//! `CLINSIM_BACKEND` is `script` (the default) or `external:<url>`. The
//! external backend POSTs each request as JSON and expects `{"text": ...}`
//! back; any failure falls back to the scripted reply in the agent, and the
//! disclosure guard still applies to whatever text is returned.

use std::str::FromStr;
use std::sync::Arc;
use std::time::Duration;

use clinsim_core::agent_core::{BackendError, DialogueBackend, DialogueRequest, ScriptBackend};
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const BACKEND_ENV: &str = "CLINSIM_BACKEND";

const EXTERNAL_TIMEOUT: Duration = Duration::from_secs(5);

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BackendSpec {
    Script,
    External(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("invalid backend '{0}': expected 'script' or 'external:<url>'")]
pub struct BackendSpecError(pub String);

impl FromStr for BackendSpec {
    type Err = BackendSpecError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if s.is_empty() || s == "script" {
            return Ok(BackendSpec::Script);
        }
        match s.strip_prefix("external:") {
            Some(url) if url.starts_with("http://") || url.starts_with("https://") => {
                Ok(BackendSpec::External(url.to_owned()))
            }
            _ => Err(BackendSpecError(s.to_owned())),
        }
    }
}

impl BackendSpec {
    pub fn from_env() -> Result<Self, BackendSpecError> {
        std::env::var(BACKEND_ENV).unwrap_or_default().parse()
    }

    pub fn build(&self) -> Arc<dyn DialogueBackend> {
        match self {
            BackendSpec::Script => Arc::new(ScriptBackend),
            BackendSpec::External(url) => Arc::new(ExternalBackend::new(url.clone())),
        }
    }
}

#[derive(Debug, Serialize)]
struct ExternalRequest<'a> {
    agent_id: &'a str,
    display_name: &'a str,
    case_context: &'a str,
    utterance: &'a str,
    scripted_reply: &'a str,
}

#[derive(Debug, Deserialize)]
struct ExternalReply {
    text: String,
}

/// Blocking HTTP client for an external reply generator.
#[derive(Debug)]
pub struct ExternalBackend {
    url: String,
    agent: ureq::Agent,
}

impl ExternalBackend {
    pub fn new(url: impl Into<String>) -> Self {
        let config = ureq::Agent::config_builder()
            .timeout_global(Some(EXTERNAL_TIMEOUT))
            .http_status_as_error(false)
            .build();
        Self {
            url: url.into(),
            agent: ureq::Agent::new_with_config(config),
        }
    }

    pub fn url(&self) -> &str {
        &self.url
    }
}

impl DialogueBackend for ExternalBackend {
    fn name(&self) -> &str {
        "external"
    }

    fn respond(&self, request: &DialogueRequest<'_>) -> Result<String, BackendError> {
        let body = ExternalRequest {
            agent_id: request.persona.agent_id.as_str(),
            display_name: &request.persona.display_name,
            case_context: request.case_context,
            utterance: request.utterance,
            scripted_reply: request.scripted_reply,
        };
        let mut resp = self
            .agent
            .post(&self.url)
            .send_json(&body)
            .map_err(|e| BackendError::Unavailable(e.to_string()))?;
        if !resp.status().is_success() {
            return Err(BackendError::Unavailable(format!("HTTP {}", resp.status())));
        }
        let reply: ExternalReply = resp
            .body_mut()
            .read_json()
            .map_err(|e| BackendError::InvalidReply(e.to_string()))?;
        Ok(reply.text)
    }
}
