use std::fmt;

use thiserror::Error;

use super::persona::AgentPersona;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BackendError {
    #[error("dialogue backend unavailable: {0}")]
    Unavailable(String),
    #[error("dialogue backend returned an invalid reply: {0}")]
    InvalidReply(String),
}

/// Everything a backend may see when producing a reply. The hidden
/// diagnosis is never part of it.
#[derive(Debug, Clone, Copy)]
pub struct DialogueRequest<'a> {
    pub persona: &'a AgentPersona,
    /// Student-visible case context (demographics, chief complaint).
    pub case_context: &'a str,
    pub utterance: &'a str,
    /// The deterministic reply selected from the case knowledge base.
    pub scripted_reply: &'a str,
}

/// Produces candidate reply text for an agent. Whatever comes back is
/// still passed through the disclosure guard by the caller.
pub trait DialogueBackend: Send + Sync + fmt::Debug {
    fn name(&self) -> &str;

    fn respond(&self, request: &DialogueRequest<'_>) -> Result<String, BackendError>;
}

/// Default backend: returns the scripted reply unchanged. Pure.
#[derive(Debug, Clone, Copy, Default)]
pub struct ScriptBackend;

impl DialogueBackend for ScriptBackend {
    fn name(&self) -> &str {
        "script"
    }

    fn respond(&self, request: &DialogueRequest<'_>) -> Result<String, BackendError> {
        Ok(request.scripted_reply.to_owned())
    }
}
