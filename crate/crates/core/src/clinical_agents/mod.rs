//! Decision procedures of the five clinical agents.
//!
//! Every operation is a pure function of the case and the session's
//! [`ObservationSet`] (which some operations extend). Sequencing and
//! timing belong to the supervisor.

mod evidence;
mod exam;
mod intervention;
mod observations;
mod patient;

use thiserror::Error;

use crate::agent_core::{AgentId, AgentRegistry, DialogueBackend, ExplanationError};
use crate::case_model::ClinicalCase;

pub use evidence::{explain_diagnosis, order_test, score_evidence, DiseaseScore, DiseaseStatus, FindingContribution};
pub use exam::exam_perform;
pub use intervention::{apply_intervention, InterventionOutcome};
pub use observations::ObservationSet;
pub use patient::{match_script, patient_reply, PriorQuestion, ScriptMatch, NO_MATCH_REPLY};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AgentError {
    #[error("unknown exam '{0}'")]
    UnknownExam(String),
    #[error("unknown test '{0}'")]
    UnknownTest(String),
    #[error("unknown intervention '{0}'")]
    UnknownIntervention(String),
    #[error("unknown disease '{0}'")]
    UnknownDisease(String),
    #[error(transparent)]
    Explanation(#[from] ExplanationError),
}

impl AgentError {
    /// Stable machine code for error responses.
    pub fn code(&self) -> &'static str {
        match self {
            AgentError::UnknownExam(_) => "unknown_exam",
            AgentError::UnknownTest(_) => "unknown_test",
            AgentError::UnknownIntervention(_) => "unknown_intervention",
            AgentError::UnknownDisease(_) => "unknown_disease",
            AgentError::Explanation(_) => "explanation_error",
        }
    }
}

/// What an agent needs besides the case: the personas and the dialogue
/// backend for free-text replies.
#[derive(Debug, Clone, Copy)]
pub struct AgentContext<'a> {
    pub case: &'a ClinicalCase,
    pub registry: &'a AgentRegistry,
    pub backend: &'a dyn DialogueBackend,
}

impl AgentContext<'_> {
    pub fn display_name(&self, agent: AgentId) -> &str {
        &self.registry.get(agent).display_name
    }
}
