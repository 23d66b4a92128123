//! Clinical scenario simulator core.
//!
//! A supervisor state machine routes student actions to five rule-based
//! clinical agents. Every agent decision is returned together with a
//! structured [`agent_core::ExplanationRecord`] (reason codes, signed feature
//! contributions, rule ids) so it can be audited, visualised and replayed.
//!
//! The crate also carries a small requirements-engineering toolkit
//! ([`re_toolkit`]) for persona, scenario, user-story and requirement
//! documents and their traceability lint.

pub mod agent_core;
pub mod case_model;
pub mod clinical_agents;
pub mod diagnostics;
pub mod evaluation;
pub mod ids;
pub mod re_toolkit;
pub mod reference;
pub mod supervisor;

pub use agent_core::{AgentId, AgentResponse, ExplanationKind, ExplanationRecord};
pub use case_model::{parse_case, validate_case, ClinicalCase};
pub use diagnostics::{Diagnostic, Severity};
pub use supervisor::{Session, SessionState, StudentAction};
