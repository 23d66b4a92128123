//! The contract every agent shares: runtime personas, explanation records,
//! the disclosure guard and the dialogue backend boundary.

mod backend;
mod explanation;
mod guard;
mod persona;

pub use backend::{BackendError, DialogueBackend, DialogueRequest, ScriptBackend};
pub use explanation::{
    AgentResponse, Contribution, ExplanationBuilder, ExplanationError, ExplanationKind, ExplanationRecord,
    REDACTED_REASON,
};
pub use guard::{find_forbidden, guard_disclosure, GuardResult, Violation, WITHHELD};
pub use persona::{build_agent_registry, format_persona_card, AgentId, AgentPersona, AgentRegistry};
