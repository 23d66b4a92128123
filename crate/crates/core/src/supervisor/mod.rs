//! Session orchestration: the lifecycle state machine, structural action
//! routing, the append-only interaction log, export and replay.

mod action;
mod progress;
mod replay;
mod session;

use std::collections::BTreeMap;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

pub use action::{Action, ActionKind, ExplanationTarget, LogEntry, RouteDecision, StudentAction};
pub use progress::{ActionCount, PhaseHint, Progress};
pub use replay::{parse_action_script, replay, ActionScript, ScriptError, SessionExport, EXPORT_FORMAT_VERSION};
pub use session::{Session, SessionState, SupervisorError};

use crate::agent_core::{DialogueBackend, ScriptBackend};
use crate::case_model::{validate_case, ClinicalCase};
use crate::diagnostics::Diagnostic;

/// Decision ids are `<session id>#<log seq>`.
pub fn decision_id_for(session_id: &str, seq: u64) -> String {
    format!("{session_id}#{seq}")
}

/// Case library plus session factory. Sessions it starts are independent
/// values; callers decide how to share them.
#[derive(Debug)]
pub struct Supervisor {
    cases: BTreeMap<String, Arc<ClinicalCase>>,
    backend: Arc<dyn DialogueBackend>,
    next_session: AtomicU64,
}

impl Default for Supervisor {
    fn default() -> Self {
        Self::new(Arc::new(ScriptBackend))
    }
}

impl Supervisor {
    pub fn new(backend: Arc<dyn DialogueBackend>) -> Self {
        Self {
            cases: BTreeMap::new(),
            backend,
            next_session: AtomicU64::new(1),
        }
    }

    /// Register a case. Rejected if it has any error diagnostic.
    pub fn add_case(&mut self, case: ClinicalCase) -> Result<(), SupervisorError> {
        let errors: Vec<Diagnostic> = validate_case(&case).into_iter().filter(Diagnostic::is_error).collect();
        if !errors.is_empty() {
            return Err(SupervisorError::InvalidCase(errors));
        }
        self.cases.insert(case.case_id.clone(), Arc::new(case));
        Ok(())
    }

    pub fn case(&self, case_id: &str) -> Option<&Arc<ClinicalCase>> {
        self.cases.get(case_id)
    }

    pub fn cases(&self) -> impl Iterator<Item = &Arc<ClinicalCase>> {
        self.cases.values()
    }

    pub fn backend(&self) -> &Arc<dyn DialogueBackend> {
        &self.backend
    }

    pub fn next_session_id(&self) -> String {
        let n = self.next_session.fetch_add(1, Ordering::Relaxed);
        format!("sess-{n:04}")
    }

    pub fn start_session(&self, case_id: &str) -> Result<Session, SupervisorError> {
        let case = self
            .cases
            .get(case_id)
            .ok_or_else(|| SupervisorError::UnknownCase(case_id.to_owned()))?;
        Session::start(self.next_session_id(), Arc::clone(case), Arc::clone(&self.backend))
    }
}
