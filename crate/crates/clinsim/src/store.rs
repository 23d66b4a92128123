//! In-memory session store behind the HTTP service.
//!
//! Each session sits behind its own lock, so actions on one session apply
//! in arrival order while separate sessions never contend.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;
use std::sync::Arc;

use clinsim_core::agent_core::DialogueBackend;
use clinsim_core::case_model::{load_case, CaseError};
use clinsim_core::supervisor::{Supervisor, SupervisorError};
use clinsim_core::{ClinicalCase, Session};
use parking_lot::{Mutex, RwLock};
use thiserror::Error;

pub type SharedSession = Arc<Mutex<Session>>;

#[derive(Debug, Error)]
pub enum StoreError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Case {
        path: String,
        #[source]
        source: CaseError,
    },
    #[error(transparent)]
    Supervisor(#[from] SupervisorError),
}

#[derive(Debug)]
pub struct SessionStore {
    supervisor: Supervisor,
    sessions: RwLock<BTreeMap<String, SharedSession>>,
}

impl SessionStore {
    pub fn new(supervisor: Supervisor) -> Self {
        Self {
            supervisor,
            sessions: RwLock::new(BTreeMap::new()),
        }
    }

    /// Store serving the given cases.
    pub fn with_cases(
        backend: Arc<dyn DialogueBackend>,
        cases: impl IntoIterator<Item = ClinicalCase>,
    ) -> Result<Self, StoreError> {
        let mut supervisor = Supervisor::new(backend);
        for case in cases {
            supervisor.add_case(case)?;
        }
        Ok(Self::new(supervisor))
    }

    /// Store serving every `*.json` case in `dir`, loaded in file-name order.
    pub fn from_dir(backend: Arc<dyn DialogueBackend>, dir: &Path) -> Result<Self, StoreError> {
        let io = |path: &Path, source| StoreError::Io {
            path: path.display().to_string(),
            source,
        };
        let mut paths: Vec<_> = fs::read_dir(dir)
            .map_err(|e| io(dir, e))?
            .filter_map(Result::ok)
            .map(|e| e.path())
            .filter(|p| p.extension().is_some_and(|x| x == "json"))
            .collect();
        paths.sort();
        let mut cases = Vec::with_capacity(paths.len());
        for path in paths {
            let text = fs::read_to_string(&path).map_err(|e| io(&path, e))?;
            let case = load_case(&text).map_err(|source| StoreError::Case {
                path: path.display().to_string(),
                source,
            })?;
            cases.push(case);
        }
        Self::with_cases(backend, cases)
    }

    pub fn supervisor(&self) -> &Supervisor {
        &self.supervisor
    }

    pub fn cases(&self) -> impl Iterator<Item = &Arc<ClinicalCase>> {
        self.supervisor.cases()
    }

    pub fn case(&self, case_id: &str) -> Option<&Arc<ClinicalCase>> {
        self.supervisor.case(case_id)
    }

    /// Start a session for `case_id` and register it.
    pub fn create(&self, case_id: &str) -> Result<SharedSession, SupervisorError> {
        let session = self.supervisor.start_session(case_id)?;
        let id = session.session_id().to_owned();
        let shared = Arc::new(Mutex::new(session));
        self.sessions.write().insert(id, Arc::clone(&shared));
        Ok(shared)
    }

    /// Register an already built session (for instance a replay).
    pub fn insert(&self, session: Session) -> SharedSession {
        let id = session.session_id().to_owned();
        let shared = Arc::new(Mutex::new(session));
        self.sessions.write().insert(id, Arc::clone(&shared));
        shared
    }

    pub fn session(&self, session_id: &str) -> Option<SharedSession> {
        self.sessions.read().get(session_id).cloned()
    }

    pub fn session_ids(&self) -> Vec<String> {
        self.sessions.read().keys().cloned().collect()
    }
}

#[cfg(test)]
mod tests {
    use clinsim_core::agent_core::ScriptBackend;
    use clinsim_core::reference::{cases_dir, chest_pain_case};
    use clinsim_core::StudentAction;

    use super::*;

    #[test]
    fn sessions_are_independent() {
        let store = SessionStore::with_cases(Arc::new(ScriptBackend), [chest_pain_case()]).unwrap();
        let a = store.create("chestpain-01").unwrap();
        let b = store.create("chestpain-01").unwrap();
        a.lock().route_action(StudentAction::order_test("ekg")).unwrap();
        assert_eq!(a.lock().log().len(), 2);
        assert_eq!(b.lock().log().len(), 1);
        assert_eq!(store.session_ids().len(), 2);
    }

    #[test]
    fn loads_bundled_cases() {
        let store = SessionStore::from_dir(Arc::new(ScriptBackend), &cases_dir()).unwrap();
        assert!(store.case("chestpain-01").is_some());
        assert!(matches!(store.create("nope"), Err(SupervisorError::UnknownCase(_))));
    }
}
