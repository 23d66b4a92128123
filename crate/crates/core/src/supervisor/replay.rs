use std::sync::Arc;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

use super::action::{LogEntry, StudentAction};
use super::session::{Session, SessionState, SupervisorError};
use crate::agent_core::DialogueBackend;
use crate::case_model::ClinicalCase;
use crate::evaluation::FeedbackReport;

pub const EXPORT_FORMAT_VERSION: u32 = 1;

/// Complete serialised session: everything needed to audit or replay it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionExport {
    pub format: u32,
    pub session_id: String,
    pub case_id: String,
    pub state: SessionState,
    pub started_at: DateTime<Utc>,
    pub ended_at: Option<DateTime<Utc>>,
    pub log: Vec<LogEntry>,
    pub report: Option<FeedbackReport>,
}

impl SessionExport {
    /// Copy with every wall-clock field zeroed, for replay comparison.
    pub fn without_timing(&self) -> Self {
        let mut export = self.clone();
        export.started_at = DateTime::<Utc>::UNIX_EPOCH;
        export.ended_at = export.ended_at.map(|_| DateTime::<Utc>::UNIX_EPOCH);
        export.log = export.log.iter().map(LogEntry::without_timing).collect();
        export
    }

    pub fn student_actions(&self) -> Vec<StudentAction> {
        self.log
            .iter()
            .filter(|e| e.action.kind().is_student())
            .map(|e| e.action.clone())
            .collect()
    }
}

impl Session {
    pub fn export(&self) -> SessionExport {
        SessionExport {
            format: EXPORT_FORMAT_VERSION,
            session_id: self.session_id().to_owned(),
            case_id: self.case().case_id.clone(),
            state: self.state(),
            started_at: self.started_at(),
            ended_at: self.ended_at(),
            log: self.log().to_vec(),
            report: self.report().cloned(),
        }
    }
}

#[derive(Debug, Error)]
pub enum ScriptError {
    #[error("script is not valid JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("{path}: {message}")]
    Shape { path: String, message: String },
}

/// Student actions to drive a session, optionally tied to an earlier
/// session's id and case.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ActionScript {
    pub session_id: Option<String>,
    pub case_id: Option<String>,
    pub actions: Vec<StudentAction>,
}

fn action_at(value: Value, path: String) -> Result<StudentAction, ScriptError> {
    serde_json::from_value(value).map_err(|e| ScriptError::Shape {
        path,
        message: e.to_string(),
    })
}

/// Accepts a session export, `{"actions": [...]}`, or a bare array whose
/// elements are actions or log entries. System actions in the input are
/// dropped; replay re-creates them.
pub fn parse_action_script(text: &str) -> Result<ActionScript, ScriptError> {
    let value: Value = serde_json::from_str(text)?;
    let text_field = |obj: &serde_json::Map<String, Value>, key: &str| {
        obj.get(key).and_then(Value::as_str).map(str::to_owned)
    };
    let (session_id, case_id, items, list_key) = match value {
        Value::Array(items) => (None, None, items, ""),
        Value::Object(mut obj) => {
            let session_id = text_field(&obj, "session_id");
            let case_id = text_field(&obj, "case_id");
            let (key, list) = if let Some(list) = obj.remove("log") {
                ("log", list)
            } else if let Some(list) = obj.remove("actions") {
                ("actions", list)
            } else {
                return Err(ScriptError::Shape {
                    path: "$".into(),
                    message: "expected a 'log' or 'actions' array".into(),
                });
            };
            let Value::Array(items) = list else {
                return Err(ScriptError::Shape {
                    path: format!("$.{key}"),
                    message: "expected an array".into(),
                });
            };
            (session_id, case_id, items, key)
        }
        _ => {
            return Err(ScriptError::Shape {
                path: "$".into(),
                message: "expected an object or an array".into(),
            })
        }
    };

    let prefix = if list_key.is_empty() { "$".to_owned() } else { format!("$.{list_key}") };
    let mut actions = Vec::with_capacity(items.len());
    for (i, item) in items.into_iter().enumerate() {
        let path = format!("{prefix}[{i}]");
        let action = match item {
            Value::Object(mut obj) if obj.contains_key("action") && !obj.contains_key("kind") => {
                action_at(obj.remove("action").unwrap_or(Value::Null), format!("{path}.action"))?
            }
            other => action_at(other, path)?,
        };
        if action.kind().is_student() {
            actions.push(action);
        }
    }
    Ok(ActionScript {
        session_id,
        case_id,
        actions,
    })
}

/// Re-run `actions` against `case` in a fresh session with the given id.
/// With the deterministic script backend the resulting log matches the
/// original entry for entry, timing aside.
pub fn replay(
    session_id: impl Into<String>,
    case: Arc<ClinicalCase>,
    backend: Arc<dyn DialogueBackend>,
    actions: &[StudentAction],
) -> Result<Session, SupervisorError> {
    let mut session = Session::start(session_id, case, backend)?;
    for action in actions {
        session.route_action(action.clone())?;
    }
    Ok(session)
}
