//! Educator dashboard: one row per log entry with its explanation
//! summary, plus the session's current score when available.

use chrono::{DateTime, Utc};
use clinsim_core::supervisor::{ActionKind, LogEntry, Progress};
use clinsim_core::{AgentId, Session, SessionState};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DashboardRow {
    pub seq: u64,
    pub decision_id: String,
    pub agent_id: AgentId,
    pub trigger: ActionKind,
    pub reason_codes: Vec<String>,
    pub rule_ids: Vec<String>,
    pub elapsed_ms: f64,
}

impl From<&LogEntry> for DashboardRow {
    fn from(entry: &LogEntry) -> Self {
        let explanation = entry.response.explanation();
        Self {
            seq: entry.seq,
            decision_id: explanation.decision_id().to_owned(),
            agent_id: explanation.agent_id(),
            trigger: entry.action.kind(),
            reason_codes: explanation.reason_codes().to_vec(),
            rule_ids: explanation.rule_ids().to_vec(),
            elapsed_ms: explanation.elapsed_ms(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DashboardView {
    pub session_id: String,
    pub case_id: String,
    pub state: SessionState,
    pub started_at: DateTime<Utc>,
    pub ended_at: Option<DateTime<Utc>>,
    pub progress: Progress,
    pub total_score: Option<f64>,
    pub rows: Vec<DashboardRow>,
}

impl From<&Session> for DashboardView {
    fn from(session: &Session) -> Self {
        Self {
            session_id: session.session_id().to_owned(),
            case_id: session.case().case_id.clone(),
            state: session.state(),
            started_at: session.started_at(),
            ended_at: session.ended_at(),
            progress: session.progress(),
            total_score: session.report().map(|r| r.total_score),
            rows: session.log().iter().map(DashboardRow::from).collect(),
        }
    }
}
