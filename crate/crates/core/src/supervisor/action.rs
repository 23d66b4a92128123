use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use crate::agent_core::{AgentId, AgentResponse};
use crate::ids::{DiseaseId, ExamId, InterventionId, TestId};

/// Tag of an [`Action`] variant; the routing table is keyed on it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ActionKind {
    StartCase,
    AskPatient,
    RequestExam,
    OrderTest,
    Intervene,
    AskSupervisor,
    RequestExplanation,
    EndCase,
    Evaluate,
}

impl ActionKind {
    pub const ALL: [ActionKind; 9] = [
        ActionKind::StartCase,
        ActionKind::AskPatient,
        ActionKind::RequestExam,
        ActionKind::OrderTest,
        ActionKind::Intervene,
        ActionKind::AskSupervisor,
        ActionKind::RequestExplanation,
        ActionKind::EndCase,
        ActionKind::Evaluate,
    ];

    /// Kinds a student may issue. `start_case` and `evaluate` are recorded
    /// by the supervisor itself.
    pub const STUDENT: [ActionKind; 7] = [
        ActionKind::AskPatient,
        ActionKind::RequestExam,
        ActionKind::OrderTest,
        ActionKind::Intervene,
        ActionKind::AskSupervisor,
        ActionKind::RequestExplanation,
        ActionKind::EndCase,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ActionKind::StartCase => "start_case",
            ActionKind::AskPatient => "ask_patient",
            ActionKind::RequestExam => "request_exam",
            ActionKind::OrderTest => "order_test",
            ActionKind::Intervene => "intervene",
            ActionKind::AskSupervisor => "ask_supervisor",
            ActionKind::RequestExplanation => "request_explanation",
            ActionKind::EndCase => "end_case",
            ActionKind::Evaluate => "evaluate",
        }
    }

    pub fn is_student(self) -> bool {
        !matches!(self, ActionKind::StartCase | ActionKind::Evaluate)
    }

    /// The agent this kind always routes to. `None` for
    /// `request_explanation`, which names its agent.
    pub fn fixed_route(self) -> Option<AgentId> {
        Some(match self {
            ActionKind::StartCase | ActionKind::AskSupervisor => AgentId::Supervisor,
            ActionKind::AskPatient => AgentId::Patient,
            ActionKind::RequestExam => AgentId::PhysicalExam,
            ActionKind::OrderTest => AgentId::Diagnostic,
            ActionKind::Intervene => AgentId::Intervention,
            ActionKind::EndCase | ActionKind::Evaluate => AgentId::Evaluation,
            ActionKind::RequestExplanation => return None,
        })
    }

    /// Whether an action of this kind can activate `agent`.
    pub fn triggers(self, agent: AgentId) -> bool {
        self.fixed_route().is_none_or(|a| a == agent)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExplanationTarget {
    pub agent: AgentId,
    /// Disease id (diagnostic), rubric item id (evaluation) or decision id
    /// (other agents). Optional.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub subject: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Action {
    StartCase { case_id: String },
    AskPatient { text: String },
    RequestExam { exam_id: ExamId },
    OrderTest { test_id: TestId },
    Intervene { intervention_id: InterventionId },
    AskSupervisor { text: String },
    RequestExplanation { target: ExplanationTarget },
    EndCase { diagnosis: DiseaseId },
    Evaluate,
}

impl Action {
    pub fn kind(&self) -> ActionKind {
        match self {
            Action::StartCase { .. } => ActionKind::StartCase,
            Action::AskPatient { .. } => ActionKind::AskPatient,
            Action::RequestExam { .. } => ActionKind::RequestExam,
            Action::OrderTest { .. } => ActionKind::OrderTest,
            Action::Intervene { .. } => ActionKind::Intervene,
            Action::AskSupervisor { .. } => ActionKind::AskSupervisor,
            Action::RequestExplanation { .. } => ActionKind::RequestExplanation,
            Action::EndCase { .. } => ActionKind::EndCase,
            Action::Evaluate => ActionKind::Evaluate,
        }
    }

    /// The id or text the action is about, used by rubric matchers.
    pub fn target(&self) -> Option<&str> {
        match self {
            Action::StartCase { case_id } => Some(case_id),
            Action::AskPatient { text } | Action::AskSupervisor { text } => Some(text),
            Action::RequestExam { exam_id } => Some(exam_id.as_str()),
            Action::OrderTest { test_id } => Some(test_id.as_str()),
            Action::Intervene { intervention_id } => Some(intervention_id.as_str()),
            Action::RequestExplanation { target } => Some(target.agent.as_str()),
            Action::EndCase { diagnosis } => Some(diagnosis.as_str()),
            Action::Evaluate => None,
        }
    }
}

/// One action with its issue time. On the wire the action fields are
/// inlined: `{"kind": "order_test", "test_id": "troponin", "issued_at": ...}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StudentAction {
    #[serde(flatten)]
    pub action: Action,
    #[serde(default = "Utc::now")]
    pub issued_at: DateTime<Utc>,
}

impl StudentAction {
    pub fn now(action: Action) -> Self {
        Self {
            action,
            issued_at: Utc::now(),
        }
    }

    pub fn kind(&self) -> ActionKind {
        self.action.kind()
    }

    pub fn ask_patient(text: impl Into<String>) -> Self {
        Self::now(Action::AskPatient { text: text.into() })
    }

    pub fn request_exam(exam_id: &str) -> Self {
        Self::now(Action::RequestExam { exam_id: exam_id.into() })
    }

    pub fn order_test(test_id: &str) -> Self {
        Self::now(Action::OrderTest { test_id: test_id.into() })
    }

    pub fn intervene(intervention_id: &str) -> Self {
        Self::now(Action::Intervene {
            intervention_id: intervention_id.into(),
        })
    }

    pub fn ask_supervisor(text: impl Into<String>) -> Self {
        Self::now(Action::AskSupervisor { text: text.into() })
    }

    pub fn request_explanation(agent: AgentId, subject: Option<&str>) -> Self {
        Self::now(Action::RequestExplanation {
            target: ExplanationTarget {
                agent,
                subject: subject.map(str::to_owned),
            },
        })
    }

    pub fn end_case(diagnosis: &str) -> Self {
        Self::now(Action::EndCase {
            diagnosis: diagnosis.into(),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RouteDecision {
    /// Sequence number of the routed action.
    pub action_seq: u64,
    pub routed_to: AgentId,
    pub reason: String,
    pub rule_id: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogEntry {
    pub seq: u64,
    pub action: StudentAction,
    pub route: RouteDecision,
    pub response: AgentResponse,
}

impl LogEntry {
    pub fn decision_id(&self) -> &str {
        self.response.explanation().decision_id()
    }

    /// Copy with wall-clock fields (issue time, elapsed) zeroed.
    pub fn without_timing(&self) -> Self {
        let mut entry = self.clone();
        entry.action.issued_at = DateTime::<Utc>::UNIX_EPOCH;
        entry.response = entry.response.without_timing();
        entry
    }
}
