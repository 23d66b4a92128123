use serde::{Deserialize, Serialize};

use super::action::{ActionKind, LogEntry};
use crate::case_model::ClinicalCase;
use crate::clinical_agents::ObservationSet;

/// Suggested next phase, following history → exam → tests → intervention →
/// conclusion.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PhaseHint {
    History,
    Examination,
    Testing,
    Intervention,
    Conclude,
}

impl PhaseHint {
    pub fn as_str(self) -> &'static str {
        match self {
            PhaseHint::History => "history",
            PhaseHint::Examination => "examination",
            PhaseHint::Testing => "testing",
            PhaseHint::Intervention => "intervention",
            PhaseHint::Conclude => "conclude",
        }
    }

    fn advice(self) -> &'static str {
        match self {
            PhaseHint::History => "take a focused history from the patient",
            PhaseHint::Examination => "examine the patient",
            PhaseHint::Testing => "order tests that separate the remaining candidates",
            PhaseHint::Intervention => "consider initial management",
            PhaseHint::Conclude => "submit a diagnosis when you are ready",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ActionCount {
    pub kind: ActionKind,
    pub count: u32,
}

/// Case-progression summary derived from the log alone.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Progress {
    /// One count per student action kind, in routing-table order.
    pub counts: Vec<ActionCount>,
    pub findings_observed: usize,
    pub findings_total: usize,
    pub phase: PhaseHint,
}

impl Progress {
    pub fn from_log(case: &ClinicalCase, log: &[LogEntry], observations: &ObservationSet) -> Self {
        let counts: Vec<ActionCount> = ActionKind::STUDENT
            .iter()
            .map(|&kind| ActionCount {
                kind,
                count: log.iter().filter(|e| e.action.kind() == kind).count() as u32,
            })
            .collect();
        let mut progress = Progress {
            counts,
            findings_observed: observations.len(),
            findings_total: case.discoverable_findings().len(),
            phase: PhaseHint::Conclude,
        };
        progress.phase = [
            (ActionKind::AskPatient, PhaseHint::History),
            (ActionKind::RequestExam, PhaseHint::Examination),
            (ActionKind::OrderTest, PhaseHint::Testing),
            (ActionKind::Intervene, PhaseHint::Intervention),
        ]
        .into_iter()
        .find(|(kind, _)| progress.count(*kind) == 0)
        .map_or(PhaseHint::Conclude, |(_, hint)| hint);
        progress
    }

    pub fn count(&self, kind: ActionKind) -> u32 {
        self.counts.iter().find(|c| c.kind == kind).map_or(0, |c| c.count)
    }

    pub fn reason_codes(&self) -> Vec<String> {
        let mut codes: Vec<String> = self
            .counts
            .iter()
            .map(|c| format!("count:{}:{}", c.kind.as_str(), c.count))
            .collect();
        codes.push(format!("findings:{}/{}", self.findings_observed, self.findings_total));
        codes.push(format!("phase:{}", self.phase.as_str()));
        codes
    }

    pub fn summary(&self) -> String {
        format!(
            "So far: {} question(s) to the patient, {} exam(s), {} test(s), {} intervention(s). \
             Findings gathered: {} of {}. Suggested next step: {}.",
            self.count(ActionKind::AskPatient),
            self.count(ActionKind::RequestExam),
            self.count(ActionKind::OrderTest),
            self.count(ActionKind::Intervene),
            self.findings_observed,
            self.findings_total,
            self.phase.advice()
        )
    }

    pub fn narrative(&self) -> String {
        format!(
            "Summary built from the interaction log; the first phase with no actions yet is '{}'.",
            self.phase.as_str()
        )
    }
}
