use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::ids::{DiseaseId, FindingId};
use crate::supervisor::{Action, ActionKind, LogEntry};

/// One event a rubric item requires. Evaluable against log entries alone.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum EventMatcher {
    /// A student action of `action` kind, optionally about `target`
    /// (exam, test, intervention or disease id).
    ActionOfKind {
        action: ActionKind,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        target: Option<String>,
    },
    /// A patient question containing any of the keywords (case-insensitive).
    PatientQuestionContaining { keywords: BTreeSet<String> },
    FindingObserved { finding: FindingId },
    DiagnosisSubmitted { disease: DiseaseId },
}

impl EventMatcher {
    pub fn matches(&self, entry: &LogEntry) -> bool {
        let action = &entry.action.action;
        if !action.kind().is_student() {
            return false;
        }
        match self {
            EventMatcher::ActionOfKind { action: kind, target } => {
                action.kind() == *kind && target.as_deref().is_none_or(|t| action.target() == Some(t))
            }
            EventMatcher::PatientQuestionContaining { keywords } => match action {
                Action::AskPatient { text } => {
                    let text = text.to_lowercase();
                    keywords.iter().any(|k| !k.is_empty() && text.contains(&k.to_lowercase()))
                }
                _ => false,
            },
            EventMatcher::FindingObserved { finding } => entry.response.revealed_findings().contains(finding),
            EventMatcher::DiagnosisSubmitted { disease } => {
                matches!(action, Action::EndCase { diagnosis } if diagnosis == disease)
            }
        }
    }

    /// Short token used in reason codes, e.g. `order_test:ekg`.
    pub fn describe(&self) -> String {
        match self {
            EventMatcher::ActionOfKind { action, target: Some(t) } => format!("{}:{t}", action.as_str()),
            EventMatcher::ActionOfKind { action, target: None } => action.as_str().to_owned(),
            EventMatcher::PatientQuestionContaining { keywords } => {
                let kws: Vec<&str> = keywords.iter().map(String::as_str).collect();
                format!("question_contains:{}", kws.join("|"))
            }
            EventMatcher::FindingObserved { finding } => format!("finding:{finding}"),
            EventMatcher::DiagnosisSubmitted { disease } => format!("diagnosis:{disease}"),
        }
    }
}
