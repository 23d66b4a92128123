//! Wire types shared by the HTTP service and its clients.

use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::Json;
use clinsim_core::case_model::{Demographics, RubricCategory, TestModality};
use clinsim_core::supervisor::{Progress, SupervisorError};
use clinsim_core::{ClinicalCase, SessionState};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

/// Every response body: `{"ok": true, "data": ...}` or
/// `{"ok": false, "error": {"code", "message", "details"}}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WireEnvelope<T> {
    pub ok: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub data: Option<T>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<WireError>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WireError {
    pub code: String,
    pub message: String,
    #[serde(default, skip_serializing_if = "Value::is_null")]
    pub details: Value,
}

impl<T> WireEnvelope<T> {
    pub fn success(data: T) -> Self {
        Self {
            ok: true,
            data: Some(data),
            error: None,
        }
    }

    pub fn failure(error: WireError) -> Self {
        Self {
            ok: false,
            data: None,
            error: Some(error),
        }
    }

    /// `Ok(data)` or `Err(error)`; a malformed envelope (both or neither
    /// present, or `ok` disagreeing) is an error.
    pub fn into_result(self) -> Result<T, WireError> {
        match (self.ok, self.data, self.error) {
            (true, Some(data), None) => Ok(data),
            (false, None, Some(error)) => Err(error),
            _ => Err(WireError {
                code: "malformed_envelope".into(),
                message: "envelope must carry exactly one of data and error".into(),
                details: Value::Null,
            }),
        }
    }
}

/// An error response: HTTP status plus the machine code the UI keys on.
#[derive(Debug, Clone, PartialEq)]
pub struct ApiError {
    pub status: StatusCode,
    pub error: WireError,
}

impl ApiError {
    pub fn new(status: StatusCode, code: &str, message: impl Into<String>) -> Self {
        Self {
            status,
            error: WireError {
                code: code.to_owned(),
                message: message.into(),
                details: Value::Null,
            },
        }
    }

    pub fn with_details(mut self, details: Value) -> Self {
        self.error.details = details;
        self
    }

    pub fn unknown_session(session_id: &str) -> Self {
        Self::new(StatusCode::NOT_FOUND, "unknown_session", format!("no session '{session_id}'"))
    }

    pub fn unknown_case(case_id: &str) -> Self {
        Self::new(StatusCode::NOT_FOUND, "unknown_case", format!("no case '{case_id}'"))
    }

    pub fn internal(message: impl Into<String>) -> Self {
        Self::new(StatusCode::INTERNAL_SERVER_ERROR, "internal", message)
    }
}

impl From<SupervisorError> for ApiError {
    fn from(err: SupervisorError) -> Self {
        let message = err.to_string();
        match err {
            SupervisorError::UnknownCase(id) => Self::unknown_case(&id),
            SupervisorError::InvalidCase(diags) => {
                Self::new(StatusCode::UNPROCESSABLE_ENTITY, "invalid_case", message).with_details(json!(diags))
            }
            SupervisorError::SessionNotActive { state, .. } => {
                Self::new(StatusCode::CONFLICT, "session_not_active", message).with_details(json!({ "state": state }))
            }
            SupervisorError::UnknownDisease(id) => Self::new(StatusCode::UNPROCESSABLE_ENTITY, "unknown_disease", message)
                .with_details(json!({ "field": "diagnosis", "value": id })),
            SupervisorError::SystemAction(kind) => Self::new(StatusCode::UNPROCESSABLE_ENTITY, "system_action", message)
                .with_details(json!({ "field": "kind", "value": kind })),
            SupervisorError::IllegalTransition { .. } => Self::new(StatusCode::CONFLICT, "illegal_transition", message),
            SupervisorError::Evaluation(_) | SupervisorError::Agent(_) => Self::internal(message),
        }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(WireEnvelope::<()>::failure(self.error))).into_response()
    }
}

/// Catalogue entry for `GET /cases`. Never includes the hidden diagnosis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaseSummary {
    pub case_id: String,
    pub title: String,
    pub chief_complaint: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CatalogItem {
    pub id: String,
    pub label: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub modality: Option<TestModality>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RubricItemView {
    pub item_id: String,
    pub description: String,
    pub category: RubricCategory,
    pub weight: f64,
}

/// Student-facing case view: what the tabs need, nothing that gives the
/// answer away (no hidden diagnosis, evidence weights or scripts).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaseView {
    pub case_id: String,
    pub title: String,
    pub demographics: Demographics,
    pub chief_complaint: String,
    pub differential: Vec<String>,
    pub exams: Vec<CatalogItem>,
    pub tests: Vec<CatalogItem>,
    pub interventions: Vec<CatalogItem>,
    pub rubric: Vec<RubricItemView>,
}

impl From<&ClinicalCase> for CaseSummary {
    fn from(case: &ClinicalCase) -> Self {
        Self {
            case_id: case.case_id.clone(),
            title: case.title.clone(),
            chief_complaint: case.chief_complaint.clone(),
        }
    }
}

impl From<&ClinicalCase> for CaseView {
    fn from(case: &ClinicalCase) -> Self {
        Self {
            case_id: case.case_id.clone(),
            title: case.title.clone(),
            demographics: case.demographics.clone(),
            chief_complaint: case.chief_complaint.clone(),
            differential: case.differential.iter().map(|d| d.to_string()).collect(),
            exams: case
                .exam_findings
                .values()
                .map(|e| CatalogItem {
                    id: e.exam_id.to_string(),
                    label: e.label.clone(),
                    modality: None,
                })
                .collect(),
            tests: case
                .test_catalog
                .values()
                .map(|t| CatalogItem {
                    id: t.test_id.to_string(),
                    label: t.label.clone(),
                    modality: Some(t.modality),
                })
                .collect(),
            interventions: case
                .intervention_protocol
                .iter()
                .map(|i| CatalogItem {
                    id: i.intervention_id.to_string(),
                    label: i.label.clone(),
                    modality: None,
                })
                .collect(),
            rubric: case
                .rubric
                .iter()
                .map(|r| RubricItemView {
                    item_id: r.item_id.clone(),
                    description: r.description.clone(),
                    category: r.category,
                    weight: r.weight,
                })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CreateSessionRequest {
    pub case_id: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConcludeRequest {
    pub diagnosis: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionView {
    pub session_id: String,
    pub case_id: String,
    pub state: SessionState,
    pub last_seq: u64,
    pub progress: Progress,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogPage {
    pub session_id: String,
    pub since: u64,
    pub last_seq: u64,
    pub state: SessionState,
    pub entries: Vec<clinsim_core::supervisor::LogEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExplanationItem {
    pub seq: u64,
    pub explanation: clinsim_core::ExplanationRecord,
}
