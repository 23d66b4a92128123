use serde_json::Value;
use thiserror::Error;

use super::types::ClinicalCase;
use super::validate::{check, validate_case, Issue, LEAK};
use crate::diagnostics::Diagnostic;

pub const CASE_FORMAT_VERSION: u64 = 1;

/// Top-level keys of a case document besides `format`.
pub const CASE_KEYS: [&str; 14] = [
    "case_id",
    "title",
    "demographics",
    "chief_complaint",
    "hidden_diagnosis",
    "differential",
    "symptom_script",
    "exam_findings",
    "test_catalog",
    "evidence_links",
    "intervention_protocol",
    "rubric",
    "forbidden_terms",
    "rule_out_threshold",
];

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParseError {
    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("unsupported case format: {0}")]
    Format(String),
    #[error("{path}: {message}")]
    Schema { path: String, message: String },
    #[error("{path}: {message}")]
    Invalid { path: String, message: String },
}

impl ParseError {
    pub fn message(&self) -> String {
        match self {
            ParseError::Syntax { message, .. } | ParseError::Format(message) => message.clone(),
            ParseError::Schema { message, .. } | ParseError::Invalid { message, .. } => message.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CaseError {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("{path}: unknown id '{id}'")]
    Reference { path: String, id: String },
    #[error("case has {} validation error(s)", .0.len())]
    Invalid(Vec<Diagnostic>),
}

/// Parse a case document, resolving every cross-reference.
///
/// Syntax, schema and structural problems yield [`CaseError::Parse`]; the
/// first dangling id yields [`CaseError::Reference`]. Disclosure leaks are
/// left to [`validate_case`] / [`load_case`].
pub fn parse_case(source: &str) -> Result<ClinicalCase, CaseError> {
    let mut value: Value = serde_json::from_str(source).map_err(|e| ParseError::Syntax {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;

    let Some(obj) = value.as_object_mut() else {
        return Err(schema("$", "case document must be a JSON object").into());
    };
    match obj.remove("format") {
        None => return Err(ParseError::Format("missing \"format\" field".into()).into()),
        Some(Value::Number(n)) if n.as_u64() == Some(CASE_FORMAT_VERSION) => {}
        Some(other) => return Err(ParseError::Format(format!("unknown format {other}")).into()),
    }
    if let Some(key) = obj.keys().find(|k| !CASE_KEYS.contains(&k.as_str())) {
        return Err(schema(key, "unknown top-level key").into());
    }
    if let Some(key) = CASE_KEYS.iter().find(|k| !obj.contains_key(**k)) {
        return Err(schema(key, "missing top-level key").into());
    }

    let mut case: ClinicalCase = serde_path_to_error::deserialize(value).map_err(|e| {
        let path = e.path().to_string();
        schema(&path, &e.into_inner().to_string())
    })?;
    normalize_forbidden_terms(&mut case);

    let first = check(&case)
        .into_iter()
        .find(|i| i.diagnostic.is_error() && i.diagnostic.code != LEAK);
    match first {
        None => Ok(case),
        Some(Issue {
            diagnostic,
            dangling_id: Some(id),
        }) => Err(CaseError::Reference {
            path: diagnostic.path,
            id,
        }),
        Some(Issue { diagnostic, .. }) => Err(ParseError::Invalid {
            path: diagnostic.path,
            message: diagnostic.message,
        }
        .into()),
    }
}

/// [`parse_case`] followed by the full validator; any error diagnostic
/// (including disclosure leaks) rejects the case.
pub fn load_case(source: &str) -> Result<ClinicalCase, CaseError> {
    let case = parse_case(source)?;
    let errors: Vec<_> = validate_case(&case).into_iter().filter(Diagnostic::is_error).collect();
    if errors.is_empty() {
        Ok(case)
    } else {
        Err(CaseError::Invalid(errors))
    }
}

/// Serialize a case back into the file format (pretty-printed, stable key order).
pub fn serialize_case(case: &ClinicalCase) -> String {
    let mut value = serde_json::to_value(case).expect("case serializes to JSON");
    if let Some(obj) = value.as_object_mut() {
        obj.insert("format".into(), Value::from(CASE_FORMAT_VERSION));
    }
    serde_json::to_string_pretty(&value).expect("JSON value prints")
}

fn schema(path: &str, message: &str) -> ParseError {
    ParseError::Schema {
        path: path.to_owned(),
        message: message.to_owned(),
    }
}

/// Lowercase, deduplicate, and make sure the hidden diagnosis name is listed.
fn normalize_forbidden_terms(case: &mut ClinicalCase) {
    let mut terms: Vec<String> = Vec::with_capacity(case.forbidden_terms.len() + 1);
    let display = case.hidden_diagnosis.display_name();
    for term in case.forbidden_terms.iter().map(|t| t.trim().to_lowercase()).chain([display]) {
        if !term.is_empty() && !terms.contains(&term) {
            terms.push(term);
        }
    }
    case.forbidden_terms = terms;
}
