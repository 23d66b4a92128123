//! Clinical case documents: types, the JSON file format and the validator.
//!
//! A case file is a single JSON object carrying `"format": 1` plus the
//! fourteen case fields. Findings (`FindingId`) are the shared vocabulary
//! joining the patient script, exam tables, test catalog, evidence links,
//! intervention protocol and rubric.

mod parse;
mod types;
mod validate;

pub use parse::{load_case, parse_case, serialize_case, CaseError, ParseError, CASE_FORMAT_VERSION, CASE_KEYS};
pub use types::*;
pub use validate::validate_case;
