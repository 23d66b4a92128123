//! Rubric scoring of an interaction log and the feedback report.

mod matcher;
mod report;

pub use matcher::EventMatcher;
pub use report::{
    explain_evaluation, score_transcript, Direction, EvaluationError, EventOutcome, FeedbackReport, ItemScore, KeyFactor,
    KEY_FACTOR_COUNT,
};
