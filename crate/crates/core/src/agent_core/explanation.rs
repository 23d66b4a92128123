use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::guard::{guard_disclosure, GuardResult};
use super::persona::AgentId;
use crate::ids::FindingId;

/// Reason code appended when the disclosure guard rewrote a response.
pub const REDACTED_REASON: &str = "disclosure_redacted";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExplanationKind {
    InteractionHistory,
    Procedural,
    TestUtility,
    GuidelineRationale,
    RubricBased,
    ScenarioFlow,
}

impl ExplanationKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ExplanationKind::InteractionHistory => "interaction_history",
            ExplanationKind::Procedural => "procedural",
            ExplanationKind::TestUtility => "test_utility",
            ExplanationKind::GuidelineRationale => "guideline_rationale",
            ExplanationKind::RubricBased => "rubric_based",
            ExplanationKind::ScenarioFlow => "scenario_flow",
        }
    }
}

/// A signed feature weight, the unit of a feature-importance display.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Contribution {
    pub feature: String,
    pub weight: f64,
}

impl Contribution {
    pub fn new(feature: impl Into<String>, weight: f64) -> Self {
        Self {
            feature: feature.into(),
            weight,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ExplanationError {
    #[error("explanation {0} has no reason codes, contributions or rule ids")]
    Empty(String),
    #[error("explanation {0} has a negative or non-finite elapsed time")]
    InvalidElapsed(String),
    #[error("agent {agent} cannot produce {kind} explanations")]
    KindMismatch { agent: &'static str, kind: &'static str },
    #[error("explanation decision id must be non-empty")]
    MissingDecisionId,
}

/// Structured justification of one agent decision.
///
/// Always has at least one reason code, contribution or rule id, and its
/// kind is the one the owning agent's persona declares. Both are checked on
/// construction and on deserialization.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawExplanation")]
pub struct ExplanationRecord {
    decision_id: String,
    agent_id: AgentId,
    kind: ExplanationKind,
    reason_codes: Vec<String>,
    contributions: Vec<Contribution>,
    rule_ids: Vec<String>,
    narrative: String,
    /// Wall-clock milliseconds spent producing the decision.
    #[serde(rename = "elapsed")]
    elapsed_ms: f64,
}

#[derive(Deserialize)]
struct RawExplanation {
    decision_id: String,
    agent_id: AgentId,
    kind: ExplanationKind,
    #[serde(default)]
    reason_codes: Vec<String>,
    #[serde(default)]
    contributions: Vec<Contribution>,
    #[serde(default)]
    rule_ids: Vec<String>,
    #[serde(default)]
    narrative: String,
    elapsed: f64,
}

impl TryFrom<RawExplanation> for ExplanationRecord {
    type Error = ExplanationError;

    fn try_from(raw: RawExplanation) -> Result<Self, Self::Error> {
        let record = ExplanationRecord {
            decision_id: raw.decision_id,
            agent_id: raw.agent_id,
            kind: raw.kind,
            reason_codes: raw.reason_codes,
            contributions: raw.contributions,
            rule_ids: raw.rule_ids,
            narrative: raw.narrative,
            elapsed_ms: raw.elapsed,
        };
        record.check()?;
        Ok(record)
    }
}

impl ExplanationRecord {
    pub fn builder(decision_id: impl Into<String>, agent_id: AgentId) -> ExplanationBuilder {
        ExplanationBuilder {
            record: ExplanationRecord {
                decision_id: decision_id.into(),
                agent_id,
                kind: agent_id.explanation_kind(),
                reason_codes: Vec::new(),
                contributions: Vec::new(),
                rule_ids: Vec::new(),
                narrative: String::new(),
                elapsed_ms: 0.0,
            },
        }
    }

    fn check(&self) -> Result<(), ExplanationError> {
        if self.decision_id.is_empty() {
            return Err(ExplanationError::MissingDecisionId);
        }
        if self.reason_codes.is_empty() && self.contributions.is_empty() && self.rule_ids.is_empty() {
            return Err(ExplanationError::Empty(self.decision_id.clone()));
        }
        if !(self.elapsed_ms.is_finite() && self.elapsed_ms >= 0.0) {
            return Err(ExplanationError::InvalidElapsed(self.decision_id.clone()));
        }
        if !self.agent_id.explainability_profile().contains(&self.kind) {
            return Err(ExplanationError::KindMismatch {
                agent: self.agent_id.as_str(),
                kind: self.kind.as_str(),
            });
        }
        Ok(())
    }

    pub fn decision_id(&self) -> &str {
        &self.decision_id
    }

    pub fn agent_id(&self) -> AgentId {
        self.agent_id
    }

    pub fn kind(&self) -> ExplanationKind {
        self.kind
    }

    pub fn reason_codes(&self) -> &[String] {
        &self.reason_codes
    }

    pub fn contributions(&self) -> &[Contribution] {
        &self.contributions
    }

    pub fn rule_ids(&self) -> &[String] {
        &self.rule_ids
    }

    pub fn narrative(&self) -> &str {
        &self.narrative
    }

    pub fn elapsed_ms(&self) -> f64 {
        self.elapsed_ms
    }

    pub fn has_reason(&self, code: &str) -> bool {
        self.reason_codes.iter().any(|r| r == code)
    }

    /// Stamp the measured decision time. Negative or non-finite values are
    /// clamped to zero.
    pub fn with_elapsed_ms(mut self, elapsed_ms: f64) -> Self {
        self.elapsed_ms = if elapsed_ms.is_finite() { elapsed_ms.max(0.0) } else { 0.0 };
        self
    }

    /// Copy with timing zeroed, for replay comparisons.
    pub fn without_timing(&self) -> Self {
        Self {
            elapsed_ms: 0.0,
            ..self.clone()
        }
    }
}

pub struct ExplanationBuilder {
    record: ExplanationRecord,
}

impl ExplanationBuilder {
    pub fn reason(mut self, code: impl Into<String>) -> Self {
        self.record.reason_codes.push(code.into());
        self
    }

    pub fn reasons<I, S>(mut self, codes: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        self.record.reason_codes.extend(codes.into_iter().map(Into::into));
        self
    }

    pub fn contribution(mut self, feature: impl Into<String>, weight: f64) -> Self {
        self.record.contributions.push(Contribution::new(feature, weight));
        self
    }

    pub fn contributions(mut self, items: impl IntoIterator<Item = Contribution>) -> Self {
        self.record.contributions.extend(items);
        self
    }

    pub fn rule(mut self, rule_id: impl Into<String>) -> Self {
        self.record.rule_ids.push(rule_id.into());
        self
    }

    pub fn rules<I, S>(mut self, rule_ids: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        self.record.rule_ids.extend(rule_ids.into_iter().map(Into::into));
        self
    }

    pub fn narrative(mut self, text: impl Into<String>) -> Self {
        self.record.narrative = text.into();
        self
    }

    pub fn build(self) -> Result<ExplanationRecord, ExplanationError> {
        self.record.check()?;
        Ok(self.record)
    }
}

/// What an agent hands back for one decision. There is no way to build one
/// without an explanation, and the content and narrative have always been
/// through the disclosure guard.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgentResponse {
    agent_id: AgentId,
    content: String,
    revealed_findings: Vec<FindingId>,
    explanation: ExplanationRecord,
}

impl AgentResponse {
    /// Build a response, redacting `forbidden_terms` from the content and
    /// the explanation narrative. A redaction is recorded as the
    /// [`REDACTED_REASON`] reason code.
    pub fn new(
        content: impl Into<String>,
        revealed_findings: Vec<FindingId>,
        mut explanation: ExplanationRecord,
        forbidden_terms: &[String],
    ) -> Self {
        let content = content.into();
        let mut redacted = false;
        let content = match guard_disclosure(&content, forbidden_terms) {
            GuardResult::Pass => content,
            GuardResult::Redacted { text, .. } => {
                redacted = true;
                text
            }
        };
        if let GuardResult::Redacted { text, .. } = guard_disclosure(&explanation.narrative, forbidden_terms) {
            redacted = true;
            explanation.narrative = text;
        }
        if redacted && !explanation.has_reason(REDACTED_REASON) {
            explanation.reason_codes.push(REDACTED_REASON.to_owned());
        }
        Self {
            agent_id: explanation.agent_id,
            content,
            revealed_findings,
            explanation,
        }
    }

    pub fn agent_id(&self) -> AgentId {
        self.agent_id
    }

    pub fn content(&self) -> &str {
        &self.content
    }

    pub fn revealed_findings(&self) -> &[FindingId] {
        &self.revealed_findings
    }

    pub fn explanation(&self) -> &ExplanationRecord {
        &self.explanation
    }

    pub fn with_elapsed_ms(mut self, elapsed_ms: f64) -> Self {
        self.explanation = self.explanation.with_elapsed_ms(elapsed_ms);
        self
    }

    pub fn without_timing(&self) -> Self {
        Self {
            explanation: self.explanation.without_timing(),
            ..self.clone()
        }
    }
}
