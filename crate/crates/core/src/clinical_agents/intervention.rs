use serde::{Deserialize, Serialize};

use super::{AgentContext, AgentError, ObservationSet};
use crate::agent_core::{AgentId, AgentResponse, ExplanationRecord};
use crate::ids::FindingId;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum InterventionOutcome {
    Performed,
    SafetyFlag { triggered_by: Vec<FindingId> },
    NotIndicatedYet { missing: Vec<FindingId> },
}

/// Check an intervention against the protocol.
///
/// Contraindications win over indications; an intervention whose
/// indications are not all observed yet is declined with the missing
/// findings listed.
pub fn apply_intervention(
    ctx: AgentContext<'_>,
    observations: &ObservationSet,
    intervention_id: &str,
    decision_id: &str,
) -> Result<(AgentResponse, InterventionOutcome), AgentError> {
    let case = ctx.case;
    let rule = case
        .intervention(intervention_id)
        .ok_or_else(|| AgentError::UnknownIntervention(intervention_id.to_owned()))?;
    let rule_id = format!("protocol:{}", rule.intervention_id);

    let contra: Vec<FindingId> = rule
        .contraindicated_if
        .iter()
        .filter(|f| observations.contains(f.as_str()))
        .cloned()
        .collect();
    let missing: Vec<FindingId> = rule
        .indicated_if
        .iter()
        .filter(|f| !observations.contains(f.as_str()))
        .cloned()
        .collect();

    let builder = ExplanationRecord::builder(decision_id, AgentId::Intervention);
    let (content, builder, outcome) = if !contra.is_empty() {
        (
            format!(
                "Safety concern: {} was not given (reason code {}).",
                rule.label, rule.reason_code
            ),
            builder
                .reason("safety_flag")
                .reason(rule.reason_code.clone())
                .reasons(contra.iter().map(|f| format!("contraindicated_by:{f}")))
                .rule(format!("{rule_id}:contraindication"))
                .narrative(format!(
                    "The protocol lists {} observed finding(s) as contraindications, so the outcome is withheld.",
                    contra.len()
                )),
            InterventionOutcome::SafetyFlag { triggered_by: contra },
        )
    } else if missing.is_empty() {
        (
            rule.outcome_text.clone(),
            builder
                .reason("indicated")
                .reasons(rule.indicated_if.iter().map(|f| format!("indication_met:{f}")))
                .rule(rule_id)
                .narrative(format!(
                    "All {} indication(s) in the protocol are observed and no contraindication is present.",
                    rule.indicated_if.len()
                )),
            InterventionOutcome::Performed,
        )
    } else {
        (
            format!("{} is not indicated yet.", rule.label),
            builder
                .reason("not_indicated_yet")
                .reasons(missing.iter().map(|f| format!("missing_finding:{f}")))
                .rule(rule_id)
                .narrative(format!(
                    "{} of {} indication(s) have not been established yet.",
                    missing.len(),
                    rule.indicated_if.len()
                )),
            InterventionOutcome::NotIndicatedYet { missing },
        )
    };
    let response = AgentResponse::new(content, Vec::new(), builder.build()?, &case.forbidden_terms);
    Ok((response, outcome))
}
