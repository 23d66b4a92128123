//! Test ordering and additive evidence scoring over the differential.
//!
//! `score(d) = Σ weight(d, f)` over the observed findings `f` that have an
//! evidence link to `d`. With log-likelihood-ratio weights the ranking is
//! the naive-Bayes posterior ranking under a uniform prior.

use std::cmp::Ordering;
use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{AgentContext, AgentError, ObservationSet};
use crate::agent_core::{AgentId, AgentResponse, ExplanationRecord};
use crate::case_model::ClinicalCase;
use crate::ids::{DiseaseId, FindingId};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DiseaseStatus {
    Candidate,
    RuledOut,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FindingContribution {
    pub finding: FindingId,
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiseaseScore {
    pub disease: DiseaseId,
    pub score: f64,
    /// In finding-id order; `score` is their left-to-right sum.
    pub contributions: Vec<FindingContribution>,
    pub status: DiseaseStatus,
}

/// Left fold from +0.0 in slice order. Both the score and any
/// reconciliation go through this so the identity is exact.
pub(crate) fn sum_weights<'a>(weights: impl IntoIterator<Item = &'a f64>) -> f64 {
    weights.into_iter().fold(0.0, |acc, w| acc + w)
}

impl DiseaseScore {
    pub fn contribution_sum(&self) -> f64 {
        sum_weights(self.contributions.iter().map(|c| &c.weight))
    }
}

fn disease_score(case: &ClinicalCase, observations: &ObservationSet, disease: &DiseaseId) -> DiseaseScore {
    let contributions: Vec<FindingContribution> = observations
        .findings()
        .iter()
        .filter_map(|f| {
            case.evidence_weight(disease.as_str(), f.as_str())
                .map(|weight| FindingContribution {
                    finding: f.clone(),
                    weight,
                })
        })
        .collect();
    let score = sum_weights(contributions.iter().map(|c| &c.weight));
    let status = if score < case.rule_out_threshold {
        DiseaseStatus::RuledOut
    } else {
        DiseaseStatus::Candidate
    };
    DiseaseScore {
        disease: disease.clone(),
        score,
        contributions,
        status,
    }
}

/// Score every disease in the differential. Sorted by score descending,
/// ties by disease id ascending.
pub fn score_evidence(case: &ClinicalCase, observations: &ObservationSet) -> Vec<DiseaseScore> {
    let mut scores: Vec<DiseaseScore> = case
        .differential
        .iter()
        .map(|d| disease_score(case, observations, d))
        .collect();
    scores.sort_by(|a, b| b.score.total_cmp(&a.score).then_with(|| a.disease.cmp(&b.disease)));
    scores
}

fn by_magnitude(a: f64, b: f64) -> Ordering {
    b.abs().total_cmp(&a.abs())
}

/// Feature-importance explanation for one disease: contributions by
/// decreasing magnitude, negative ones flagged so a rule-out can be read
/// straight off the record.
pub fn explain_diagnosis(
    case: &ClinicalCase,
    observations: &ObservationSet,
    disease: &str,
    decision_id: &str,
) -> Result<ExplanationRecord, AgentError> {
    let Some(disease) = case.differential.iter().find(|d| *d == disease) else {
        return Err(AgentError::UnknownDisease(disease.to_owned()));
    };
    let score = disease_score(case, observations, disease);
    let mut ranked = score.contributions.clone();
    ranked.sort_by(|a, b| by_magnitude(a.weight, b.weight));

    let status = match score.status {
        DiseaseStatus::RuledOut => "status:ruled_out",
        DiseaseStatus::Candidate => "status:candidate",
    };
    let mut builder = ExplanationRecord::builder(decision_id, AgentId::Diagnostic)
        .reason(status)
        .reason(format!("disease:{disease}"));
    if ranked.is_empty() {
        builder = builder.reason("no_evidence_observed");
    }
    builder = builder
        .reasons(ranked.iter().map(|c| {
            let sign = if c.weight < 0.0 { "negative" } else { "positive" };
            format!("{sign}:{}", c.finding)
        }))
        .contributions(
            ranked
                .iter()
                .map(|c| crate::agent_core::Contribution::new(c.finding.as_str(), c.weight)),
        )
        .rules(ranked.iter().map(|c| format!("evidence:{disease}:{}", c.finding)));
    if score.status == DiseaseStatus::RuledOut {
        builder = builder.rule(format!("rule_out_threshold:{}", case.rule_out_threshold));
    }

    let mut narrative = format!(
        "Evidence score {:.2} against a rule-out threshold of {:.2} ({}).",
        score.score,
        case.rule_out_threshold,
        if score.status == DiseaseStatus::RuledOut { "ruled out" } else { "still a candidate" }
    );
    let negatives: Vec<String> = ranked
        .iter()
        .filter(|c| c.weight < 0.0)
        .map(|c| format!("{} ({:+.2})", c.finding, c.weight))
        .collect();
    if !negatives.is_empty() {
        narrative.push_str(&format!(" Findings counting against it: {}.", negatives.join(", ")));
    }
    Ok(builder.narrative(narrative).build()?)
}

/// Order a test: the result is available at once, its findings join the
/// observations, and the explanation names the diseases the result bears
/// on most strongly.
pub fn order_test(
    ctx: AgentContext<'_>,
    observations: &mut ObservationSet,
    test_id: &str,
    decision_id: &str,
) -> Result<AgentResponse, AgentError> {
    let case = ctx.case;
    let test = case
        .test(test_id)
        .ok_or_else(|| AgentError::UnknownTest(test_id.to_owned()))?;

    observations.observe_all(&test.finding_ids, decision_id);

    // strongest |weight| per disease across this test's findings
    let links: Vec<_> = case
        .evidence_links
        .iter()
        .filter(|l| test.finding_ids.contains(&l.finding))
        .collect();
    let mut strongest: BTreeMap<&DiseaseId, f64> = BTreeMap::new();
    for link in &links {
        let e = strongest.entry(&link.disease).or_insert(0.0);
        *e = e.max(link.weight.abs());
    }
    let mut diseases: Vec<(&DiseaseId, f64)> = strongest.into_iter().collect();
    diseases.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(b.0)));

    let mut ranked_links = links.clone();
    ranked_links.sort_by(|a, b| {
        by_magnitude(a.weight, b.weight)
            .then_with(|| a.disease.cmp(&b.disease))
            .then_with(|| a.finding.cmp(&b.finding))
    });

    let modality = serde_json::to_value(test.modality)
        .ok()
        .and_then(|v| v.as_str().map(str::to_owned))
        .unwrap_or_default();
    let mut builder = ExplanationRecord::builder(decision_id, AgentId::Diagnostic)
        .reason(format!("test:{}", test.test_id))
        .reason(format!("modality:{modality}"))
        .reason("turnaround:immediate")
        .reasons(diseases.iter().map(|(d, _)| format!("linked_disease:{d}")))
        .contributions(
            ranked_links
                .iter()
                .map(|l| crate::agent_core::Contribution::new(format!("{}->{}", l.finding, l.disease), l.weight)),
        )
        .rules(ranked_links.iter().map(|l| format!("evidence:{}:{}", l.disease, l.finding)));
    if diseases.is_empty() {
        builder = builder.reason("no_linked_evidence");
    }
    let narrative = match diseases.first() {
        Some((_, w)) => format!(
            "Result available immediately. It carries evidence for {} diagnosis(es) in the differential; \
             the strongest link has magnitude {:.2}.",
            diseases.len(),
            w
        ),
        None => "Result available immediately. It carries no encoded evidence for the differential.".to_owned(),
    };
    let explanation = builder.narrative(narrative).build()?;

    Ok(AgentResponse::new(
        format!("{} ({modality}): {}", test.label, test.result_text),
        test.finding_ids.clone(),
        explanation,
        &case.forbidden_terms,
    ))
}
