use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::matcher::EventMatcher;
use crate::agent_core::{guard_disclosure, AgentId, ExplanationError, ExplanationRecord};
use crate::case_model::ClinicalCase;
use crate::supervisor::{decision_id_for, LogEntry};

/// Strengths and improvements listed per report.
pub const KEY_FACTOR_COUNT: usize = 3;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvaluationError {
    #[error("unknown rubric item '{0}'")]
    UnknownItem(String),
    #[error("rubric has no items or no positive total weight")]
    EmptyRubric,
    #[error(transparent)]
    Explanation(#[from] ExplanationError),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EventOutcome {
    pub matcher: EventMatcher,
    /// First log entry satisfying the matcher.
    pub matched_seq: Option<u64>,
    pub decision_id: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ItemScore {
    pub item_id: String,
    pub satisfied: u32,
    pub required: u32,
    pub fraction: f64,
    pub weighted_points: f64,
    pub events: Vec<EventOutcome>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    Strength,
    Improvement,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct KeyFactor {
    pub item_id: String,
    pub direction: Direction,
    /// Decision ids of the log entries that satisfied the item's events.
    pub evidence: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeedbackReport {
    pub session_id: String,
    pub item_scores: Vec<ItemScore>,
    pub total_score: f64,
    pub key_factors: Vec<KeyFactor>,
    pub narrative: String,
    pub explanation: ExplanationRecord,
}

impl FeedbackReport {
    pub fn item(&self, item_id: &str) -> Option<&ItemScore> {
        self.item_scores.iter().find(|s| s.item_id == item_id)
    }
}

fn item_evidence(score: &ItemScore) -> Vec<String> {
    let mut ids: Vec<String> = Vec::new();
    for id in score.events.iter().filter_map(|e| e.decision_id.clone()) {
        if !ids.contains(&id) {
            ids.push(id);
        }
    }
    ids
}

/// Score `log` against the case rubric.
///
/// Each item earns `matched events / required events` of its weight; the
/// total is the weight-normalised sum. Pure: equal inputs serialize to
/// identical bytes.
pub fn score_transcript(
    case: &ClinicalCase,
    session_id: &str,
    log: &[LogEntry],
) -> Result<FeedbackReport, EvaluationError> {
    let total_weight: f64 = case.rubric.iter().fold(0.0, |acc, item| acc + item.weight);
    if case.rubric.is_empty() || total_weight.partial_cmp(&0.0) != Some(std::cmp::Ordering::Greater) {
        return Err(EvaluationError::EmptyRubric);
    }

    let item_scores: Vec<ItemScore> = case
        .rubric
        .iter()
        .map(|item| {
            let events: Vec<EventOutcome> = item
                .required_events
                .iter()
                .map(|matcher| {
                    let hit = log.iter().find(|entry| matcher.matches(entry));
                    EventOutcome {
                        matcher: matcher.clone(),
                        matched_seq: hit.map(|e| e.seq),
                        decision_id: hit.map(|e| e.decision_id().to_owned()),
                    }
                })
                .collect();
            let required = events.len() as u32;
            let satisfied = events.iter().filter(|e| e.matched_seq.is_some()).count() as u32;
            let fraction = if required == 0 {
                0.0
            } else {
                f64::from(satisfied) / f64::from(required)
            };
            ItemScore {
                item_id: item.item_id.clone(),
                satisfied,
                required,
                fraction,
                weighted_points: item.weight * fraction,
                events,
            }
        })
        .collect();

    let earned = item_scores.iter().fold(0.0, |acc, s| acc + s.weighted_points);
    let total_score = earned / total_weight;

    // rubric weight desc, item id asc
    let mut ranked: Vec<(&ItemScore, f64)> = item_scores
        .iter()
        .zip(&case.rubric)
        .map(|(s, item)| (s, item.weight))
        .collect();
    ranked.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.item_id.cmp(&b.0.item_id)));
    let pick = |direction: Direction| -> Vec<KeyFactor> {
        ranked
            .iter()
            .filter(|(s, _)| (s.satisfied == s.required) == (direction == Direction::Strength))
            .take(KEY_FACTOR_COUNT)
            .map(|(s, _)| KeyFactor {
                item_id: s.item_id.clone(),
                direction,
                evidence: item_evidence(s),
            })
            .collect()
    };
    let mut key_factors = pick(Direction::Strength);
    key_factors.extend(pick(Direction::Improvement));

    let interacted = log.iter().any(|e| e.action.kind().is_student());
    let describe = |dir: Direction| -> Vec<&str> {
        key_factors
            .iter()
            .filter(|k| k.direction == dir)
            .filter_map(|k| case.rubric_item(&k.item_id).map(|i| i.description.as_str()))
            .collect()
    };
    let mut narrative = format!("Overall score {:.1}%.", total_score * 100.0);
    if !interacted {
        narrative.push_str(" No student interaction was recorded, so no rubric item is met.");
    } else {
        let strengths = describe(Direction::Strength);
        let improvements = describe(Direction::Improvement);
        if !strengths.is_empty() {
            narrative.push_str(&format!(" Strengths: {}.", strengths.join("; ")));
        }
        if !improvements.is_empty() {
            narrative.push_str(&format!(" To improve: {}.", improvements.join("; ")));
        }
    }
    let narrative = guard_disclosure(&narrative, &case.forbidden_terms).into_text(&narrative);

    let next_seq = log.last().map_or(1, |e| e.seq + 1);
    let mut builder = ExplanationRecord::builder(decision_id_for(session_id, next_seq), AgentId::Evaluation);
    if !interacted {
        builder = builder.reason("no_interaction");
    }
    let explanation = builder
        .reasons(
            item_scores
                .iter()
                .map(|s| format!("item:{}:{}/{}", s.item_id, s.satisfied, s.required)),
        )
        .reasons(key_factors.iter().map(|k| {
            let dir = match k.direction {
                Direction::Strength => "strength",
                Direction::Improvement => "improvement",
            };
            format!("{dir}:{}", k.item_id)
        }))
        .contributions(
            item_scores
                .iter()
                .map(|s| crate::agent_core::Contribution::new(s.item_id.as_str(), s.weighted_points)),
        )
        .rules(item_scores.iter().map(|s| format!("rubric:{}", s.item_id)))
        .narrative(narrative.clone())
        .build()?;

    Ok(FeedbackReport {
        session_id: session_id.to_owned(),
        item_scores,
        total_score,
        key_factors,
        narrative,
        explanation,
    })
}

/// Per-item explanation: every required event, matched (with the log
/// entry that satisfied it) or missing.
pub fn explain_evaluation(report: &FeedbackReport, item_id: &str) -> Result<ExplanationRecord, EvaluationError> {
    let item = report
        .item(item_id)
        .ok_or_else(|| EvaluationError::UnknownItem(item_id.to_owned()))?;
    let decision_id = format!("{}/{}", report.explanation.decision_id(), item.item_id);
    let reasons = item.events.iter().map(|e| match (&e.decision_id, e.matched_seq) {
        (Some(id), Some(seq)) => format!("matched:{}@{id}(seq {seq})", e.matcher.describe()),
        _ => format!("missing:{}", e.matcher.describe()),
    });
    let factor = report.key_factors.iter().find(|k| k.item_id == item.item_id);
    let mut builder = ExplanationRecord::builder(decision_id, AgentId::Evaluation)
        .reason(format!("fraction:{}/{}", item.satisfied, item.required))
        .reasons(reasons)
        .contribution(item.item_id.as_str(), item.weighted_points)
        .rule(format!("rubric:{}", item.item_id));
    if let Some(k) = factor {
        builder = builder.reason(match k.direction {
            Direction::Strength => "key_factor:strength",
            Direction::Improvement => "key_factor:improvement",
        });
    }
    Ok(builder
        .narrative(format!(
            "{} of {} required event(s) found in the log, earning {:.3} point(s).",
            item.satisfied, item.required, item.weighted_points
        ))
        .build()?)
}
