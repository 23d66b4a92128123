use super::{AgentContext, AgentError, ObservationSet};
use crate::agent_core::{AgentId, AgentResponse, ExplanationRecord};

/// Perform a physical exam and report its findings (and vitals, if any).
pub fn exam_perform(
    ctx: AgentContext<'_>,
    observations: &mut ObservationSet,
    exam_id: &str,
    decision_id: &str,
) -> Result<AgentResponse, AgentError> {
    let case = ctx.case;
    let exam = case
        .exam(exam_id)
        .ok_or_else(|| AgentError::UnknownExam(exam_id.to_owned()))?;

    let mut content = format!("{}: {}", exam.label, exam.result_text);
    let vitals: Vec<String> = exam
        .vitals
        .iter()
        .flatten()
        .map(|(name, v)| format!("{name} {} {}", v.value, v.unit))
        .collect();
    if !vitals.is_empty() {
        content.push_str(&format!("\nVitals: {}", vitals.join("; ")));
    }

    observations.observe_all(&exam.finding_ids, decision_id);

    let explanation = ExplanationRecord::builder(decision_id, AgentId::PhysicalExam)
        .reason(format!("exam:{}", exam.exam_id))
        .reasons(exam.finding_ids.iter().map(|f| format!("covered:{f}")))
        .reasons(exam.vitals.iter().flatten().map(|(name, _)| format!("vital:{name}")))
        .rule(format!("exam_table:{}", exam.exam_id))
        .narrative(format!(
            "Performed {}; it covered {} finding(s) and {} vital sign(s).",
            exam.label.to_lowercase(),
            exam.finding_ids.len(),
            vitals.len()
        ))
        .build()?;
    Ok(AgentResponse::new(
        content,
        exam.finding_ids.clone(),
        explanation,
        &case.forbidden_terms,
    ))
}
