use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::{AgentContext, AgentError, ObservationSet};
use crate::agent_core::{AgentId, AgentResponse, DialogueRequest, ExplanationRecord};
use crate::case_model::{ClinicalCase, SymptomScriptEntry};

/// Reply used when no script entry shares a keyword with the question.
pub const NO_MATCH_REPLY: &str = "Sorry, I'm not sure what you mean. Could you ask me that another way?";

/// An earlier patient question in the same session.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PriorQuestion {
    pub decision_id: String,
    pub text: String,
    /// Index of the script entry the question matched, if any.
    pub entry_index: Option<usize>,
}

impl PriorQuestion {
    pub fn new(case: &ClinicalCase, decision_id: impl Into<String>, text: impl Into<String>) -> Self {
        let text = text.into();
        Self {
            decision_id: decision_id.into(),
            entry_index: match_script(case, &text).map(|m| m.index),
            text,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScriptMatch<'a> {
    pub index: usize,
    pub entry: &'a SymptomScriptEntry,
    /// Keywords of the entry found in the question, sorted.
    pub matched: Vec<String>,
}

fn tokens(text: &str) -> Vec<String> {
    text.to_lowercase()
        .split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .map(str::to_owned)
        .collect()
}

/// Entry with the largest keyword overlap with `question`; ties go to the
/// earlier entry. `None` when nothing overlaps.
///
/// Single-word keywords match whole tokens; multi-word keywords match a
/// run of consecutive tokens.
pub fn match_script<'a>(case: &'a ClinicalCase, question: &str) -> Option<ScriptMatch<'a>> {
    let toks = tokens(question);
    let token_set: BTreeSet<&str> = toks.iter().map(String::as_str).collect();
    let joined = format!(" {} ", toks.join(" "));

    let mut best: Option<ScriptMatch<'a>> = None;
    for (index, entry) in case.symptom_script.iter().enumerate() {
        let matched: Vec<String> = entry
            .keywords
            .iter()
            .filter(|kw| {
                let kw_toks = tokens(kw);
                match kw_toks.as_slice() {
                    [] => false,
                    [single] => token_set.contains(single.as_str()),
                    many => joined.contains(&format!(" {} ", many.join(" "))),
                }
            })
            .cloned()
            .collect();
        if matched.is_empty() {
            continue;
        }
        if best.as_ref().is_none_or(|b| matched.len() > b.matched.len()) {
            best = Some(ScriptMatch { index, entry, matched });
        }
    }
    best
}

/// Answer a student question in the patient's voice.
///
/// The matched entry's findings are added to `observations`. The reply
/// text comes from the dialogue backend (the script itself by default) and
/// is always passed through the disclosure guard.
pub fn patient_reply(
    ctx: AgentContext<'_>,
    observations: &mut ObservationSet,
    history: &[PriorQuestion],
    question: &str,
    decision_id: &str,
) -> Result<AgentResponse, AgentError> {
    let case = ctx.case;
    let persona = ctx.registry.get(AgentId::Patient);
    let Some(found) = match_script(case, question) else {
        let explanation = ExplanationRecord::builder(decision_id, AgentId::Patient)
            .reason("no_script_match")
            .rule("script:fallback")
            .narrative("The question did not share a keyword with any scripted patient answer.")
            .build()?;
        return Ok(AgentResponse::new(NO_MATCH_REPLY, Vec::new(), explanation, &case.forbidden_terms));
    };

    let entry = found.entry;
    let related: Vec<&PriorQuestion> = history
        .iter()
        .filter(|q| q.entry_index == Some(found.index))
        .collect();

    let context = format!(
        "{} year old {:?} patient. Chief complaint: {}",
        case.demographics.age, case.demographics.sex, case.chief_complaint
    )
    .to_lowercase();
    let request = DialogueRequest {
        persona,
        case_context: &context,
        utterance: question,
        scripted_reply: &entry.response_text,
    };
    let (content, backend_failed) = match ctx.backend.respond(&request) {
        Ok(text) if !text.trim().is_empty() => (text, false),
        _ => (entry.response_text.clone(), true),
    };

    observations.observe_all(&entry.reveals, decision_id);

    let mut narrative = format!(
        "Answered from script entry '{}' because the question mentioned: {}.",
        entry.entry_id,
        found.matched.join(", ")
    );
    if !related.is_empty() {
        narrative.push_str(&format!(" {} earlier question(s) touched the same topic.", related.len()));
    }
    let mut builder = ExplanationRecord::builder(decision_id, AgentId::Patient)
        .reasons(found.matched.iter().map(|k| format!("matched:{k}")))
        .reasons(related.iter().map(|q| format!("related_question:{}", q.decision_id)))
        .rule(format!("script:{}", entry.entry_id))
        .narrative(narrative);
    if backend_failed {
        builder = builder.reason("backend_fallback");
    }
    Ok(AgentResponse::new(
        content,
        entry.reveals.clone(),
        builder.build()?,
        &case.forbidden_terms,
    ))
}
