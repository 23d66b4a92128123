use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::explanation::ExplanationKind;
use crate::case_model::ClinicalCase;
use crate::supervisor::ActionKind;

/// Canonical agent identifiers. Display names are configurable; these are not.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AgentId {
    Patient,
    PhysicalExam,
    Diagnostic,
    Intervention,
    Evaluation,
    Supervisor,
}

impl AgentId {
    pub const ALL: [AgentId; 6] = [
        AgentId::Patient,
        AgentId::PhysicalExam,
        AgentId::Diagnostic,
        AgentId::Intervention,
        AgentId::Evaluation,
        AgentId::Supervisor,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            AgentId::Patient => "patient",
            AgentId::PhysicalExam => "physical_exam",
            AgentId::Diagnostic => "diagnostic",
            AgentId::Intervention => "intervention",
            AgentId::Evaluation => "evaluation",
            AgentId::Supervisor => "supervisor",
        }
    }

    /// The explanation kinds this agent may emit.
    pub fn explainability_profile(self) -> &'static [ExplanationKind] {
        match self {
            AgentId::Patient => &[ExplanationKind::InteractionHistory],
            AgentId::PhysicalExam => &[ExplanationKind::Procedural],
            AgentId::Diagnostic => &[ExplanationKind::TestUtility],
            AgentId::Intervention => &[ExplanationKind::GuidelineRationale],
            AgentId::Evaluation => &[ExplanationKind::RubricBased],
            AgentId::Supervisor => &[ExplanationKind::ScenarioFlow],
        }
    }

    pub fn explanation_kind(self) -> ExplanationKind {
        self.explainability_profile()[0]
    }

    fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for AgentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for AgentId {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        AgentId::ALL
            .into_iter()
            .find(|a| a.as_str() == s)
            .ok_or_else(|| format!("unknown agent '{s}'"))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AgentPersona {
    pub agent_id: AgentId,
    pub display_name: String,
    pub goal: String,
    pub model_descriptor: String,
    pub knowledge_base_refs: Vec<String>,
    pub decision_triggers: Vec<ActionKind>,
    pub explainability_profile: Vec<ExplanationKind>,
    /// One-line description of what the explanations contain.
    pub explainability_summary: String,
}

/// The six personas of a session, one per [`AgentId`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AgentRegistry {
    personas: Vec<AgentPersona>,
}

impl AgentRegistry {
    pub fn get(&self, agent: AgentId) -> &AgentPersona {
        &self.personas[agent.index()]
    }

    pub fn iter(&self) -> impl Iterator<Item = &AgentPersona> {
        self.personas.iter()
    }

    pub fn len(&self) -> usize {
        self.personas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.personas.is_empty()
    }

    /// Override a display name (the ids stay canonical).
    pub fn rename(&mut self, agent: AgentId, display_name: impl Into<String>) {
        self.personas[agent.index()].display_name = display_name.into();
    }
}

/// Wire the six personas to `case`'s knowledge base. Deterministic.
pub fn build_agent_registry(case: &ClinicalCase) -> AgentRegistry {
    let id = &case.case_id;
    let personas = AgentId::ALL
        .into_iter()
        .map(|agent| {
            let (name, goal, model, summary) = persona_text(agent);
            let knowledge_base_refs = match agent {
                AgentId::Patient => vec![
                    format!("{id}:symptom_script ({} entries)", case.symptom_script.len()),
                    format!("{id}:demographics"),
                    format!("{id}:chief_complaint"),
                ],
                AgentId::PhysicalExam => {
                    vec![format!("{id}:exam_findings ({} exams)", case.exam_findings.len())]
                }
                AgentId::Diagnostic => vec![
                    format!("{id}:test_catalog ({} tests)", case.test_catalog.len()),
                    format!("{id}:evidence_links ({} links)", case.evidence_links.len()),
                    format!("{id}:differential ({} diseases)", case.differential.len()),
                ],
                AgentId::Intervention => vec![
                    format!("{id}:intervention_protocol ({} rules)", case.intervention_protocol.len()),
                    "session:interaction_log".to_owned(),
                ],
                AgentId::Evaluation => vec![
                    format!("{id}:rubric ({} items)", case.rubric.len()),
                    "session:interaction_log".to_owned(),
                ],
                AgentId::Supervisor => vec![
                    "session:interaction_log".to_owned(),
                    "session:agent_status".to_owned(),
                    "supervisor:routing_table".to_owned(),
                ],
            };
            AgentPersona {
                agent_id: agent,
                display_name: name.to_owned(),
                goal: goal.to_owned(),
                model_descriptor: model.to_owned(),
                knowledge_base_refs,
                decision_triggers: ActionKind::ALL
                    .into_iter()
                    .filter(|k| k.triggers(agent))
                    .collect(),
                explainability_profile: agent.explainability_profile().to_vec(),
                explainability_summary: summary.to_owned(),
            }
        })
        .collect();
    AgentRegistry { personas }
}

fn persona_text(agent: AgentId) -> (&'static str, &'static str, &'static str, &'static str) {
    match agent {
        AgentId::Patient => (
            "Alex",
            "Give the student a believable patient to interview, answering questions and describing \
             symptoms from the case script while keeping the underlying diagnosis undisclosed until \
             the case is concluded.",
            "Keyword-overlap matcher over the case symptom script; an external dialogue service can \
             be plugged in behind the same contract.",
            "cites the question keywords that matched and earlier related questions",
        ),
        AgentId::PhysicalExam => (
            "Dr. Eva",
            "Carry out requested physical examinations and report structured findings, vital signs \
             included.",
            "Rule-based lookup over the case examination tables.",
            "lists the exam performed, the areas it covered and the findings it produced",
        ),
        AgentId::Diagnostic => (
            "Brian",
            "Run ordered investigations, report their results at once and support interpretation \
             of the accumulated evidence.",
            "Test catalog plus additive signed-weight evidence scoring over the differential.",
            "names the diseases a result bears on, with the signed weight each finding carries",
        ),
        AgentId::Intervention => (
            "Clair",
            "Check therapeutic actions against the case protocol, simulate their outcome and stop \
             unsafe choices.",
            "Rule-based protocol engine with indication and contraindication sets.",
            "cites protocol rules, safety reason codes and any prerequisite findings still missing",
        ),
        AgentId::Evaluation => (
            "Dr. Eval",
            "Score the concluded interaction log against the educator rubric and write a structured \
             feedback report.",
            "Deterministic rubric scorer over the interaction log; an optional backend may reword \
             the narrative only.",
            "shows each rubric item's matched and missing events with log references, and the key \
             factors behind the score",
        ),
        AgentId::Supervisor => (
            "Sam",
            "Run the session lifecycle, route every student action to the responsible agent and \
             report case progression.",
            "Structural routing table keyed by action kind, driving a session state machine.",
            "explains scenario-flow decisions (routing, lifecycle) and shows case progression",
        ),
    }
}

/// Render the five-attribute persona card. Stable across calls.
pub fn format_persona_card(persona: &AgentPersona) -> String {
    let triggers: Vec<&str> = persona.decision_triggers.iter().map(|t| t.as_str()).collect();
    let kinds: Vec<&str> = persona.explainability_profile.iter().map(|k| k.as_str()).collect();
    let triggers = if triggers.is_empty() {
        "none".to_owned()
    } else {
        triggers.join(", ")
    };
    format!(
        "{name} ({id})\n\
         Goal: {goal}\n\
         Model: {model}\n\
         Knowledge Base: {kb}\n\
         Decision Triggers: {triggers}\n\
         Explainability: {kinds}: {summary}\n",
        name = persona.display_name,
        id = persona.agent_id,
        goal = persona.goal,
        model = persona.model_descriptor,
        kb = persona.knowledge_base_refs.join("; "),
        kinds = kinds.join(", "),
        summary = persona.explainability_summary,
    )
}
