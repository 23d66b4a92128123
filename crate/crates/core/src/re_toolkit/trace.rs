use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::corpus::{Corpus, RequirementKind};
use super::story::StoryError;
use crate::agent_core::AgentId;
use crate::diagnostics::Diagnostic;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TraceNodeKind {
    HumanPersona,
    AiPersona,
    Scenario,
    Story,
    Requirement,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct TraceNode {
    pub kind: TraceNodeKind,
    pub id: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TraceEdgeKind {
    PersonaStory,
    StoryRequirement,
    PersonaScenario,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct TraceLink {
    pub kind: TraceEdgeKind,
    pub from: String,
    pub to: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceGraph {
    pub nodes: Vec<TraceNode>,
    pub edges: Vec<TraceLink>,
}

impl TraceGraph {
    pub fn has_node(&self, id: &str) -> bool {
        self.nodes.iter().any(|n| n.id == id)
    }
}

/// Trace graph over the resolvable links of `corpus`. Links to missing
/// documents are left out; the lint reports them.
pub fn build_trace_graph(corpus: &Corpus) -> TraceGraph {
    let mut nodes: Vec<TraceNode> = Vec::new();
    let node = |kind, id: &str| TraceNode { kind, id: id.to_owned() };
    nodes.extend(corpus.human_personas.iter().map(|p| node(TraceNodeKind::HumanPersona, &p.persona_id)));
    nodes.extend(corpus.ai_personas.iter().map(|p| node(TraceNodeKind::AiPersona, &p.persona_id)));
    nodes.extend(corpus.scenarios.iter().map(|s| node(TraceNodeKind::Scenario, &s.scenario_id)));
    nodes.extend(corpus.stories.iter().map(|s| node(TraceNodeKind::Story, &s.story_id)));
    nodes.extend(corpus.requirements.iter().map(|r| node(TraceNodeKind::Requirement, &r.req_id)));

    let mut edges = BTreeSet::new();
    let edge = |kind, from: &str, to: &str| TraceLink {
        kind,
        from: from.to_owned(),
        to: to.to_owned(),
    };
    for story in &corpus.stories {
        if let Ok(resolved) = story.resolve(corpus) {
            edges.insert(edge(TraceEdgeKind::PersonaStory, &resolved.clauses.human_persona_id, &story.story_id));
            edges.insert(edge(TraceEdgeKind::PersonaStory, &resolved.clauses.ai_persona_id, &story.story_id));
        }
    }
    for req in &corpus.requirements {
        for story in req.linked_stories.iter().filter(|s| corpus.story(s).is_some()) {
            edges.insert(edge(TraceEdgeKind::StoryRequirement, story, &req.req_id));
        }
    }
    for scenario in &corpus.scenarios {
        for persona in scenario.participants.iter().filter(|p| corpus.is_persona(p)) {
            edges.insert(edge(TraceEdgeKind::PersonaScenario, persona, &scenario.scenario_id));
        }
    }
    nodes.sort();
    TraceGraph {
        nodes,
        edges: edges.into_iter().collect(),
    }
}

fn has_numeric_bound(statement: &str) -> bool {
    statement.chars().any(|c| c.is_ascii_digit())
}

/// Lint the corpus. Rule ids:
///
/// * `R1` every story's personas resolve
/// * `R2` every story is linked from at least one requirement
/// * `R3` every requirement links at least one story, and only existing ones
/// * `R4` every registry agent has an AI persona
/// * `R5` every AI persona takes part in at least one scenario
/// * `R6` non-functional requirements state a numeric bound
///
/// Stories that do not fit the grammar are reported as `story_grammar`;
/// scenarios without a resolvable human and AI participant as
/// `scenario_participants`. Output is sorted by rule id, path, message.
pub fn validate_traceability(corpus: &Corpus) -> Vec<Diagnostic> {
    let mut out = Vec::new();

    for story in &corpus.stories {
        let path = format!("stories/{}", story.story_id);
        match story.resolve(corpus) {
            Ok(_) => {}
            Err(err @ StoryError::UnknownPersona { .. }) => out.push(Diagnostic::error("R1", path, err.to_string())),
            Err(err) => out.push(Diagnostic::error("story_grammar", path, err.to_string())),
        }
    }

    let linked: BTreeSet<&str> = corpus
        .requirements
        .iter()
        .flat_map(|r| r.linked_stories.iter().map(String::as_str))
        .collect();
    for story in corpus.stories.iter().filter(|s| !linked.contains(s.story_id.as_str())) {
        out.push(Diagnostic::error(
            "R2",
            format!("stories/{}", story.story_id),
            format!("story '{}' is not linked from any requirement", story.story_id),
        ));
    }

    for req in &corpus.requirements {
        let path = format!("requirements/{}", req.req_id);
        if req.linked_stories.is_empty() {
            out.push(Diagnostic::error("R3", &path, format!("requirement '{}' links no story", req.req_id)));
        }
        for story in req.linked_stories.iter().filter(|s| corpus.story(s).is_none()) {
            out.push(Diagnostic::error("R3", &path, format!("links unknown story '{story}'")));
        }
        if req.kind == RequirementKind::NonFunctional && !has_numeric_bound(&req.statement) {
            out.push(Diagnostic::error(
                "R6",
                &path,
                format!("non-functional requirement '{}' states no numeric bound", req.req_id),
            ));
        }
    }

    for agent in AgentId::ALL {
        if !corpus.ai_personas.iter().any(|p| p.agent_id == agent) {
            out.push(Diagnostic::error(
                "R4",
                "personas",
                format!("no AI persona describes agent '{agent}'"),
            ));
        }
    }

    let participants: BTreeSet<&str> = corpus
        .scenarios
        .iter()
        .flat_map(|s| s.participants.iter().map(String::as_str))
        .collect();
    for persona in corpus.ai_personas.iter().filter(|p| !participants.contains(p.persona_id.as_str())) {
        out.push(Diagnostic::error(
            "R5",
            format!("personas/{}", persona.persona_id),
            format!("AI persona '{}' appears in no scenario", persona.persona_id),
        ));
    }

    for scenario in &corpus.scenarios {
        let human = scenario.participants.iter().any(|p| corpus.human_persona(p).is_some());
        let ai = scenario.participants.iter().any(|p| corpus.ai_persona(p).is_some());
        if !(human && ai) {
            out.push(Diagnostic::error(
                "scenario_participants",
                format!("scenarios/{}", scenario.scenario_id),
                "a scenario needs at least one human and one AI participant",
            ));
        }
    }

    out.sort_by(|a, b| (&a.code, &a.path, &a.message).cmp(&(&b.code, &b.path, &b.message)));
    out
}
