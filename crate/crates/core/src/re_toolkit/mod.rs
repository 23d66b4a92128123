//! Requirements-engineering toolkit: persona, scenario, user-story and
//! requirement documents, the explainability user-story grammar, story
//! prioritisation and the traceability lint (rules R1–R6).

mod corpus;
mod priority;
mod story;
mod trace;

pub use corpus::{
    AIPersonaSpec, Corpus, CorpusError, HumanPersona, HumanRole, PersonaDoc, RequirementKind, RequirementSpec,
    ScenarioDoc, StoryDoc,
};
pub use priority::{prioritize_stories, PriorityWeights, RankedStory};
pub use story::{parse_user_story, render_user_story, Question, StoryClauses, StoryError, XaiUserStory};
pub use trace::{build_trace_graph, validate_traceability, TraceEdgeKind, TraceGraph, TraceLink, TraceNode, TraceNodeKind};
