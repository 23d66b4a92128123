use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::corpus::{Corpus, StoryDoc};

/// The interrogative of a story. Closed set: other words are parse errors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Question {
    Why,
    What,
    How,
}

impl Question {
    pub fn as_str(self) -> &'static str {
        match self {
            Question::Why => "why",
            Question::What => "what",
            Question::How => "how",
        }
    }
}

impl fmt::Display for Question {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Question {
    type Err = ();

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "why" => Ok(Question::Why),
            "what" => Ok(Question::What),
            "how" => Ok(Question::How),
            _ => Err(()),
        }
    }
}

/// The slots of one parsed story sentence, personas resolved to ids.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StoryClauses {
    pub human_persona_id: String,
    pub question: Question,
    pub ai_persona_id: String,
    pub decision_clause: String,
    pub goal_clause: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct XaiUserStory {
    pub story_id: String,
    #[serde(flatten)]
    pub clauses: StoryClauses,
    pub clinical_risk: u8,
    pub learning_value: u8,
    pub complexity: u8,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StoryError {
    /// The first slot of the template that could not be read.
    #[error("missing {0}")]
    Missing(&'static str),
    #[error("question word '{0}' is not one of why, what, how")]
    Question(String),
    #[error("unknown {slot} '{name}'")]
    UnknownPersona { slot: &'static str, name: String },
}

impl StoryError {
    /// Template slot the error is about.
    pub fn slot(&self) -> &'static str {
        match self {
            StoryError::Missing(slot) => slot,
            StoryError::Question(_) => "question",
            StoryError::UnknownPersona { slot, .. } => slot,
        }
    }
}

const WANT: &str = ", i want to understand ";
const SO_THAT: &str = ", so that i can ";

/// Byte offset of `needle` (ASCII, lowercase) in `hay`, ignoring ASCII case.
fn find_ascii_ci(hay: &str, needle: &str) -> Option<usize> {
    hay.as_bytes()
        .windows(needle.len())
        .position(|w| w.eq_ignore_ascii_case(needle.as_bytes()))
}

fn strip_prefix_ci<'a>(text: &'a str, prefix: &str) -> Option<&'a str> {
    let head = text.get(..prefix.len())?;
    head.eq_ignore_ascii_case(prefix).then(|| &text[prefix.len()..])
}

fn same_name(a: &str, b: &str) -> bool {
    a.trim().to_lowercase() == b.trim().to_lowercase()
}

/// Parse `As a <human>, I want to understand <why|what|how> the <ai>
/// <decision clause>, so that I can <goal clause>.` against the corpus
/// personas. Names and aliases match case-insensitively; for the AI
/// persona the longest matching name wins.
pub fn parse_user_story(text: &str, corpus: &Corpus) -> Result<StoryClauses, StoryError> {
    let text = text.trim();
    let text = text.strip_suffix('.').unwrap_or(text).trim_end();

    let rest = strip_prefix_ci(text, "as an ")
        .or_else(|| strip_prefix_ci(text, "as a "))
        .ok_or(StoryError::Missing("human persona"))?;
    let want = find_ascii_ci(rest, WANT).ok_or(StoryError::Missing("question"))?;
    let human_name = rest[..want].trim();
    if human_name.is_empty() {
        return Err(StoryError::Missing("human persona"));
    }
    let rest = &rest[want + WANT.len()..];

    let (word, rest) = rest.split_once(' ').unwrap_or((rest, ""));
    if word.is_empty() {
        return Err(StoryError::Missing("question"));
    }
    let question: Question = word.parse().map_err(|()| StoryError::Question(word.to_owned()))?;

    let rest = strip_prefix_ci(rest, "the ").ok_or(StoryError::Missing("ai persona"))?;
    let (clause_text, goal) = match find_ascii_ci(rest, SO_THAT) {
        Some(at) => (&rest[..at], rest[at + SO_THAT.len()..].trim()),
        None => (rest, ""),
    };

    let human = corpus
        .human_personas
        .iter()
        .find(|p| same_name(&p.name, human_name) || p.aliases.iter().any(|a| same_name(a, human_name)))
        .ok_or_else(|| StoryError::UnknownPersona {
            slot: "human persona",
            name: human_name.to_owned(),
        })?;

    let mut best: Option<(&str, usize)> = None;
    for persona in &corpus.ai_personas {
        for name in std::iter::once(&persona.display_name).chain(&persona.aliases) {
            let name = name.trim();
            let Some(head) = clause_text.get(..name.len()) else { continue };
            let boundary = clause_text[name.len()..].chars().next().is_none_or(|c| c == ' ');
            if !name.is_empty() && boundary && same_name(head, name) && best.is_none_or(|(_, n)| name.len() > n) {
                best = Some((persona.persona_id.as_str(), name.len()));
            }
        }
    }
    let Some((ai_persona_id, name_len)) = best else {
        let name = clause_text.split_whitespace().take(3).collect::<Vec<_>>().join(" ");
        return Err(StoryError::UnknownPersona { slot: "ai persona", name });
    };

    let decision = clause_text[name_len..].trim();
    if decision.is_empty() {
        return Err(StoryError::Missing("decision clause"));
    }
    if goal.is_empty() {
        return Err(StoryError::Missing("goal clause"));
    }
    Ok(StoryClauses {
        human_persona_id: human.persona_id.clone(),
        question,
        ai_persona_id: ai_persona_id.to_owned(),
        decision_clause: decision.to_owned(),
        goal_clause: goal.to_owned(),
    })
}

/// Render clauses back into the template sentence using the personas'
/// primary names. `None` if a persona id does not resolve.
pub fn render_user_story(clauses: &StoryClauses, corpus: &Corpus) -> Option<String> {
    let human = corpus.human_persona(&clauses.human_persona_id)?;
    let ai = corpus.ai_persona(&clauses.ai_persona_id)?;
    Some(format!(
        "As a {}, I want to understand {} the {} {}, so that I can {}.",
        human.name, clauses.question, ai.display_name, clauses.decision_clause, clauses.goal_clause
    ))
}

impl StoryDoc {
    pub fn resolve(&self, corpus: &Corpus) -> Result<XaiUserStory, StoryError> {
        Ok(XaiUserStory {
            story_id: self.story_id.clone(),
            clauses: parse_user_story(&self.text, corpus)?,
            clinical_risk: self.clinical_risk,
            learning_value: self.learning_value,
            complexity: self.complexity,
        })
    }
}
