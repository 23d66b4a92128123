use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::agent_core::AgentId;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HumanRole {
    MedicalStudent,
    MedicalEducator,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HumanPersona {
    pub persona_id: String,
    pub name: String,
    pub role: HumanRole,
    pub goals: Vec<String>,
    pub knowledge_level: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub aliases: Vec<String>,
}

/// Design-time description of one AI agent persona.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AIPersonaSpec {
    pub persona_id: String,
    pub agent_id: AgentId,
    pub display_name: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub aliases: Vec<String>,
    pub role_goal: String,
    pub model_architecture: String,
    pub knowledge_base: String,
    pub decision_triggers: String,
    pub explainability_profile: String,
}

impl AIPersonaSpec {
    fn attributes(&self) -> [(&'static str, &str); 5] {
        [
            ("role_goal", &self.role_goal),
            ("model_architecture", &self.model_architecture),
            ("knowledge_base", &self.knowledge_base),
            ("decision_triggers", &self.decision_triggers),
            ("explainability_profile", &self.explainability_profile),
        ]
    }
}

/// A persona file holds either kind, tagged by `"type"`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum PersonaDoc {
    Human(HumanPersona),
    Ai(AIPersonaSpec),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioDoc {
    pub scenario_id: String,
    pub title: String,
    pub participants: Vec<String>,
    pub steps: Vec<String>,
    /// 1-based indexes into `steps`.
    pub explainability_moments: Vec<usize>,
}

/// A user story as stored: the sentence plus its three 1–5 ratings.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StoryDoc {
    pub story_id: String,
    pub text: String,
    pub clinical_risk: u8,
    pub learning_value: u8,
    pub complexity: u8,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RequirementKind {
    Functional,
    NonFunctional,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RequirementSpec {
    pub req_id: String,
    pub kind: RequirementKind,
    pub statement: String,
    pub acceptance: String,
    pub linked_stories: Vec<String>,
}

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{}: {message}", path.display())]
    Parse { path: PathBuf, message: String },
    #[error("{}: {message}", path.display())]
    Invalid { path: PathBuf, message: String },
    #[error("duplicate {kind} id '{id}'")]
    Duplicate { kind: &'static str, id: String },
}

/// All RE documents of one project, each list sorted by id.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Corpus {
    pub human_personas: Vec<HumanPersona>,
    pub ai_personas: Vec<AIPersonaSpec>,
    pub scenarios: Vec<ScenarioDoc>,
    pub stories: Vec<StoryDoc>,
    pub requirements: Vec<RequirementSpec>,
}

fn json_files(dir: &Path) -> Result<Vec<PathBuf>, CorpusError> {
    if !dir.exists() {
        return Ok(Vec::new());
    }
    let io = |source| CorpusError::Io {
        path: dir.to_owned(),
        source,
    };
    let mut files = Vec::new();
    for entry in fs::read_dir(dir).map_err(io)? {
        let path = entry.map_err(io)?.path();
        if path.extension().is_some_and(|e| e == "json") {
            files.push(path);
        }
    }
    files.sort();
    Ok(files)
}

fn read_doc<T: DeserializeOwned>(path: &Path) -> Result<T, CorpusError> {
    let text = fs::read_to_string(path).map_err(|source| CorpusError::Io {
        path: path.to_owned(),
        source,
    })?;
    let mut de = serde_json::Deserializer::from_str(&text);
    serde_path_to_error::deserialize(&mut de).map_err(|e| {
        let at = e.path().to_string();
        let message = if at == "." {
            e.inner().to_string()
        } else {
            format!("{at}: {}", e.inner())
        };
        CorpusError::Parse {
            path: path.to_owned(),
            message,
        }
    })
}

fn invalid(path: &Path, message: impl Into<String>) -> CorpusError {
    CorpusError::Invalid {
        path: path.to_owned(),
        message: message.into(),
    }
}

fn check_unique<'a>(kind: &'static str, ids: impl IntoIterator<Item = &'a str>) -> Result<(), CorpusError> {
    let mut seen = BTreeSet::new();
    for id in ids {
        if !seen.insert(id) {
            return Err(CorpusError::Duplicate { kind, id: id.to_owned() });
        }
    }
    Ok(())
}

impl Corpus {
    /// Load `personas/`, `scenarios/`, `stories/` and `requirements/` under
    /// `root`, one JSON document per file. Document-level invariants are
    /// enforced here; cross-document links are left to the lint.
    pub fn load(root: impl AsRef<Path>) -> Result<Corpus, CorpusError> {
        let root = root.as_ref();
        if !root.is_dir() {
            return Err(invalid(root, "not a directory"));
        }
        let mut corpus = Corpus::default();

        for path in json_files(&root.join("personas"))? {
            match read_doc::<PersonaDoc>(&path)? {
                PersonaDoc::Human(p) => {
                    if p.name.trim().is_empty() {
                        return Err(invalid(&path, "persona name is empty"));
                    }
                    corpus.human_personas.push(p);
                }
                PersonaDoc::Ai(p) => {
                    if let Some((attr, _)) = p.attributes().into_iter().find(|(_, v)| v.trim().is_empty()) {
                        return Err(invalid(&path, format!("attribute '{attr}' is empty")));
                    }
                    corpus.ai_personas.push(p);
                }
            }
        }
        for path in json_files(&root.join("scenarios"))? {
            let s: ScenarioDoc = read_doc(&path)?;
            if s.explainability_moments.is_empty() {
                return Err(invalid(&path, "explainability_moments is empty"));
            }
            if let Some(m) = s
                .explainability_moments
                .iter()
                .find(|&&m| m == 0 || m > s.steps.len())
            {
                return Err(invalid(&path, format!("explainability moment {m} is not a step")));
            }
            corpus.scenarios.push(s);
        }
        for path in json_files(&root.join("stories"))? {
            let s: StoryDoc = read_doc(&path)?;
            for (name, v) in [
                ("clinical_risk", s.clinical_risk),
                ("learning_value", s.learning_value),
                ("complexity", s.complexity),
            ] {
                if !(1..=5).contains(&v) {
                    return Err(invalid(&path, format!("{name} {v} outside 1..=5")));
                }
            }
            corpus.stories.push(s);
        }
        for path in json_files(&root.join("requirements"))? {
            corpus.requirements.push(read_doc(&path)?);
        }

        corpus.sort();
        let persona_ids = corpus
            .human_personas
            .iter()
            .map(|p| p.persona_id.as_str())
            .chain(corpus.ai_personas.iter().map(|p| p.persona_id.as_str()));
        check_unique("persona", persona_ids)?;
        check_unique("scenario", corpus.scenarios.iter().map(|s| s.scenario_id.as_str()))?;
        check_unique("story", corpus.stories.iter().map(|s| s.story_id.as_str()))?;
        check_unique("requirement", corpus.requirements.iter().map(|r| r.req_id.as_str()))?;
        Ok(corpus)
    }

    fn sort(&mut self) {
        self.human_personas.sort_by(|a, b| a.persona_id.cmp(&b.persona_id));
        self.ai_personas.sort_by(|a, b| a.persona_id.cmp(&b.persona_id));
        self.scenarios.sort_by(|a, b| a.scenario_id.cmp(&b.scenario_id));
        self.stories.sort_by(|a, b| a.story_id.cmp(&b.story_id));
        self.requirements.sort_by(|a, b| a.req_id.cmp(&b.req_id));
    }

    pub fn human_persona(&self, persona_id: &str) -> Option<&HumanPersona> {
        self.human_personas.iter().find(|p| p.persona_id == persona_id)
    }

    pub fn ai_persona(&self, persona_id: &str) -> Option<&AIPersonaSpec> {
        self.ai_personas.iter().find(|p| p.persona_id == persona_id)
    }

    pub fn story(&self, story_id: &str) -> Option<&StoryDoc> {
        self.stories.iter().find(|s| s.story_id == story_id)
    }

    pub fn is_persona(&self, persona_id: &str) -> bool {
        self.human_persona(persona_id).is_some() || self.ai_persona(persona_id).is_some()
    }
}
