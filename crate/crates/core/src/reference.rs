//! Bundled reference material: the chest-pain case, a scripted transcript
//! for it, and the RE corpus describing the simulator itself.

use std::path::PathBuf;

use crate::case_model::{parse_case, ClinicalCase};
use crate::re_toolkit::Corpus;
use crate::supervisor::{parse_action_script, StudentAction};

pub const CHEST_PAIN_CASE_JSON: &str = include_str!("../assets/cases/chestpain-01.json");
pub const GOOD_STUDENT_SCRIPT_JSON: &str = include_str!("../assets/transcripts/chestpain-01-good-student.json");

pub fn chest_pain_case() -> ClinicalCase {
    parse_case(CHEST_PAIN_CASE_JSON).expect("bundled case parses")
}

/// Student actions of a thorough but imperfect work-up of the reference
/// case; it touches all six agents.
pub fn good_student_actions() -> Vec<StudentAction> {
    parse_action_script(GOOD_STUDENT_SCRIPT_JSON)
        .expect("bundled transcript parses")
        .actions
}

pub fn assets_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("assets")
}

pub fn cases_dir() -> PathBuf {
    assets_dir().join("cases")
}

pub fn re_corpus_dir() -> PathBuf {
    assets_dir().join("re_corpus")
}

pub fn re_corpus() -> Corpus {
    Corpus::load(re_corpus_dir()).expect("bundled corpus loads")
}

/// The bundled corpus with exactly one traceability defect injected, one
/// corpus per lint rule, keyed by the rule id it should trip.
pub fn seeded_re_corpora() -> Vec<(&'static str, Corpus)> {
    let base = re_corpus();
    let seeded = |f: &dyn Fn(&mut Corpus)| {
        let mut c = base.clone();
        f(&mut c);
        c
    };
    vec![
        (
            "R1",
            seeded(&|c| {
                let s = c.stories.iter_mut().find(|s| s.story_id == "s05").expect("s05");
                s.text = s.text.replacen("Medical Student", "Night Nurse", 1);
            }),
        ),
        (
            "R2",
            seeded(&|c| {
                for r in &mut c.requirements {
                    r.linked_stories.retain(|s| s != "s06");
                }
            }),
        ),
        (
            "R3",
            seeded(&|c| {
                let mut orphan = c.requirements[0].clone();
                orphan.req_id = "r99".into();
                orphan.linked_stories.clear();
                c.requirements.push(orphan);
            }),
        ),
        (
            "R4",
            seeded(&|c| c.ai_personas.retain(|p| p.agent_id != crate::AgentId::Supervisor)),
        ),
        (
            "R5",
            seeded(&|c| {
                for s in &mut c.scenarios {
                    s.participants.retain(|p| p != "ai_intervention");
                }
            }),
        ),
        (
            "R6",
            seeded(&|c| {
                let r = c
                    .requirements
                    .iter_mut()
                    .find(|r| r.kind == crate::re_toolkit::RequirementKind::NonFunctional)
                    .expect("a non-functional requirement");
                r.statement = "Explanations are available promptly after the request.".into();
            }),
        ),
    ]
}
