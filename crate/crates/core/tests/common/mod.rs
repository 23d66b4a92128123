#![allow(dead_code)]

use std::sync::Arc;

use clinsim_core::agent_core::ScriptBackend;
use clinsim_core::reference::chest_pain_case;
use clinsim_core::supervisor::Session;
use clinsim_core::{AgentId, ClinicalCase, StudentAction};
use proptest::prelude::*;

pub fn reference_case() -> Arc<ClinicalCase> {
    Arc::new(chest_pain_case())
}

pub fn start(session_id: &str) -> Session {
    Session::start(session_id, reference_case(), Arc::new(ScriptBackend)).unwrap()
}

const QUESTIONS: [&str; 8] = [
    "Where does it hurt?",
    "When did it start?",
    "Do you smoke?",
    "What medications do you take?",
    "Any shortness of breath?",
    "what is your diagnosis?",
    "tell me a joke",
    "",
];

/// Any student action except `end_case`, drawn from the reference case
/// vocabulary plus a few unknown ids.
pub fn arb_step() -> impl Strategy<Value = StudentAction> {
    let exams = prop::sample::select(vec!["vitals", "cardiac_exam", "lung_exam", "chest_wall_palpation", "abdominal_exam", "x_ray_vision"]);
    let tests = prop::sample::select(vec!["ekg", "troponin", "d_dimer", "chest_xray", "cbc", "genome"]);
    let interventions = prop::sample::select(vec!["proton_pump_inhibitor", "nitroglycerin", "aspirin", "leeches"]);
    let agents = prop::sample::select(AgentId::ALL.to_vec());
    let subjects = prop::sample::select(vec![
        None,
        Some("myocardial_infarction"),
        Some("costochondritis"),
        Some("tests_cardiac"),
        Some("unknown_thing"),
    ]);
    prop_oneof![
        3 => prop::sample::select(QUESTIONS.to_vec()).prop_map(StudentAction::ask_patient),
        2 => exams.prop_map(StudentAction::request_exam),
        2 => tests.prop_map(StudentAction::order_test),
        1 => interventions.prop_map(StudentAction::intervene),
        1 => Just(StudentAction::ask_supervisor("how am I doing?")),
        2 => (agents, subjects).prop_map(|(a, s)| {
            // Disease subjects only make sense for the diagnostic agent.
            let s = match (a, s) {
                (AgentId::Diagnostic, Some("tests_cardiac")) => None,
                (_, s) => s,
            };
            StudentAction::request_explanation(a, s)
        }),
    ]
}

pub fn arb_diagnosis() -> impl Strategy<Value = &'static str> {
    prop::sample::select(vec![
        "gastroesophageal_reflux_disease",
        "myocardial_infarction",
        "pulmonary_embolism",
        "costochondritis",
    ])
}

/// A student script: steps, optionally closed by a diagnosis.
pub fn arb_script(max: usize) -> impl Strategy<Value = Vec<StudentAction>> {
    (prop::collection::vec(arb_step(), 0..max), prop::option::of(arb_diagnosis())).prop_map(|(mut steps, dx)| {
        if let Some(dx) = dx {
            steps.push(StudentAction::end_case(dx));
        }
        steps
    })
}
