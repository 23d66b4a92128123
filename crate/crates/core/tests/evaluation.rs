mod common;

use std::sync::Arc;

use clinsim_core::agent_core::ScriptBackend;
use clinsim_core::evaluation::{explain_evaluation, score_transcript, Direction, EvaluationError, KEY_FACTOR_COUNT};
use clinsim_core::reference::{chest_pain_case, good_student_actions};
use clinsim_core::supervisor::{replay, Session};
use clinsim_core::{ExplanationKind, StudentAction};
use common::{arb_script, arb_step, reference_case, start};
use proptest::prelude::*;

/// Worked by hand from the rubric in `assets/cases/chestpain-01.json`
/// against the bundled transcript:
///
/// | item                    | w   | satisfied | points |
/// |-------------------------|-----|-----------|--------|
/// | history_pain            | 2   | 2/2       | 2      |
/// | history_risk            | 2   | 2/2       | 2      |
/// | history_embolism_screen | 1.5 | 1/3       | 0.5    |
/// | exam_vitals             | 1   | 1/1       | 1      |
/// | exam_focused            | 1.5 | 1/2       | 0.75   |
/// | tests_cardiac           | 3   | 2/2       | 3      |
/// | tests_embolism          | 1   | 0/1       | 0      |
/// | management              | 2   | 1/1       | 2      |
/// | final_diagnosis         | 2   | 1/1       | 2      |
///
/// 13.25 / 16.
const GOOD_STUDENT_TOTAL: f64 = 13.25 / 16.0;

fn good_student() -> Session {
    replay("sess-0001", reference_case(), Arc::new(ScriptBackend), &good_student_actions()).unwrap()
}

#[test]
fn good_student_scores_the_hand_computed_total() {
    let s = good_student();
    let report = s.report().unwrap();
    assert!((report.total_score - GOOD_STUDENT_TOTAL).abs() <= 1e-9, "{}", report.total_score);
    let item = |id: &str| report.item(id).unwrap();
    assert_eq!((item("history_embolism_screen").satisfied, item("history_embolism_screen").required), (1, 3));
    assert_eq!(item("exam_focused").fraction, 0.5);
    assert_eq!(item("tests_embolism").weighted_points, 0.0);
}

#[test]
fn key_factors_rank_by_weight_then_id() {
    let s = good_student();
    let report = s.report().unwrap();
    let strengths: Vec<&str> = report
        .key_factors
        .iter()
        .filter(|k| k.direction == Direction::Strength)
        .map(|k| k.item_id.as_str())
        .collect();
    let improvements: Vec<&str> = report
        .key_factors
        .iter()
        .filter(|k| k.direction == Direction::Improvement)
        .map(|k| k.item_id.as_str())
        .collect();
    // Fully satisfied: tests_cardiac 3; final_diagnosis, history_pain,
    // history_risk, management 2; exam_vitals 1.
    assert_eq!(strengths, ["tests_cardiac", "final_diagnosis", "history_pain"]);
    // The rest: exam_focused 1.5, history_embolism_screen 1.5, tests_embolism 1.
    assert_eq!(improvements, ["exam_focused", "history_embolism_screen", "tests_embolism"]);
    assert!(strengths.len() <= KEY_FACTOR_COUNT);
    let tc = report.key_factors.iter().find(|k| k.item_id == "tests_cardiac").unwrap();
    assert_eq!(tc.evidence.len(), 2);
}

#[test]
fn report_covers_every_rubric_item_once() {
    let s = good_student();
    let report = s.report().unwrap();
    let ids: Vec<&str> = report.item_scores.iter().map(|i| i.item_id.as_str()).collect();
    let rubric: Vec<&str> = s.case().rubric.iter().map(|r| r.item_id.as_str()).collect();
    assert_eq!(ids, rubric);
    assert_eq!(report.explanation.kind(), ExplanationKind::RubricBased);
}

#[test]
fn empty_log_scores_zero() {
    let case = chest_pain_case();
    let report = score_transcript(&case, "s", &[]).unwrap();
    assert_eq!(report.total_score, 0.0);
    assert!(report.item_scores.iter().all(|i| i.fraction == 0.0));
    assert!(report.explanation.has_reason("no_interaction"));
}

#[test]
fn complete_transcript_scores_exactly_one() {
    let mut s = start("full");
    for a in [
        StudentAction::ask_patient("Where does it hurt?"),
        StudentAction::ask_patient("Is it worse after meals?"),
        StudentAction::ask_patient("Do you smoke?"),
        StudentAction::ask_patient("Any medications?"),
        StudentAction::ask_patient("Short of breath?"),
        StudentAction::ask_patient("Any leg swelling?"),
        StudentAction::ask_patient("Recent travel?"),
        StudentAction::request_exam("vitals"),
        StudentAction::request_exam("cardiac_exam"),
        StudentAction::request_exam("abdominal_exam"),
        StudentAction::order_test("ekg"),
        StudentAction::order_test("troponin"),
        StudentAction::order_test("d_dimer"),
        StudentAction::intervene("proton_pump_inhibitor"),
    ] {
        s.route_action(a).unwrap();
    }
    s.conclude("gastroesophageal_reflux_disease").unwrap();
    assert_eq!(s.report().unwrap().total_score, 1.0);
}

#[test]
fn explain_satisfied_and_half_satisfied_items() {
    let s = good_student();
    let report = s.report().unwrap();
    let e = explain_evaluation(report, "tests_cardiac").unwrap();
    assert_eq!(e.kind(), ExplanationKind::RubricBased);
    let matched: Vec<&String> = e.reason_codes().iter().filter(|c| c.starts_with("matched:")).collect();
    assert_eq!(matched.len(), 2);
    assert!(matched.iter().all(|c| c.contains("(seq ")));
    assert!(!e.reason_codes().iter().any(|c| c.starts_with("missing:")));

    let e = explain_evaluation(report, "exam_focused").unwrap();
    assert!(e.has_reason("fraction:1/2"));
    assert_eq!(e.reason_codes().iter().filter(|c| c.starts_with("matched:")).count(), 1);
    assert_eq!(e.reason_codes().iter().filter(|c| c.starts_with("missing:")).count(), 1);

    assert_eq!(
        explain_evaluation(report, "bedside_manner").unwrap_err(),
        EvaluationError::UnknownItem("bedside_manner".into())
    );
}

#[test]
fn scoring_is_byte_deterministic() {
    let s = good_student();
    let a = serde_json::to_string(&score_transcript(s.case(), "x", s.log()).unwrap()).unwrap();
    let b = serde_json::to_string(&score_transcript(s.case(), "x", s.log()).unwrap()).unwrap();
    assert_eq!(a, b);
}

#[test]
fn matchers_ignore_system_entries() {
    // A start entry alone satisfies nothing.
    let s = start("x");
    let report = score_transcript(s.case(), "x", s.log()).unwrap();
    assert_eq!(report.total_score, 0.0);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn fractions_and_total_stay_in_unit_interval(script in arb_script(30)) {
        let mut s = start("b");
        for a in script {
            s.route_action(a).unwrap();
        }
        let report = score_transcript(s.case(), "b", s.log()).unwrap();
        for item in &report.item_scores {
            prop_assert!((0.0..=1.0).contains(&item.fraction));
            prop_assert!(item.satisfied <= item.required);
        }
        prop_assert!((0.0..=1.0).contains(&report.total_score));
    }

    #[test]
    fn appending_never_lowers_satisfied_counts(prefix in prop::collection::vec(arb_step(), 0..20), extra in prop::collection::vec(arb_step(), 1..10)) {
        let mut s = start("m");
        for a in prefix {
            s.route_action(a).unwrap();
        }
        let before = score_transcript(s.case(), "m", s.log()).unwrap();
        for a in extra {
            s.route_action(a).unwrap();
        }
        let after = score_transcript(s.case(), "m", s.log()).unwrap();
        for (b, a) in before.item_scores.iter().zip(&after.item_scores) {
            prop_assert!(a.satisfied >= b.satisfied, "{} dropped", b.item_id);
        }
    }
}
