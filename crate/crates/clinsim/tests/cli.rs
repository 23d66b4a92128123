mod common;

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use clinsim_core::reference::{cases_dir, re_corpus_dir, GOOD_STUDENT_SCRIPT_JSON};
use clinsim_core::supervisor::SessionExport;
use common::server;
use tempfile::TempDir;

fn clinsim(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_clinsim"))
        .args(args)
        .env_remove("CLINSIM_BACKEND")
        .output()
        .unwrap()
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn case_path() -> String {
    cases_dir().join("chestpain-01.json").display().to_string()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    fs::write(&path, text).unwrap();
    path.display().to_string()
}

fn copy_dir(from: &Path, to: &Path) {
    fs::create_dir_all(to).unwrap();
    for entry in fs::read_dir(from).unwrap() {
        let entry = entry.unwrap();
        let target = to.join(entry.file_name());
        if entry.file_type().unwrap().is_dir() {
            copy_dir(&entry.path(), &target);
        } else {
            fs::copy(entry.path(), target).unwrap();
        }
    }
}

#[test]
fn case_validate_accepts_reference_case() {
    let out = clinsim(&["case", "validate", &case_path()]);
    assert!(out.status.success(), "{}", stdout(&out));
    assert!(stdout(&out).contains("chestpain-01: 0 error(s)"));
}

#[test]
fn case_validate_reports_leaks_and_syntax() {
    let tmp = TempDir::new().unwrap();
    let text = fs::read_to_string(case_path()).unwrap();
    let leaky = text.replacen("\"response_text\": \"", "\"response_text\": \"It is just heartburn. ", 1);
    assert_ne!(leaky, text);
    let out = clinsim(&["case", "validate", &write(tmp.path(), "leaky.json", &leaky)]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stdout(&out).contains("error[leak]"), "{}", stdout(&out));

    let out = clinsim(&["case", "validate", &write(tmp.path(), "broken.json", "{\"format\": 1,")]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stdout(&out).contains("syntax error"), "{}", stdout(&out));
}

#[test]
fn simulate_run_scores_and_replays() {
    let tmp = TempDir::new().unwrap();
    let script = write(tmp.path(), "script.json", GOOD_STUDENT_SCRIPT_JSON);
    let first = tmp.path().join("first.json").display().to_string();
    let out = clinsim(&["simulate", "run", "--case", &case_path(), "--script", &script, "--out", &first]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let a: SessionExport = serde_json::from_str(&fs::read_to_string(&first).unwrap()).unwrap();
    let report = a.report.as_ref().unwrap();
    assert!((report.total_score - 0.828125).abs() < 1e-9);

    // the export itself is a valid script and replays to the same session
    let out = clinsim(&["simulate", "run", "--case", &case_path(), "--script", &first]);
    assert!(out.status.success());
    let b: SessionExport = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(a.without_timing(), b.without_timing());
    assert_eq!(
        serde_json::to_string(&a.report).unwrap(),
        serde_json::to_string(&b.report).unwrap()
    );
}

#[test]
fn simulate_run_rejects_bad_input() {
    let tmp = TempDir::new().unwrap();
    let bad = write(tmp.path(), "bad.json", r#"{"actions": [{"kind": "order_test"}]}"#);
    let out = clinsim(&["simulate", "run", "--case", &case_path(), "--script", &bad]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("$.actions[0]"));

    let other = write(tmp.path(), "other.json", r#"{"case_id": "other-case", "actions": []}"#);
    let out = clinsim(&["simulate", "run", "--case", &case_path(), "--script", &other]);
    assert_eq!(out.status.code(), Some(1));

    let script = write(tmp.path(), "script.json", GOOD_STUDENT_SCRIPT_JSON);
    let out = Command::new(env!("CARGO_BIN_EXE_clinsim"))
        .args(["simulate", "run", "--case", &case_path(), "--script", &script])
        .env("CLINSIM_BACKEND", "oracle")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("invalid backend"));
}

#[test]
fn session_export_fetches_from_server() {
    let (srv, c) = server();
    let sid = c.create_session();
    c.post(
        &format!("/sessions/{sid}/actions"),
        &serde_json::json!({ "kind": "order_test", "test_id": "ekg" }),
    );
    let out = clinsim(&["session", "export", &sid, "--server", &srv.base_url()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let export: SessionExport = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(export.session_id, sid);
    assert_eq!(export.log.len(), 2);

    let out = clinsim(&["session", "export", "sess-9999", "--server", &srv.base_url()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("unknown_session"));
}

#[test]
fn re_lint_clean_and_seeded() {
    let out = clinsim(&["re", "lint"]);
    assert!(out.status.success(), "{}", stdout(&out));
    assert!(stdout(&out).contains("0 finding(s)"));

    let tmp = TempDir::new().unwrap();
    copy_dir(&re_corpus_dir(), tmp.path());
    fs::remove_file(tmp.path().join("personas/ai_supervisor.json")).unwrap();
    let out = clinsim(&["re", "lint", &tmp.path().display().to_string()]);
    assert_eq!(out.status.code(), Some(1));
    let text = stdout(&out);
    assert!(text.contains("error[R4]"), "{text}");
    assert!(text.contains("1 finding(s)"), "{text}");
}

#[test]
fn re_prioritize_ranks_all_stories() {
    let out = clinsim(&["re", "prioritize", "--json"]);
    assert!(out.status.success());
    let ranked: Vec<serde_json::Value> = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(ranked.len(), 6);
    let priorities: Vec<f64> = ranked.iter().map(|r| r["priority"].as_f64().unwrap()).collect();
    assert!(priorities.windows(2).all(|w| w[0] >= w[1]));

    let tmp = TempDir::new().unwrap();
    let weights = write(tmp.path(), "w.json", r#"{"clinical_risk": 0, "learning_value": 0, "complexity": 1}"#);
    let out = clinsim(&["re", "prioritize", "--weights", &weights]);
    assert!(out.status.success());
    assert!(stdout(&out).starts_with("1\t"));
}

#[test]
fn re_story_parse_reports_slot() {
    let out = clinsim(&[
        "re",
        "story",
        "parse",
        "As a Medical Educator, I want to understand how the Dr. Eval scored each rubric item, so that I can calibrate my feedback.",
    ]);
    assert!(out.status.success(), "{}", stdout(&out));
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["human_persona_id"], "human_educator");
    assert_eq!(v["ai_persona_id"], "ai_evaluation");
    assert_eq!(v["question"], "how");

    let out = clinsim(&["re", "story", "parse", "As a Medical Student, I want to understand why the Oracle said so, so that I can learn."]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stdout(&out).contains("error[ai persona]"), "{}", stdout(&out));
}
