mod common;

use std::sync::Arc;
use std::thread;

use axum::routing::post;
use axum::{Json, Router};
use clinsim::backend::ExternalBackend;
use clinsim_core::reference::good_student_actions;
use clinsim_core::supervisor::SessionExport;
use common::{server, server_with, Client, CASE_ID};
use serde_json::{json, Value};

fn data(body: &Value) -> &Value {
    assert_eq!(body["ok"], true, "{body}");
    assert!(body.get("error").is_none());
    &body["data"]
}

fn error_code(body: &Value) -> &str {
    assert_eq!(body["ok"], false, "{body}");
    assert!(body.get("data").is_none());
    body["error"]["code"].as_str().unwrap()
}

#[test]
fn case_catalogue_hides_the_answer() {
    let (_srv, c) = server();
    let (status, body) = c.get("/cases");
    assert_eq!(status, 200);
    assert_eq!(data(&body)[0]["case_id"], CASE_ID);

    let (status, body) = c.get(&format!("/cases/{CASE_ID}"));
    assert_eq!(status, 200);
    let text = body.to_string().to_lowercase();
    assert!(!text.contains("hidden_diagnosis"));
    assert!(!text.contains("forbidden_terms"));
    assert!(!text.contains("evidence_links"));
    assert!(!text.contains("symptom_script"));
    assert_eq!(data(&body)["differential"].as_array().unwrap().len(), 4);

    let (status, body) = c.get("/cases/nope");
    assert_eq!(status, 404);
    assert_eq!(error_code(&body), "unknown_case");
}

#[test]
fn create_session_validates_body() {
    let (_srv, c) = server();
    let (status, body) = c.post("/sessions", &json!({ "case_id": "nope" }));
    assert_eq!(status, 404);
    assert_eq!(error_code(&body), "unknown_case");

    let (status, body) = c.post("/sessions", &json!({}));
    assert_eq!(status, 422);
    assert_eq!(body["error"]["details"]["field"], "case_id");

    let (status, body) = c.post("/sessions", &json!({ "case_id": CASE_ID }));
    assert_eq!(status, 201);
    let view = data(&body);
    assert_eq!(view["session_id"], "sess-0001");
    assert_eq!(view["state"], "active");
    assert_eq!(view["last_seq"], 1);
}

#[test]
fn actions_are_logged_with_explanations() {
    let (_srv, c) = server();
    let sid = c.create_session();
    let (status, body) = c.post(
        &format!("/sessions/{sid}/actions"),
        &json!({ "kind": "order_test", "test_id": "troponin" }),
    );
    assert_eq!(status, 200);
    let entry = data(&body);
    assert_eq!(entry["seq"], 2);
    assert_eq!(entry["route"]["routed_to"], "diagnostic");
    assert_eq!(entry["response"]["explanation"]["decision_id"], format!("{sid}#2"));
    assert!(!entry["response"]["explanation"]["reason_codes"].as_array().unwrap().is_empty());

    let (_, body) = c.get(&format!("/sessions/{sid}/log?since=1"));
    let page = data(&body);
    assert_eq!(page["entries"].as_array().unwrap().len(), 1);
    assert_eq!(page["last_seq"], 2);

    let (_, body) = c.get(&format!("/sessions/{sid}/log"));
    assert_eq!(data(&body)["entries"].as_array().unwrap().len(), 2);

    let (status, body) = c.get(&format!("/sessions/{sid}/log?since=abc"));
    assert_eq!(status, 422);
    assert_eq!(body["error"]["details"]["field"], "since");
}

#[test]
fn malformed_actions_are_rejected_with_field() {
    let (_srv, c) = server();
    let sid = c.create_session();
    let path = format!("/sessions/{sid}/actions");

    let (status, body) = c.post(&path, &json!({ "kind": "teleport" }));
    assert_eq!(status, 422);
    assert_eq!(error_code(&body), "malformed_action");
    assert_eq!(body["error"]["details"]["field"], "kind");

    let (status, body) = c.post(&path, &json!({ "kind": "request_exam" }));
    assert_eq!(status, 422);
    assert_eq!(body["error"]["details"]["field"], "exam_id");

    let (status, body) = c.post_raw(&path, "not json");
    assert_eq!(status, 422);
    assert_eq!(error_code(&body), "malformed_json");

    let (status, body) = c.post(&path, &json!({ "kind": "start_case", "case_id": CASE_ID }));
    assert_eq!(status, 422);
    assert_eq!(error_code(&body), "system_action");

    let (status, body) = c.post("/sessions/sess-9999/actions", &json!({ "kind": "ask_patient", "text": "hi" }));
    assert_eq!(status, 404);
    assert_eq!(error_code(&body), "unknown_session");

    // nothing was logged by the rejected requests
    let (_, body) = c.get(&format!("/sessions/{sid}/log"));
    assert_eq!(data(&body)["entries"].as_array().unwrap().len(), 1);
}

#[test]
fn conclude_report_and_lifecycle_conflicts() {
    let (_srv, c) = server();
    let sid = c.create_session();

    let (status, body) = c.get(&format!("/sessions/{sid}/report"));
    assert_eq!(status, 409);
    assert_eq!(error_code(&body), "report_not_ready");

    let (status, body) = c.post(&format!("/sessions/{sid}/conclude"), &json!({ "diagnosis": "flu" }));
    assert_eq!(status, 422);
    assert_eq!(error_code(&body), "unknown_disease");

    let (status, body) = c.post(
        &format!("/sessions/{sid}/conclude"),
        &json!({ "diagnosis": "gastroesophageal_reflux_disease" }),
    );
    assert_eq!(status, 200);
    let report = data(&body).clone();
    assert_eq!(report["session_id"], sid);

    let (status, body) = c.get(&format!("/sessions/{sid}/report"));
    assert_eq!(status, 200);
    assert_eq!(data(&body), &report);

    let (status, body) = c.post(&format!("/sessions/{sid}/actions"), &json!({ "kind": "order_test", "test_id": "ekg" }));
    assert_eq!(status, 409);
    assert_eq!(error_code(&body), "session_not_active");

    let (status, _) = c.post(
        &format!("/sessions/{sid}/conclude"),
        &json!({ "diagnosis": "gastroesophageal_reflux_disease" }),
    );
    assert_eq!(status, 409);

    let (_, body) = c.get(&format!("/sessions/{sid}"));
    assert_eq!(data(&body)["state"], "evaluated");
}

#[test]
fn good_student_over_http_matches_library() {
    let (_srv, c) = server();
    let sid = c.create_session();
    for action in good_student_actions() {
        let (status, body) = c.post(&format!("/sessions/{sid}/actions"), &serde_json::to_value(&action).unwrap());
        assert_eq!(status, 200, "{body}");
    }
    let (_, body) = c.get(&format!("/sessions/{sid}/report"));
    let total = data(&body)["total_score"].as_f64().unwrap();
    assert!((total - 13.25 / 16.0).abs() < 1e-9);

    let (_, body) = c.get(&format!("/sessions/{sid}/explanations"));
    let items = data(&body).as_array().unwrap().clone();
    let (_, body) = c.get(&format!("/sessions/{sid}/export"));
    let export: SessionExport = serde_json::from_value(data(&body).clone()).unwrap();
    assert_eq!(items.len(), export.log.len());
    for (item, entry) in items.iter().zip(&export.log) {
        assert_eq!(item["seq"], entry.seq);
        assert_eq!(item["explanation"]["decision_id"], entry.decision_id());
    }

    let (status, body) = c.get(&format!("/dashboard/sessions/{sid}"));
    assert_eq!(status, 200);
    let view = data(&body);
    let rows = view["rows"].as_array().unwrap();
    assert_eq!(rows.len(), export.log.len());
    assert_eq!(rows[0]["trigger"], "start_case");
    assert_eq!(rows.last().unwrap()["trigger"], "evaluate");
    assert!((view["total_score"].as_f64().unwrap() - total).abs() < 1e-12);
}

#[test]
fn concurrent_sessions_do_not_interfere() {
    let (srv, c) = server();
    let ids: Vec<String> = (0..4).map(|_| c.create_session()).collect();
    let base = srv.base_url();
    let handles: Vec<_> = ids
        .iter()
        .enumerate()
        .map(|(i, sid)| {
            let base = base.clone();
            let sid = sid.clone();
            thread::spawn(move || {
                let c = Client::new(base);
                for _ in 0..=i {
                    let (status, _) = c.post(&format!("/sessions/{sid}/actions"), &json!({ "kind": "order_test", "test_id": "ekg" }));
                    assert_eq!(status, 200);
                }
            })
        })
        .collect();
    for h in handles {
        h.join().unwrap();
    }
    for (i, sid) in ids.iter().enumerate() {
        let (_, body) = c.get(&format!("/sessions/{sid}/log"));
        let entries = data(&body)["entries"].as_array().unwrap().clone();
        assert_eq!(entries.len(), i + 2);
        let seqs: Vec<u64> = entries.iter().map(|e| e["seq"].as_u64().unwrap()).collect();
        assert_eq!(seqs, (1..=(i as u64 + 2)).collect::<Vec<_>>());
    }
}

#[test]
fn unknown_routes_use_the_envelope() {
    let (_srv, c) = server();
    let (status, body) = c.get("/nowhere");
    assert_eq!(status, 404);
    assert_eq!(error_code(&body), "not_found");
    let (status, body) = c.get("/dashboard/sessions/sess-0042");
    assert_eq!(status, 404);
    assert_eq!(error_code(&body), "unknown_session");
}

/// Serve `router` on a free port for the rest of the test process.
fn spawn_generator(router: Router) -> String {
    let (tx, rx) = std::sync::mpsc::channel();
    thread::spawn(move || {
        let runtime = tokio::runtime::Runtime::new().unwrap();
        runtime.block_on(async move {
            let listener = tokio::net::TcpListener::bind("127.0.0.1:0").await.unwrap();
            tx.send(listener.local_addr().unwrap()).unwrap();
            axum::serve(listener, router).await.unwrap();
        });
    });
    format!("http://{}/reply", rx.recv().unwrap())
}

#[test]
fn external_backend_output_is_guarded() {
    // a generator that tries to name the hidden diagnosis
    let url = spawn_generator(Router::new().route(
        "/reply",
        post(|Json(req): Json<Value>| async move {
            let scripted = req["scripted_reply"].as_str().unwrap_or("").to_owned();
            Json(json!({ "text": format!("{scripted} Honestly it feels like GERD, maybe reflux.") }))
        }),
    ));
    let (_srv, c) = server_with(Arc::new(ExternalBackend::new(url)));
    let sid = c.create_session();
    let (status, body) = c.post(
        &format!("/sessions/{sid}/actions"),
        &json!({ "kind": "ask_patient", "text": "Where is the pain?" }),
    );
    assert_eq!(status, 200);
    let text = data(&body)["response"].to_string().to_lowercase();
    assert!(!text.contains("gerd"), "{text}");
    assert!(!text.contains("reflux"), "{text}");
}

#[test]
fn external_backend_failure_falls_back_to_script() {
    // nothing listens on this port
    let listener = std::net::TcpListener::bind("127.0.0.1:0").unwrap();
    let url = format!("http://{}/reply", listener.local_addr().unwrap());
    drop(listener);
    let (_srv, c) = server_with(Arc::new(ExternalBackend::new(url)));
    let sid = c.create_session();
    let (status, body) = c.post(
        &format!("/sessions/{sid}/actions"),
        &json!({ "kind": "ask_patient", "text": "Where is the pain?" }),
    );
    assert_eq!(status, 200);
    let reasons = data(&body)["response"]["explanation"]["reason_codes"].as_array().unwrap().clone();
    assert!(reasons.iter().any(|r| r == "backend_fallback"), "{reasons:?}");
}
