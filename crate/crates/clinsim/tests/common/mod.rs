#![allow(dead_code)]

use std::sync::Arc;

use clinsim::api::BackgroundServer;
use clinsim::store::SessionStore;
use clinsim_core::agent_core::{DialogueBackend, ScriptBackend};
use clinsim_core::reference::chest_pain_case;
use serde_json::Value;

pub const CASE_ID: &str = "chestpain-01";

pub fn store_with(backend: Arc<dyn DialogueBackend>) -> Arc<SessionStore> {
    Arc::new(SessionStore::with_cases(backend, [chest_pain_case()]).unwrap())
}

pub fn server() -> (BackgroundServer, Client) {
    server_with(Arc::new(ScriptBackend))
}

pub fn server_with(backend: Arc<dyn DialogueBackend>) -> (BackgroundServer, Client) {
    let server = BackgroundServer::start(store_with(backend), "127.0.0.1:0".parse().unwrap()).unwrap();
    let client = Client::new(server.base_url());
    (server, client)
}

/// Minimal JSON client returning `(status, body)` for any status.
pub struct Client {
    base: String,
    agent: ureq::Agent,
}

impl Client {
    pub fn new(base: String) -> Self {
        let agent = ureq::Agent::config_builder().http_status_as_error(false).build().into();
        Self { base, agent }
    }

    pub fn get(&self, path: &str) -> (u16, Value) {
        let mut resp = self.agent.get(&format!("{}{path}", self.base)).call().unwrap();
        let status = resp.status().as_u16();
        (status, resp.body_mut().read_json().unwrap())
    }

    pub fn post(&self, path: &str, body: &Value) -> (u16, Value) {
        self.post_raw(path, &body.to_string())
    }

    pub fn post_raw(&self, path: &str, body: &str) -> (u16, Value) {
        let mut resp = self
            .agent
            .post(&format!("{}{path}", self.base))
            .header("content-type", "application/json")
            .send(body)
            .unwrap();
        let status = resp.status().as_u16();
        (status, resp.body_mut().read_json().unwrap())
    }

    /// Create a session and return its id.
    pub fn create_session(&self) -> String {
        let (status, body) = self.post("/sessions", &serde_json::json!({ "case_id": CASE_ID }));
        assert_eq!(status, 201, "{body}");
        body["data"]["session_id"].as_str().unwrap().to_owned()
    }
}
