//! JSON-over-HTTP session service.
//!
//! | method | path | body / query | result |
//! |---|---|---|---|
//! | GET | `/cases` | | `[CaseSummary]` |
//! | GET | `/cases/{id}` | | `CaseView` |
//! | POST | `/sessions` | `{case_id}` | `SessionView` (201) |
//! | GET | `/sessions/{id}` | | `SessionView` |
//! | POST | `/sessions/{id}/actions` | `StudentAction` | `LogEntry` |
//! | GET | `/sessions/{id}/log` | `?since=<seq>` | `LogPage` |
//! | GET | `/sessions/{id}/explanations` | | `[ExplanationItem]` |
//! | POST | `/sessions/{id}/conclude` | `{diagnosis}` | `FeedbackReport` |
//! | GET | `/sessions/{id}/report` | | `FeedbackReport` |
//! | GET | `/sessions/{id}/export` | | `SessionExport` |
//! | GET | `/dashboard/sessions/{id}` | | `DashboardView` |
//!
//! Every body is a [`WireEnvelope`]. Unknown ids give 404, actions on a
//! session that is not active give 409, malformed or semantically invalid
//! bodies give 422 with the offending field in `details.field`.

use std::future::IntoFuture;
use std::net::SocketAddr;
use std::sync::Arc;
use std::thread;

use axum::body::Bytes;
use axum::extract::{Path, Query, State};
use axum::http::StatusCode;
use axum::routing::{get, post};
use axum::{Json, Router};
use clinsim_core::evaluation::FeedbackReport;
use clinsim_core::supervisor::{ActionKind, LogEntry, SessionExport};
use clinsim_core::{Session, StudentAction};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use tokio::net::TcpListener;
use tokio::sync::oneshot;

use crate::dashboard::DashboardView;
use crate::store::{SessionStore, SharedSession};
use crate::wire::{
    ApiError, CaseSummary, CaseView, ConcludeRequest, CreateSessionRequest, ExplanationItem, LogPage, SessionView,
    WireEnvelope,
};

type Reply<T> = Result<(StatusCode, Json<WireEnvelope<T>>), ApiError>;

fn ok<T>(data: T) -> Reply<T> {
    Ok((StatusCode::OK, Json(WireEnvelope::success(data))))
}

pub fn router(store: Arc<SessionStore>) -> Router {
    Router::new()
        .route("/cases", get(list_cases))
        .route("/cases/{id}", get(get_case))
        .route("/sessions", post(create_session))
        .route("/sessions/{id}", get(get_session))
        .route("/sessions/{id}/actions", post(post_action))
        .route("/sessions/{id}/log", get(get_log))
        .route("/sessions/{id}/explanations", get(get_explanations))
        .route("/sessions/{id}/conclude", post(conclude))
        .route("/sessions/{id}/report", get(get_report))
        .route("/sessions/{id}/export", get(get_export))
        .route("/dashboard/sessions/{id}", get(get_dashboard))
        .fallback(|| async { ApiError::new(StatusCode::NOT_FOUND, "not_found", "no such route") })
        .with_state(store)
}

/// Serve until `shutdown` resolves.
pub async fn serve(
    listener: TcpListener,
    store: Arc<SessionStore>,
    shutdown: impl std::future::Future<Output = ()> + Send + 'static,
) -> std::io::Result<()> {
    axum::serve(listener, router(store)).with_graceful_shutdown(shutdown).await
}

/// A server running on its own runtime thread; stops when dropped.
#[derive(Debug)]
pub struct BackgroundServer {
    addr: SocketAddr,
    shutdown: Option<oneshot::Sender<()>>,
    thread: Option<thread::JoinHandle<()>>,
}

impl BackgroundServer {
    /// Bind `addr` (port 0 picks a free port) and start serving.
    pub fn start(store: Arc<SessionStore>, addr: SocketAddr) -> std::io::Result<Self> {
        let runtime = tokio::runtime::Builder::new_multi_thread().enable_all().build()?;
        let listener = runtime.block_on(TcpListener::bind(addr))?;
        let addr = listener.local_addr()?;
        let (tx, rx) = oneshot::channel::<()>();
        let thread = thread::spawn(move || {
            let server = axum::serve(listener, router(store))
                .with_graceful_shutdown(async {
                    let _ = rx.await;
                })
                .into_future();
            let _ = runtime.block_on(server);
        });
        Ok(Self {
            addr,
            shutdown: Some(tx),
            thread: Some(thread),
        })
    }

    pub fn addr(&self) -> SocketAddr {
        self.addr
    }

    pub fn base_url(&self) -> String {
        format!("http://{}", self.addr)
    }
}

impl Drop for BackgroundServer {
    fn drop(&mut self) {
        if let Some(tx) = self.shutdown.take() {
            let _ = tx.send(());
        }
        if let Some(t) = self.thread.take() {
            let _ = t.join();
        }
    }
}

fn unprocessable(code: &str, message: impl Into<String>) -> ApiError {
    ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, code, message)
}

/// First backticked name in a serde message (`missing field `x``).
fn field_in_message(message: &str) -> Option<&str> {
    let start = message.find('`')? + 1;
    let len = message[start..].find('`')?;
    Some(&message[start..start + len])
}

fn parse_json(body: &[u8]) -> Result<Value, ApiError> {
    serde_json::from_slice(body).map_err(|e| {
        unprocessable("malformed_json", e.to_string()).with_details(json!({ "line": e.line(), "column": e.column() }))
    })
}

fn parse_body<T: DeserializeOwned>(body: &[u8]) -> Result<T, ApiError> {
    let value = parse_json(body)?;
    serde_json::from_value(value).map_err(|e| {
        let message = e.to_string();
        let details = field_in_message(&message).map_or(Value::Null, |f| json!({ "field": f }));
        unprocessable("malformed_body", message).with_details(details)
    })
}

/// Decode an action body, naming the field at fault.
pub fn parse_action(body: &[u8]) -> Result<StudentAction, ApiError> {
    let value = parse_json(body)?;
    let Some(kind) = value.get("kind") else {
        return Err(unprocessable("malformed_action", "missing field `kind`").with_details(json!({ "field": "kind" })));
    };
    let kind: ActionKind = serde_json::from_value(kind.clone()).map_err(|_| {
        unprocessable("malformed_action", format!("unknown action kind {kind}"))
            .with_details(json!({ "field": "kind", "value": kind }))
    })?;
    let action: StudentAction = serde_json::from_value(value).map_err(|e| {
        let message = e.to_string();
        let field = field_in_message(&message).unwrap_or("kind").to_owned();
        unprocessable("malformed_action", message).with_details(json!({ "field": field, "kind": kind }))
    })?;
    Ok(action)
}

fn session(store: &SessionStore, id: &str) -> Result<SharedSession, ApiError> {
    store.session(id).ok_or_else(|| ApiError::unknown_session(id))
}

/// Run `f` on the session off the async workers: agent calls may block on
/// an external backend.
async fn with_session<T, F>(store: &SessionStore, id: &str, f: F) -> Result<T, ApiError>
where
    T: Send + 'static,
    F: FnOnce(&mut Session) -> Result<T, ApiError> + Send + 'static,
{
    let shared = session(store, id)?;
    tokio::task::spawn_blocking(move || f(&mut shared.lock()))
        .await
        .map_err(|e| ApiError::internal(e.to_string()))?
}

fn session_view(s: &Session) -> SessionView {
    SessionView {
        session_id: s.session_id().to_owned(),
        case_id: s.case().case_id.clone(),
        state: s.state(),
        last_seq: s.log().last().map_or(0, |e| e.seq),
        progress: s.progress(),
    }
}

async fn list_cases(State(store): State<Arc<SessionStore>>) -> Reply<Vec<CaseSummary>> {
    ok(store.cases().map(|c| CaseSummary::from(c.as_ref())).collect())
}

async fn get_case(State(store): State<Arc<SessionStore>>, Path(id): Path<String>) -> Reply<CaseView> {
    let case = store.case(&id).ok_or_else(|| ApiError::unknown_case(&id))?;
    ok(CaseView::from(case.as_ref()))
}

async fn create_session(State(store): State<Arc<SessionStore>>, body: Bytes) -> Reply<SessionView> {
    let req: CreateSessionRequest = parse_body(&body)?;
    let shared = store.create(&req.case_id)?;
    let view = session_view(&shared.lock());
    Ok((StatusCode::CREATED, Json(WireEnvelope::success(view))))
}

async fn get_session(State(store): State<Arc<SessionStore>>, Path(id): Path<String>) -> Reply<SessionView> {
    let shared = session(&store, &id)?;
    let view = session_view(&shared.lock());
    ok(view)
}

async fn post_action(State(store): State<Arc<SessionStore>>, Path(id): Path<String>, body: Bytes) -> Reply<LogEntry> {
    let action = parse_action(&body)?;
    ok(with_session(&store, &id, move |s| Ok(s.route_action(action)?)).await?)
}

#[derive(Debug, Clone, Copy, Default, Serialize, Deserialize)]
struct LogQuery {
    #[serde(default)]
    since: u64,
}

async fn get_log(
    State(store): State<Arc<SessionStore>>,
    Path(id): Path<String>,
    query: Result<Query<LogQuery>, axum::extract::rejection::QueryRejection>,
) -> Reply<LogPage> {
    let Query(query) = query.map_err(|e| unprocessable("malformed_query", e.body_text()).with_details(json!({ "field": "since" })))?;
    let shared = session(&store, &id)?;
    let s = shared.lock();
    ok(LogPage {
        session_id: id,
        since: query.since,
        last_seq: s.log().last().map_or(0, |e| e.seq),
        state: s.state(),
        entries: s.log_since(query.since).to_vec(),
    })
}

async fn get_explanations(State(store): State<Arc<SessionStore>>, Path(id): Path<String>) -> Reply<Vec<ExplanationItem>> {
    let shared = session(&store, &id)?;
    let s = shared.lock();
    ok(s.log()
        .iter()
        .map(|e| ExplanationItem {
            seq: e.seq,
            explanation: e.response.explanation().clone(),
        })
        .collect())
}

async fn conclude(State(store): State<Arc<SessionStore>>, Path(id): Path<String>, body: Bytes) -> Reply<FeedbackReport> {
    let req: ConcludeRequest = parse_body(&body)?;
    ok(with_session(&store, &id, move |s| Ok(s.conclude(&req.diagnosis)?.clone())).await?)
}

async fn get_report(State(store): State<Arc<SessionStore>>, Path(id): Path<String>) -> Reply<FeedbackReport> {
    let shared = session(&store, &id)?;
    let s = shared.lock();
    let report = s.report().cloned().ok_or_else(|| {
        ApiError::new(StatusCode::CONFLICT, "report_not_ready", "the session has not been concluded")
            .with_details(json!({ "state": s.state() }))
    })?;
    ok(report)
}

async fn get_export(State(store): State<Arc<SessionStore>>, Path(id): Path<String>) -> Reply<SessionExport> {
    let shared = session(&store, &id)?;
    let export = shared.lock().export();
    ok(export)
}

async fn get_dashboard(State(store): State<Arc<SessionStore>>, Path(id): Path<String>) -> Reply<DashboardView> {
    let shared = session(&store, &id)?;
    let view = DashboardView::from(&*shared.lock());
    ok(view)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn action_errors_name_the_field() {
        let e = parse_action(br#"{"kind":"teleport"}"#).unwrap_err();
        assert_eq!(e.status, StatusCode::UNPROCESSABLE_ENTITY);
        assert_eq!(e.error.details["field"], "kind");

        let e = parse_action(br#"{"text":"hi"}"#).unwrap_err();
        assert_eq!(e.error.details["field"], "kind");

        let e = parse_action(br#"{"kind":"order_test"}"#).unwrap_err();
        assert_eq!(e.error.details["field"], "test_id");

        let e = parse_action(b"{").unwrap_err();
        assert_eq!(e.error.code, "malformed_json");

        assert!(parse_action(br#"{"kind":"order_test","test_id":"ekg"}"#).is_ok());
    }
}
