use std::sync::Arc;
use std::time::Instant;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::action::{Action, ActionKind, ExplanationTarget, LogEntry, RouteDecision, StudentAction};
use super::decision_id_for;
use super::progress::Progress;
use crate::agent_core::{build_agent_registry, AgentId, AgentRegistry, AgentResponse, DialogueBackend, ExplanationRecord};
use crate::case_model::{validate_case, ClinicalCase};
use crate::clinical_agents::{
    apply_intervention, exam_perform, explain_diagnosis, order_test, patient_reply, score_evidence, AgentContext,
    AgentError, ObservationSet, PriorQuestion,
};
use crate::diagnostics::Diagnostic;
use crate::evaluation::{explain_evaluation, score_transcript, EvaluationError, FeedbackReport};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SessionState {
    Created,
    Active,
    Concluded,
    Evaluated,
}

impl SessionState {
    pub fn as_str(self) -> &'static str {
        match self {
            SessionState::Created => "created",
            SessionState::Active => "active",
            SessionState::Concluded => "concluded",
            SessionState::Evaluated => "evaluated",
        }
    }

    /// The only legal moves: created→active→concluded→evaluated.
    pub fn can_move_to(self, next: SessionState) -> bool {
        matches!(
            (self, next),
            (SessionState::Created, SessionState::Active)
                | (SessionState::Active, SessionState::Concluded)
                | (SessionState::Concluded, SessionState::Evaluated)
        )
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SupervisorError {
    #[error("unknown case '{0}'")]
    UnknownCase(String),
    #[error("case has {} validation error(s)", .0.len())]
    InvalidCase(Vec<Diagnostic>),
    #[error("session {session_id} is {state:?}, not active")]
    SessionNotActive { session_id: String, state: SessionState },
    #[error("unknown disease '{0}'")]
    UnknownDisease(String),
    #[error("'{}' actions are issued by the supervisor, not by students", .0.as_str())]
    SystemAction(ActionKind),
    #[error("illegal session transition {from:?} -> {to:?}")]
    IllegalTransition { from: SessionState, to: SessionState },
    #[error(transparent)]
    Evaluation(#[from] EvaluationError),
    #[error(transparent)]
    Agent(#[from] AgentError),
}

/// One student's run through one case.
///
/// Actions are applied strictly one at a time through `&mut self`; the log
/// only ever grows.
#[derive(Debug, Clone)]
pub struct Session {
    session_id: String,
    case: Arc<ClinicalCase>,
    registry: AgentRegistry,
    backend: Arc<dyn DialogueBackend>,
    state: SessionState,
    transitions: Vec<SessionState>,
    observations: ObservationSet,
    patient_questions: Vec<PriorQuestion>,
    log: Vec<LogEntry>,
    report: Option<FeedbackReport>,
    started_at: DateTime<Utc>,
    ended_at: Option<DateTime<Utc>>,
}

fn elapsed_ms(start: Instant) -> f64 {
    start.elapsed().as_secs_f64() * 1000.0
}

impl Session {
    /// Initialise every agent for `case` and record the start entry. The
    /// returned session is active.
    pub fn start(
        session_id: impl Into<String>,
        case: Arc<ClinicalCase>,
        backend: Arc<dyn DialogueBackend>,
    ) -> Result<Session, SupervisorError> {
        let errors: Vec<Diagnostic> = validate_case(&case).into_iter().filter(Diagnostic::is_error).collect();
        if !errors.is_empty() {
            return Err(SupervisorError::InvalidCase(errors));
        }
        let clock = Instant::now();
        let registry = build_agent_registry(&case);
        let mut session = Session {
            session_id: session_id.into(),
            case,
            registry,
            backend,
            state: SessionState::Created,
            transitions: vec![SessionState::Created],
            observations: ObservationSet::new(),
            patient_questions: Vec::new(),
            log: Vec::new(),
            report: None,
            started_at: Utc::now(),
            ended_at: None,
        };

        let seq = session.next_seq();
        let decision_id = decision_id_for(&session.session_id, seq);
        let agents: Vec<String> = session
            .registry
            .iter()
            .map(|p| format!("{} ({})", p.display_name, p.agent_id))
            .collect();
        let explanation = ExplanationRecord::builder(&decision_id, AgentId::Supervisor)
            .reason("session_started")
            .reason(format!("agents_initialized:{}", agents.len()))
            .reasons(session.registry.iter().map(|p| format!("agent_ready:{}", p.agent_id)))
            .rule("lifecycle.start")
            .narrative("The start message went through the supervisor, which initialised every agent for this case.")
            .build()
            .map_err(AgentError::from)?;
        let content = format!(
            "Case started: {}. Chief complaint: {}. Agents ready: {}.",
            session.case.title,
            session.case.chief_complaint,
            agents.join(", ")
        );
        let response = AgentResponse::new(content, Vec::new(), explanation, &session.case.forbidden_terms);
        let action = StudentAction {
            action: Action::StartCase {
                case_id: session.case.case_id.clone(),
            },
            issued_at: session.started_at,
        };
        let route = RouteDecision {
            action_seq: seq,
            routed_to: AgentId::Supervisor,
            reason: "case start initialises the session through the supervisor".into(),
            rule_id: "route.start_case".into(),
        };
        session.append(action, route, response.with_elapsed_ms(elapsed_ms(clock)));
        session.transition(SessionState::Active)?;
        Ok(session)
    }

    pub fn session_id(&self) -> &str {
        &self.session_id
    }

    pub fn case(&self) -> &ClinicalCase {
        &self.case
    }

    pub fn case_arc(&self) -> &Arc<ClinicalCase> {
        &self.case
    }

    pub fn registry(&self) -> &AgentRegistry {
        &self.registry
    }

    pub fn state(&self) -> SessionState {
        self.state
    }

    /// Every state the session has been in, in order.
    pub fn transitions(&self) -> &[SessionState] {
        &self.transitions
    }

    pub fn observations(&self) -> &ObservationSet {
        &self.observations
    }

    pub fn log(&self) -> &[LogEntry] {
        &self.log
    }

    /// Entries with `seq > since`.
    pub fn log_since(&self, since: u64) -> &[LogEntry] {
        let start = self.log.partition_point(|e| e.seq <= since);
        &self.log[start..]
    }

    pub fn report(&self) -> Option<&FeedbackReport> {
        self.report.as_ref()
    }

    pub fn started_at(&self) -> DateTime<Utc> {
        self.started_at
    }

    pub fn ended_at(&self) -> Option<DateTime<Utc>> {
        self.ended_at
    }

    pub fn explanations(&self) -> impl Iterator<Item = &ExplanationRecord> {
        self.log.iter().map(|e| e.response.explanation())
    }

    fn next_seq(&self) -> u64 {
        self.log.len() as u64 + 1
    }

    fn append(&mut self, action: StudentAction, route: RouteDecision, response: AgentResponse) -> &LogEntry {
        let seq = self.next_seq();
        debug_assert_eq!(route.action_seq, seq);
        self.log.push(LogEntry {
            seq,
            action,
            route,
            response,
        });
        &self.log[self.log.len() - 1]
    }

    fn transition(&mut self, next: SessionState) -> Result<(), SupervisorError> {
        if !self.state.can_move_to(next) {
            return Err(SupervisorError::IllegalTransition {
                from: self.state,
                to: next,
            });
        }
        self.state = next;
        self.transitions.push(next);
        Ok(())
    }

    fn ensure_active(&self) -> Result<(), SupervisorError> {
        if self.state == SessionState::Active {
            Ok(())
        } else {
            Err(SupervisorError::SessionNotActive {
                session_id: self.session_id.clone(),
                state: self.state,
            })
        }
    }

    fn context(&self) -> AgentContext<'_> {
        AgentContext {
            case: &self.case,
            registry: &self.registry,
            backend: self.backend.as_ref(),
        }
    }

    fn route_for(action: &Action) -> RouteParts {
        let kind = action.kind();
        match action {
            Action::RequestExplanation { target } => RouteParts {
                agent: target.agent,
                reason: format!("explanation requested from the {} agent", target.agent),
                rule_id: "route.request_explanation".into(),
            },
            _ => {
                let agent = kind.fixed_route().expect("only request_explanation lacks a fixed route");
                RouteParts {
                    agent,
                    reason: format!("{} actions go to the {agent} agent", kind.as_str()),
                    rule_id: format!("route.{}", kind.as_str()),
                }
            }
        }
    }

    /// Route one student action to its agent and log the outcome.
    ///
    /// Agent-level failures (unknown exam, unknown test, ...) become logged
    /// error responses with explanations; only lifecycle problems are
    /// returned as errors, and those leave the log untouched.
    pub fn route_action(&mut self, action: StudentAction) -> Result<LogEntry, SupervisorError> {
        let kind = action.kind();
        if !kind.is_student() {
            return Err(SupervisorError::SystemAction(kind));
        }
        self.ensure_active()?;
        if let Action::EndCase { diagnosis } = &action.action {
            let diagnosis = diagnosis.to_string();
            let seq = self.conclude_with(&diagnosis, action)?;
            return Ok(self.log[(seq - 1) as usize].clone());
        }

        let clock = Instant::now();
        let seq = self.next_seq();
        let decision_id = decision_id_for(&self.session_id, seq);
        let route = Self::route_for(&action.action);
        let response = self.dispatch(&action.action, route.agent, &decision_id)?;
        let route = RouteDecision {
            action_seq: seq,
            routed_to: route.agent,
            reason: route.reason,
            rule_id: route.rule_id,
        };
        let response = response.with_elapsed_ms(elapsed_ms(clock));
        Ok(self.append(action, route, response).clone())
    }

    fn dispatch(&mut self, action: &Action, agent: AgentId, decision_id: &str) -> Result<AgentResponse, SupervisorError> {
        let result = match action {
            Action::AskPatient { text } => {
                let ctx = AgentContext {
                    case: &self.case,
                    registry: &self.registry,
                    backend: self.backend.as_ref(),
                };
                let result = patient_reply(ctx, &mut self.observations, &self.patient_questions, text, decision_id);
                self.patient_questions
                    .push(PriorQuestion::new(&self.case, decision_id, text.as_str()));
                result
            }
            Action::RequestExam { exam_id } => {
                let ctx = AgentContext {
                    case: &self.case,
                    registry: &self.registry,
                    backend: self.backend.as_ref(),
                };
                exam_perform(ctx, &mut self.observations, exam_id.as_str(), decision_id)
            }
            Action::OrderTest { test_id } => {
                let ctx = AgentContext {
                    case: &self.case,
                    registry: &self.registry,
                    backend: self.backend.as_ref(),
                };
                order_test(ctx, &mut self.observations, test_id.as_str(), decision_id)
            }
            Action::Intervene { intervention_id } => {
                apply_intervention(self.context(), &self.observations, intervention_id.as_str(), decision_id)
                    .map(|(response, _)| response)
            }
            Action::AskSupervisor { .. } => Ok(self.progress_reply(decision_id)?),
            Action::RequestExplanation { target } => self.explain(target, decision_id),
            Action::StartCase { .. } | Action::EndCase { .. } | Action::Evaluate => {
                unreachable!("lifecycle actions are handled before dispatch")
            }
        };
        match result {
            Ok(response) => Ok(response),
            Err(AgentError::Explanation(e)) => Err(AgentError::Explanation(e).into()),
            Err(err) => Ok(self.error_response(agent, decision_id, err.code(), &err.to_string())?),
        }
    }

    fn error_response(
        &self,
        agent: AgentId,
        decision_id: &str,
        code: &str,
        message: &str,
    ) -> Result<AgentResponse, SupervisorError> {
        let explanation = ExplanationRecord::builder(decision_id, agent)
            .reason(format!("error:{code}"))
            .rule(format!("{agent}.error"))
            .narrative(format!("The request could not be carried out: {message}."))
            .build()
            .map_err(AgentError::from)?;
        Ok(AgentResponse::new(
            format!("Request not carried out: {message}."),
            Vec::new(),
            explanation,
            &self.case.forbidden_terms,
        ))
    }

    /// Answer an explanation request addressed to one agent.
    fn explain(&self, target: &ExplanationTarget, decision_id: &str) -> Result<AgentResponse, AgentError> {
        let case = &self.case;
        let terms = &case.forbidden_terms;
        let subject = target.subject.as_deref();
        match target.agent {
            AgentId::Supervisor => self.progress_reply(decision_id).map_err(|e| match e {
                SupervisorError::Agent(a) => a,
                other => unreachable!("progress reply only fails on explanations: {other}"),
            }),
            AgentId::Diagnostic => match subject {
                Some(disease) => {
                    let record = explain_diagnosis(case, &self.observations, disease, decision_id)?;
                    let score = score_evidence(case, &self.observations)
                        .into_iter()
                        .find(|s| s.disease == disease)
                        .expect("explained disease is in the differential");
                    let content = format!(
                        "Evidence summary for the requested diagnosis: score {:.2} from {} observed finding(s); {}.",
                        score.score,
                        score.contributions.len(),
                        if record.has_reason("status:ruled_out") { "ruled out" } else { "still a candidate" }
                    );
                    Ok(AgentResponse::new(content, Vec::new(), record, terms))
                }
                None => {
                    let scores = score_evidence(case, &self.observations);
                    let record = ExplanationRecord::builder(decision_id, AgentId::Diagnostic)
                        .reasons(scores.iter().enumerate().map(|(i, s)| format!("rank:{}:{}", i + 1, s.disease)))
                        .contributions(
                            scores
                                .iter()
                                .map(|s| crate::agent_core::Contribution::new(s.disease.as_str(), s.score)),
                        )
                        .rule("evidence.additive_score")
                        .narrative(format!(
                            "Differential ranked by additive evidence over {} observed finding(s).",
                            self.observations.len()
                        ))
                        .build()?;
                    let content = format!(
                        "Differential ranking over {} observed finding(s) is attached to this explanation.",
                        self.observations.len()
                    );
                    Ok(AgentResponse::new(content, Vec::new(), record, terms))
                }
            },
            AgentId::Evaluation => {
                let report = match &self.report {
                    Some(r) => r.clone(),
                    None => score_transcript(case, &self.session_id, &self.log).map_err(|e| match e {
                        EvaluationError::Explanation(x) => AgentError::Explanation(x),
                        other => unreachable!("valid case has a rubric: {other}"),
                    })?,
                };
                let record = match subject {
                    Some(item) => match explain_evaluation(&report, item) {
                        Ok(r) => r,
                        Err(EvaluationError::UnknownItem(_)) => {
                            let e = ExplanationRecord::builder(decision_id, AgentId::Evaluation)
                                .reason("error:unknown_item")
                                .rule("evaluation.error")
                                .narrative(format!("No rubric item '{item}'."))
                                .build()?;
                            return Ok(AgentResponse::new(
                                format!("Request not carried out: unknown rubric item '{item}'."),
                                Vec::new(),
                                e,
                                terms,
                            ));
                        }
                        Err(EvaluationError::Explanation(x)) => return Err(x.into()),
                        Err(EvaluationError::EmptyRubric) => unreachable!("valid case has a rubric"),
                    },
                    None => report.explanation.clone(),
                };
                let record = rebase(record, decision_id, &[])?;
                let content = format!(
                    "Provisional rubric standing: {:.1}% of the weighted criteria met so far.",
                    report.total_score * 100.0
                );
                Ok(AgentResponse::new(content, Vec::new(), record, terms))
            }
            agent => {
                let earlier = self.log.iter().rev().find(|e| {
                    e.response.agent_id() == agent && subject.is_none_or(|s| e.decision_id() == s)
                });
                match earlier {
                    Some(entry) => {
                        let old = entry.response.explanation();
                        let record = rebase(old.clone(), decision_id, &[format!("explains:{}", old.decision_id())])?;
                        let content = format!("Explanation of decision {} (log entry {}).", old.decision_id(), entry.seq);
                        Ok(AgentResponse::new(content, Vec::new(), record, terms))
                    }
                    None => {
                        let record = ExplanationRecord::builder(decision_id, agent)
                            .reason("error:no_decision")
                            .rule(format!("{agent}.error"))
                            .narrative("There is no earlier decision by this agent to explain.")
                            .build()?;
                        Ok(AgentResponse::new(
                            "Request not carried out: no matching decision to explain.",
                            Vec::new(),
                            record,
                            terms,
                        ))
                    }
                }
            }
        }
    }

    /// Case-progression summary from the log. Always reactive, never
    /// discloses the diagnosis.
    pub fn supervisor_reply(&self, _text: &str) -> AgentResponse {
        let decision_id = decision_id_for(&self.session_id, self.next_seq());
        self.progress_reply(&decision_id)
            .expect("progress explanations always carry reason codes")
    }

    pub fn progress(&self) -> Progress {
        Progress::from_log(&self.case, &self.log, &self.observations)
    }

    fn progress_reply(&self, decision_id: &str) -> Result<AgentResponse, SupervisorError> {
        let progress = self.progress();
        let explanation = ExplanationRecord::builder(decision_id, AgentId::Supervisor)
            .reasons(progress.reason_codes())
            .reason(format!("state:{}", self.state.as_str()))
            .rule("progression.phase_order")
            .narrative(progress.narrative())
            .build()
            .map_err(AgentError::from)?;
        Ok(AgentResponse::new(
            progress.summary(),
            Vec::new(),
            explanation,
            &self.case.forbidden_terms,
        ))
    }

    /// Submit the final diagnosis: logs the conclusion, scores the
    /// transcript, logs the report and leaves the session evaluated.
    pub fn conclude(&mut self, diagnosis: &str) -> Result<&FeedbackReport, SupervisorError> {
        self.ensure_active()?;
        self.conclude_with(diagnosis, StudentAction::end_case(diagnosis))?;
        Ok(self.report.as_ref().expect("report set on conclusion"))
    }

    /// Returns the seq of the end-case entry.
    fn conclude_with(&mut self, diagnosis: &str, action: StudentAction) -> Result<u64, SupervisorError> {
        self.ensure_active()?;
        if !self.case.has_disease(diagnosis) {
            return Err(SupervisorError::UnknownDisease(diagnosis.to_owned()));
        }

        let clock = Instant::now();
        let end_seq = self.next_seq();
        let decision_id = decision_id_for(&self.session_id, end_seq);
        let explanation = ExplanationRecord::builder(&decision_id, AgentId::Evaluation)
            .reason("diagnosis_submitted")
            .reason("handoff:evaluation")
            .rule("lifecycle.conclude")
            .narrative("The student ended the case; the transcript is handed to the evaluation agent.")
            .build()
            .map_err(AgentError::from)?;
        let response = AgentResponse::new(
            "Diagnosis submitted. The case is closed and your transcript is being scored.",
            Vec::new(),
            explanation,
            &self.case.forbidden_terms,
        );
        let route = RouteDecision {
            action_seq: end_seq,
            routed_to: AgentId::Evaluation,
            reason: "end_case hands the transcript to the evaluation agent".into(),
            rule_id: "route.end_case".into(),
        };
        self.append(action, route, response.with_elapsed_ms(elapsed_ms(clock)));
        self.transition(SessionState::Concluded)?;

        let clock = Instant::now();
        let report = score_transcript(&self.case, &self.session_id, &self.log)?;
        let seq = self.next_seq();
        let response = AgentResponse::new(
            report.narrative.clone(),
            Vec::new(),
            report.explanation.clone(),
            &self.case.forbidden_terms,
        );
        let route = RouteDecision {
            action_seq: seq,
            routed_to: AgentId::Evaluation,
            reason: "a concluded session is scored against the case rubric".into(),
            rule_id: "route.evaluate".into(),
        };
        let now = Utc::now();
        let action = StudentAction {
            action: Action::Evaluate,
            issued_at: now,
        };
        self.append(action, route, response.with_elapsed_ms(elapsed_ms(clock)));
        self.report = Some(report);
        self.ended_at = Some(now);
        self.transition(SessionState::Evaluated)?;
        Ok(end_seq)
    }
}

struct RouteParts {
    agent: AgentId,
    reason: String,
    rule_id: String,
}

/// Re-issue `record` under a new decision id, keeping its content.
fn rebase(record: ExplanationRecord, decision_id: &str, extra: &[String]) -> Result<ExplanationRecord, AgentError> {
    Ok(ExplanationRecord::builder(decision_id, record.agent_id())
        .reasons(record.reason_codes().iter().cloned())
        .reasons(extra.iter().cloned())
        .contributions(record.contributions().iter().cloned())
        .rules(record.rule_ids().iter().cloned())
        .narrative(record.narrative())
        .build()?)
}
