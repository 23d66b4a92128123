use std::collections::{BTreeSet, HashSet};

use super::types::ClinicalCase;
use crate::agent_core::find_forbidden;
use crate::diagnostics::Diagnostic;
use crate::evaluation::EventMatcher;
use crate::ids::{is_snake_case, FindingId};
use crate::supervisor::ActionKind;

pub(crate) const LEAK: &str = "leak";
pub(crate) const DANGLING: &str = "dangling_reference";

/// A diagnostic plus, for dangling references, the id that failed to resolve.
pub(crate) struct Issue {
    pub diagnostic: Diagnostic,
    pub dangling_id: Option<String>,
}

/// Every invariant violation in `case`, ordered by path. Empty iff valid.
pub fn validate_case(case: &ClinicalCase) -> Vec<Diagnostic> {
    check(case).into_iter().map(|i| i.diagnostic).collect()
}

pub(crate) fn check(case: &ClinicalCase) -> Vec<Issue> {
    let mut v = Validator {
        case,
        issues: Vec::new(),
        discoverable: case.discoverable_findings(),
    };
    v.header();
    v.differential();
    v.script();
    v.exams();
    v.tests();
    v.evidence();
    v.interventions();
    v.rubric();
    v.forbidden_terms();
    v.leaks();
    v.issues.sort_by(|a, b| {
        let (a, b) = (&a.diagnostic, &b.diagnostic);
        (&a.path, &a.code, &a.message).cmp(&(&b.path, &b.code, &b.message))
    });
    v.issues
}

struct Validator<'a> {
    case: &'a ClinicalCase,
    issues: Vec<Issue>,
    discoverable: BTreeSet<FindingId>,
}

impl Validator<'_> {
    fn error(&mut self, code: &str, path: String, message: String) {
        self.issues.push(Issue {
            diagnostic: Diagnostic::error(code, path, message),
            dangling_id: None,
        });
    }

    fn dangling(&mut self, path: String, what: &str, id: &str) {
        self.issues.push(Issue {
            diagnostic: Diagnostic::error(DANGLING, path, format!("unknown {what} '{id}'")),
            dangling_id: Some(id.to_owned()),
        });
    }

    fn id(&mut self, path: String, id: &str) {
        if !is_snake_case(id) {
            self.error("id_format", path, format!("id '{id}' is not lowercase snake_case"));
        }
    }

    fn finding_ref(&mut self, path: String, finding: &FindingId) {
        if !self.discoverable.contains(finding) {
            self.dangling(path, "finding", finding.as_str());
        }
    }

    fn non_empty(&mut self, path: String, text: &str) {
        if text.trim().is_empty() {
            self.error("empty_text", path, "text must be non-empty".into());
        }
    }

    fn header(&mut self) {
        let case = self.case;
        let ok = !case.case_id.is_empty()
            && case
                .case_id
                .chars()
                .all(|c| c.is_ascii_lowercase() || c.is_ascii_digit() || c == '_' || c == '-');
        if !ok {
            self.error(
                "id_format",
                "case_id".into(),
                format!("case id '{}' must be lowercase [a-z0-9_-]", case.case_id),
            );
        }
        self.non_empty("title".into(), &case.title);
        self.non_empty("chief_complaint".into(), &case.chief_complaint);
        if !(case.rule_out_threshold.is_finite() && case.rule_out_threshold < 0.0) {
            self.error(
                "threshold",
                "rule_out_threshold".into(),
                format!("rule_out_threshold must be a finite negative number, got {}", case.rule_out_threshold),
            );
        }
    }

    fn differential(&mut self) {
        let case = self.case;
        if case.differential.is_empty() {
            self.error("empty_list", "differential".into(), "differential must be non-empty".into());
        }
        let mut seen = HashSet::new();
        for (i, d) in case.differential.iter().enumerate() {
            self.id(format!("differential[{i}]"), d.as_str());
            if !seen.insert(d) {
                self.error("duplicate_id", format!("differential[{i}]"), format!("duplicate disease '{d}'"));
            }
        }
        if !case.has_disease(case.hidden_diagnosis.as_str()) {
            self.dangling("hidden_diagnosis".into(), "disease", case.hidden_diagnosis.as_str());
        }
    }

    fn script(&mut self) {
        let case = self.case;
        let mut seen = HashSet::new();
        for (i, entry) in case.symptom_script.iter().enumerate() {
            let path = format!("symptom_script[{i}]");
            self.id(format!("{path}.entry_id"), &entry.entry_id);
            if !seen.insert(entry.entry_id.as_str()) {
                self.error("duplicate_id", format!("{path}.entry_id"), format!("duplicate entry '{}'", entry.entry_id));
            }
            if entry.keywords.is_empty() {
                self.error("empty_list", format!("{path}.keywords"), "keywords must be non-empty".into());
            }
            for kw in &entry.keywords {
                if kw.trim().is_empty() || *kw != kw.to_lowercase() {
                    self.error("keyword_format", format!("{path}.keywords"), format!("keyword '{kw}' must be non-empty lowercase"));
                }
            }
            self.non_empty(format!("{path}.response_text"), &entry.response_text);
            for (j, f) in entry.reveals.iter().enumerate() {
                self.id(format!("{path}.reveals[{j}]"), f.as_str());
            }
        }
    }

    fn exams(&mut self) {
        for (key, exam) in &self.case.exam_findings {
            let path = format!("exam_findings.{key}");
            self.id(path.clone(), key.as_str());
            if exam.exam_id != *key {
                self.error("key_mismatch", format!("{path}.exam_id"), format!("exam_id '{}' differs from its key", exam.exam_id));
            }
            self.non_empty(format!("{path}.result_text"), &exam.result_text);
            for (j, f) in exam.finding_ids.iter().enumerate() {
                self.id(format!("{path}.finding_ids[{j}]"), f.as_str());
            }
            for (name, vital) in exam.vitals.iter().flatten() {
                if !vital.value.is_finite() {
                    self.error("non_finite", format!("{path}.vitals.{name}"), "vital value must be finite".into());
                }
            }
        }
    }

    fn tests(&mut self) {
        for (key, test) in &self.case.test_catalog {
            let path = format!("test_catalog.{key}");
            self.id(path.clone(), key.as_str());
            if test.test_id != *key {
                self.error("key_mismatch", format!("{path}.test_id"), format!("test_id '{}' differs from its key", test.test_id));
            }
            self.non_empty(format!("{path}.result_text"), &test.result_text);
            for (j, f) in test.finding_ids.iter().enumerate() {
                self.id(format!("{path}.finding_ids[{j}]"), f.as_str());
            }
        }
    }

    fn evidence(&mut self) {
        let case = self.case;
        let mut seen = HashSet::new();
        for (i, link) in case.evidence_links.iter().enumerate() {
            let path = format!("evidence_links[{i}]");
            if !case.has_disease(link.disease.as_str()) {
                self.dangling(format!("{path}.disease"), "disease", link.disease.as_str());
            }
            self.finding_ref(format!("{path}.finding"), &link.finding);
            if !link.weight.is_finite() {
                self.error("non_finite", format!("{path}.weight"), "weight must be finite".into());
            }
            if !seen.insert((&link.disease, &link.finding)) {
                self.error(
                    "duplicate_evidence",
                    path,
                    format!("duplicate link ({}, {})", link.disease, link.finding),
                );
            }
        }
    }

    fn interventions(&mut self) {
        let case = self.case;
        let mut seen = HashSet::new();
        for (i, rule) in case.intervention_protocol.iter().enumerate() {
            let path = format!("intervention_protocol[{i}]");
            self.id(format!("{path}.intervention_id"), rule.intervention_id.as_str());
            if !seen.insert(&rule.intervention_id) {
                self.error(
                    "duplicate_id",
                    format!("{path}.intervention_id"),
                    format!("duplicate intervention '{}'", rule.intervention_id),
                );
            }
            if let Some(f) = rule.indicated_if.intersection(&rule.contraindicated_if).next() {
                self.error(
                    "conflicting_rule",
                    path.clone(),
                    format!("finding '{f}' is both an indication and a contraindication"),
                );
            }
            if rule.reason_code.trim().is_empty() {
                self.error("empty_text", format!("{path}.reason_code"), "reason_code must be non-empty".into());
            }
            self.non_empty(format!("{path}.outcome_text"), &rule.outcome_text);
            for f in &rule.indicated_if {
                self.finding_ref(format!("{path}.indicated_if"), f);
            }
            for f in &rule.contraindicated_if {
                self.finding_ref(format!("{path}.contraindicated_if"), f);
            }
        }
    }

    fn rubric(&mut self) {
        let case = self.case;
        if case.rubric.is_empty() {
            self.error("empty_rubric", "rubric".into(), "rubric must be non-empty".into());
        }
        let mut seen = HashSet::new();
        for (i, item) in case.rubric.iter().enumerate() {
            let path = format!("rubric[{i}]");
            self.id(format!("{path}.item_id"), &item.item_id);
            if !seen.insert(item.item_id.as_str()) {
                self.error("duplicate_id", format!("{path}.item_id"), format!("duplicate item '{}'", item.item_id));
            }
            if !(item.weight.is_finite() && item.weight > 0.0) {
                self.error("weight", format!("{path}.weight"), "rubric weight must be positive".into());
            }
            if item.required_events.is_empty() {
                self.error("empty_list", format!("{path}.required_events"), "required_events must be non-empty".into());
            }
            for (j, matcher) in item.required_events.iter().enumerate() {
                self.matcher(format!("{path}.required_events[{j}]"), matcher);
            }
        }
    }

    fn matcher(&mut self, path: String, matcher: &EventMatcher) {
        let case = self.case;
        match matcher {
            EventMatcher::ActionOfKind { action, target } => {
                let Some(target) = target else { return };
                let exists = match action {
                    ActionKind::RequestExam => case.exam(target).is_some(),
                    ActionKind::OrderTest => case.test(target).is_some(),
                    ActionKind::Intervene => case.intervention(target).is_some(),
                    ActionKind::EndCase => case.has_disease(target),
                    _ => true,
                };
                if !exists {
                    self.dangling(format!("{path}.target"), action.as_str(), target);
                }
            }
            EventMatcher::PatientQuestionContaining { keywords } => {
                if keywords.is_empty() || keywords.iter().any(|k| k.trim().is_empty()) {
                    self.error("empty_list", format!("{path}.keywords"), "keyword set must be non-empty".into());
                }
            }
            EventMatcher::FindingObserved { finding } => self.finding_ref(format!("{path}.finding"), finding),
            EventMatcher::DiagnosisSubmitted { disease } => {
                if !case.has_disease(disease.as_str()) {
                    self.dangling(format!("{path}.disease"), "disease", disease.as_str());
                }
            }
        }
    }

    fn forbidden_terms(&mut self) {
        let case = self.case;
        for (i, term) in case.forbidden_terms.iter().enumerate() {
            if term.trim().is_empty() || *term != term.to_lowercase() {
                self.error("forbidden_term_format", format!("forbidden_terms[{i}]"), format!("term '{term}' must be non-empty lowercase"));
            }
        }
        let display = case.hidden_diagnosis.display_name();
        if !case.forbidden_terms.contains(&display) {
            self.error(
                "missing_forbidden_term",
                "forbidden_terms".into(),
                format!("forbidden_terms must include the hidden diagnosis name '{display}'"),
            );
        }
    }

    /// Load-time leak check over every student-visible text.
    fn leaks(&mut self) {
        let case = self.case;
        let terms = &case.forbidden_terms;
        let mut texts: Vec<(String, &str)> = vec![
            ("title".into(), case.title.as_str()),
            ("chief_complaint".into(), case.chief_complaint.as_str()),
        ];
        for (i, e) in case.symptom_script.iter().enumerate() {
            texts.push((format!("symptom_script[{i}].response_text"), &e.response_text));
        }
        for (k, e) in &case.exam_findings {
            texts.push((format!("exam_findings.{k}.label"), &e.label));
            texts.push((format!("exam_findings.{k}.result_text"), &e.result_text));
        }
        for (k, t) in &case.test_catalog {
            texts.push((format!("test_catalog.{k}.label"), &t.label));
            texts.push((format!("test_catalog.{k}.result_text"), &t.result_text));
        }
        for (i, r) in case.intervention_protocol.iter().enumerate() {
            texts.push((format!("intervention_protocol[{i}].label"), &r.label));
            texts.push((format!("intervention_protocol[{i}].outcome_text"), &r.outcome_text));
        }
        for (path, text) in texts {
            let hits = find_forbidden(text, terms);
            if !hits.is_empty() {
                self.error(LEAK, path, format!("text discloses forbidden term(s): {}", hits.join(", ")));
            }
        }
    }
}
