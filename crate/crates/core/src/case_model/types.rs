use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::evaluation::EventMatcher;
use crate::ids::{DiseaseId, ExamId, FindingId, InterventionId, TestId};

/// A complete, machine-readable clinical case: the knowledge base every
/// agent in a session draws on. Immutable once loaded.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClinicalCase {
    pub case_id: String,
    pub title: String,
    pub demographics: Demographics,
    pub chief_complaint: String,
    pub hidden_diagnosis: DiseaseId,
    pub differential: Vec<DiseaseId>,
    pub symptom_script: Vec<SymptomScriptEntry>,
    pub exam_findings: BTreeMap<ExamId, ExamFinding>,
    pub test_catalog: BTreeMap<TestId, TestCatalogEntry>,
    pub evidence_links: Vec<EvidenceLink>,
    pub intervention_protocol: Vec<InterventionRule>,
    pub rubric: Vec<RubricItem>,
    pub forbidden_terms: Vec<String>,
    pub rule_out_threshold: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Demographics {
    /// Age in years.
    pub age: u32,
    pub sex: Sex,
    #[serde(default)]
    pub history: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sex {
    Female,
    Male,
    Other,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SymptomScriptEntry {
    pub entry_id: String,
    pub keywords: BTreeSet<String>,
    pub response_text: String,
    #[serde(default)]
    pub reveals: Vec<FindingId>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExamFinding {
    pub exam_id: ExamId,
    pub label: String,
    pub result_text: String,
    #[serde(default)]
    pub finding_ids: Vec<FindingId>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub vitals: Option<BTreeMap<String, VitalSign>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VitalSign {
    pub value: f64,
    pub unit: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TestModality {
    Laboratory,
    Imaging,
    Procedure,
}

/// Results are always available at once; delayed turnaround is not modelled.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Turnaround {
    #[default]
    Immediate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TestCatalogEntry {
    pub test_id: TestId,
    pub modality: TestModality,
    pub label: String,
    pub result_text: String,
    #[serde(default)]
    pub finding_ids: Vec<FindingId>,
    #[serde(default)]
    pub turnaround: Turnaround,
}

/// Signed log-odds style contribution of one finding to one disease.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvidenceLink {
    pub disease: DiseaseId,
    pub finding: FindingId,
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InterventionRule {
    pub intervention_id: InterventionId,
    pub label: String,
    #[serde(default)]
    pub indicated_if: BTreeSet<FindingId>,
    #[serde(default)]
    pub contraindicated_if: BTreeSet<FindingId>,
    pub reason_code: String,
    pub outcome_text: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RubricCategory {
    History,
    Exam,
    Diagnostics,
    Intervention,
    Communication,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RubricItem {
    pub item_id: String,
    pub description: String,
    pub category: RubricCategory,
    pub required_events: Vec<EventMatcher>,
    pub weight: f64,
}

impl ClinicalCase {
    pub fn exam(&self, exam_id: &str) -> Option<&ExamFinding> {
        self.exam_findings.get(exam_id)
    }

    pub fn test(&self, test_id: &str) -> Option<&TestCatalogEntry> {
        self.test_catalog.get(test_id)
    }

    pub fn intervention(&self, intervention_id: &str) -> Option<&InterventionRule> {
        self.intervention_protocol
            .iter()
            .find(|r| r.intervention_id == intervention_id)
    }

    pub fn rubric_item(&self, item_id: &str) -> Option<&RubricItem> {
        self.rubric.iter().find(|r| r.item_id == item_id)
    }

    pub fn has_disease(&self, disease: &str) -> bool {
        self.differential.iter().any(|d| d == disease)
    }

    /// Evidence weight linking `finding` to `disease`, if any.
    pub fn evidence_weight(&self, disease: &str, finding: &str) -> Option<f64> {
        self.evidence_links
            .iter()
            .find(|l| l.disease == disease && l.finding == finding)
            .map(|l| l.weight)
    }

    /// Every finding some agent can reveal: script reveals, exam and test
    /// findings.
    pub fn discoverable_findings(&self) -> BTreeSet<FindingId> {
        let script = self.symptom_script.iter().flat_map(|e| e.reveals.iter());
        let exams = self.exam_findings.values().flat_map(|e| e.finding_ids.iter());
        let tests = self.test_catalog.values().flat_map(|t| t.finding_ids.iter());
        script.chain(exams).chain(tests).cloned().collect()
    }
}
