use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::ids::FindingId;

/// Findings gathered so far in a session. Grows only; each finding keeps
/// the decision that first revealed it.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ObservationSet {
    findings: BTreeSet<FindingId>,
    provenance: BTreeMap<FindingId, String>,
}

impl ObservationSet {
    pub fn new() -> Self {
        Self::default()
    }

    /// Record `finding` as revealed by `decision_id`. Returns false if it
    /// was already observed (provenance is left untouched).
    pub fn observe(&mut self, finding: FindingId, decision_id: &str) -> bool {
        if self.findings.contains(&finding) {
            return false;
        }
        self.provenance.insert(finding.clone(), decision_id.to_owned());
        self.findings.insert(finding);
        true
    }

    pub fn observe_all<'a>(&mut self, findings: impl IntoIterator<Item = &'a FindingId>, decision_id: &str) {
        for f in findings {
            self.observe(f.clone(), decision_id);
        }
    }

    pub fn contains(&self, finding: &str) -> bool {
        self.findings.contains(finding)
    }

    /// Findings in id order.
    pub fn findings(&self) -> &BTreeSet<FindingId> {
        &self.findings
    }

    pub fn provenance(&self, finding: &str) -> Option<&str> {
        self.provenance.get(finding).map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.findings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.findings.is_empty()
    }
}

impl<'a> FromIterator<&'a str> for ObservationSet {
    fn from_iter<I: IntoIterator<Item = &'a str>>(iter: I) -> Self {
        let mut set = ObservationSet::new();
        for f in iter {
            set.observe(FindingId::from(f), "given");
        }
        set
    }
}
