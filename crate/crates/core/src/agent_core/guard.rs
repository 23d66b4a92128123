use serde::{Deserialize, Serialize};

/// Replacement for any forbidden term found in outgoing text.
pub const WITHHELD: &str = "[withheld]";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub term: String,
    /// Byte offset of the hit in the original text.
    pub offset: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum GuardResult {
    Pass,
    Redacted { text: String, violations: Vec<Violation> },
}

impl GuardResult {
    pub fn passed(&self) -> bool {
        matches!(self, GuardResult::Pass)
    }

    /// The text to emit: the original on pass, the redaction otherwise.
    pub fn into_text(self, original: &str) -> String {
        match self {
            GuardResult::Pass => original.to_owned(),
            GuardResult::Redacted { text, .. } => text,
        }
    }
}

/// Lowercased copy of `text` plus, for every byte of it, the byte range of
/// the original char it came from.
struct Folded {
    lower: String,
    origin: Vec<(usize, usize)>,
}

fn fold(text: &str) -> Folded {
    let mut lower = String::with_capacity(text.len());
    let mut origin = Vec::with_capacity(text.len());
    for (start, ch) in text.char_indices() {
        let end = start + ch.len_utf8();
        for lc in ch.to_lowercase() {
            lower.push(lc);
            origin.extend(std::iter::repeat_n((start, end), lc.len_utf8()));
        }
    }
    Folded { lower, origin }
}

/// Every (original byte range, term) hit, sorted by start.
fn hits(folded: &Folded, terms: &[String]) -> Vec<(usize, usize, String)> {
    let mut found = Vec::new();
    for term in terms {
        let needle = term.to_lowercase();
        if needle.is_empty() {
            continue;
        }
        let mut from = 0;
        while let Some(pos) = folded.lower[from..].find(&needle) {
            let at = from + pos;
            let last = at + needle.len() - 1;
            found.push((folded.origin[at].0, folded.origin[last].1, term.clone()));
            from = at + folded.lower[at..].chars().next().map_or(1, char::len_utf8);
        }
    }
    found.sort();
    found
}

/// Case-insensitive substring scan of `text` for any of `terms`. Each hit
/// (overlapping hits merged) is replaced by [`WITHHELD`].
pub fn guard_disclosure(text: &str, terms: &[String]) -> GuardResult {
    let folded = fold(text);
    let found = hits(&folded, terms);
    if found.is_empty() {
        return GuardResult::Pass;
    }

    let mut spans: Vec<(usize, usize)> = Vec::new();
    for &(start, end, _) in &found {
        match spans.last_mut() {
            Some(last) if start <= last.1 => last.1 = last.1.max(end),
            _ => spans.push((start, end)),
        }
    }
    let mut redacted = String::with_capacity(text.len());
    let mut cursor = 0;
    for (start, end) in spans {
        redacted.push_str(&text[cursor..start]);
        redacted.push_str(WITHHELD);
        cursor = end;
    }
    redacted.push_str(&text[cursor..]);

    GuardResult::Redacted {
        text: redacted,
        violations: found
            .into_iter()
            .map(|(offset, _, term)| Violation { term, offset })
            .collect(),
    }
}

/// The distinct terms that occur in `text` (case-insensitive), in term order.
pub fn find_forbidden(text: &str, terms: &[String]) -> Vec<String> {
    let lower = text.to_lowercase();
    terms
        .iter()
        .filter(|t| !t.is_empty() && lower.contains(&t.to_lowercase()))
        .cloned()
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn terms(list: &[&str]) -> Vec<String> {
        list.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn clean_text_passes() {
        let t = terms(&["myocardial infarction"]);
        assert_eq!(guard_disclosure("my chest hurts when I walk", &t), GuardResult::Pass);
    }

    #[test]
    fn direct_hit_is_redacted() {
        let t = terms(&["myocardial infarction"]);
        match guard_disclosure("it is a myocardial infarction", &t) {
            GuardResult::Redacted { text, violations } => {
                assert_eq!(text, "it is a [withheld]");
                assert_eq!(violations.len(), 1);
                assert_eq!(violations[0].offset, 8);
            }
            GuardResult::Pass => panic!("expected redaction"),
        }
    }

    #[test]
    fn mixed_case_is_redacted() {
        let t = terms(&["myocardial infarction"]);
        let r = guard_disclosure("Myocardial INFARCTION, surely", &t);
        assert_eq!(r.into_text(""), "[withheld], surely");
    }

    #[test]
    fn overlapping_terms_merge() {
        let t = terms(&["reflux", "acid reflux"]);
        match guard_disclosure("Acid Reflux again", &t) {
            GuardResult::Redacted { text, violations } => {
                assert_eq!(text, "[withheld] again");
                assert_eq!(violations.len(), 2);
            }
            GuardResult::Pass => panic!("expected redaction"),
        }
    }

    #[test]
    fn repeated_hits_all_redacted() {
        let t = terms(&["gerd"]);
        assert_eq!(guard_disclosure("GERD or gerd", &t).into_text(""), "[withheld] or [withheld]");
    }

    #[test]
    fn non_ascii_neighbours_keep_boundaries() {
        let t = terms(&["gerd"]);
        assert_eq!(guard_disclosure("Ärger GERD Ö", &t).into_text(""), "Ärger [withheld] Ö");
    }

    proptest! {
        #[test]
        fn pass_implies_absent(text in "[a-zA-Z ]{0,40}", term in "[a-z]{2,6}") {
            let t = vec![term.clone()];
            let result = guard_disclosure(&text, &t);
            if result.passed() {
                prop_assert!(!text.to_lowercase().contains(&term));
            } else {
                let out = result.into_text(&text);
                prop_assert!(guard_disclosure(&out, &t).passed());
            }
        }

        #[test]
        fn any_casing_is_caught(mask in proptest::collection::vec(any::<bool>(), 21), prefix in "[a-z ]{0,10}") {
            let term = "myocardial infarction";
            let cased: String = term
                .chars()
                .zip(mask)
                .map(|(c, up)| if up { c.to_ascii_uppercase() } else { c })
                .collect();
            let text = format!("{prefix}{cased}");
            prop_assert!(!guard_disclosure(&text, &[term.to_string()]).passed());
        }
    }
}
