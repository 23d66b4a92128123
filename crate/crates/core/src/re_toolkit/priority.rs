use serde::{Deserialize, Serialize};

use super::story::XaiUserStory;

/// Linear priority weights. Complexity counts inversely, as `6 - complexity`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PriorityWeights {
    pub clinical_risk: f64,
    pub learning_value: f64,
    pub complexity: f64,
}

impl Default for PriorityWeights {
    fn default() -> Self {
        Self {
            clinical_risk: 0.5,
            learning_value: 0.3,
            complexity: 0.2,
        }
    }
}

impl PriorityWeights {
    pub fn priority(&self, story: &XaiUserStory) -> f64 {
        self.clinical_risk * f64::from(story.clinical_risk)
            + self.learning_value * f64::from(story.learning_value)
            + self.complexity * (6.0 - f64::from(story.complexity))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedStory {
    pub rank: usize,
    pub story_id: String,
    pub priority: f64,
}

/// Highest priority first; equal priorities by story id ascending.
pub fn prioritize_stories(stories: &[XaiUserStory], weights: &PriorityWeights) -> Vec<RankedStory> {
    let mut scored: Vec<(f64, &str)> = stories
        .iter()
        .map(|s| (weights.priority(s), s.story_id.as_str()))
        .collect();
    scored.sort_by(|a, b| b.0.total_cmp(&a.0).then_with(|| a.1.cmp(b.1)));
    scored
        .into_iter()
        .enumerate()
        .map(|(i, (priority, story_id))| RankedStory {
            rank: i + 1,
            story_id: story_id.to_owned(),
            priority,
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use proptest::prelude::*;

    use super::*;
    use crate::re_toolkit::{Question, StoryClauses};

    fn story(id: &str, risk: u8, value: u8, complexity: u8) -> XaiUserStory {
        XaiUserStory {
            story_id: id.into(),
            clauses: StoryClauses {
                human_persona_id: "h".into(),
                question: Question::Why,
                ai_persona_id: "a".into(),
                decision_clause: "d".into(),
                goal_clause: "g".into(),
            },
            clinical_risk: risk,
            learning_value: value,
            complexity,
        }
    }

    #[test]
    fn hand_computed_priorities() {
        let ranked = prioritize_stories(&[story("low", 1, 1, 5), story("high", 5, 5, 1)], &PriorityWeights::default());
        assert_eq!(ranked[0].story_id, "high");
        assert!((ranked[0].priority - 5.0).abs() < 1e-12);
        assert!((ranked[1].priority - 1.0).abs() < 1e-12);
        assert_eq!((ranked[0].rank, ranked[1].rank), (1, 2));
    }

    #[test]
    fn ties_break_by_story_id() {
        let ranked = prioritize_stories(
            &[story("s3", 3, 3, 3), story("s1", 3, 3, 3), story("s2", 3, 3, 3)],
            &PriorityWeights::default(),
        );
        let ids: Vec<_> = ranked.iter().map(|r| r.story_id.as_str()).collect();
        assert_eq!(ids, ["s1", "s2", "s3"]);
    }

    #[test]
    fn weights_are_configurable() {
        let w = PriorityWeights {
            clinical_risk: 0.0,
            learning_value: 0.0,
            complexity: 1.0,
        };
        let ranked = prioritize_stories(&[story("a", 5, 5, 5), story("b", 1, 1, 1)], &w);
        assert_eq!(ranked[0].story_id, "b");
        let partial: PriorityWeights = serde_json::from_str(r#"{"complexity": 1.0}"#).unwrap();
        assert_eq!(partial.clinical_risk, 0.5);
    }

    fn stories() -> impl Strategy<Value = Vec<XaiUserStory>> {
        prop::collection::vec((1u8..=5, 1u8..=5, 1u8..=5), 0..12).prop_map(|rs| {
            rs.into_iter()
                .enumerate()
                .map(|(i, (r, v, c))| story(&format!("s{i:02}"), r, v, c))
                .collect()
        })
    }

    proptest! {
        #[test]
        fn input_order_never_changes_output(list in stories(), seed in any::<u64>()) {
            use rand::seq::SliceRandom;
            use rand::SeedableRng;
            let mut shuffled = list.clone();
            shuffled.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(seed));
            let w = PriorityWeights::default();
            prop_assert_eq!(prioritize_stories(&list, &w), prioritize_stories(&shuffled, &w));
        }

        #[test]
        fn output_is_strictly_ordered(list in stories()) {
            let ranked = prioritize_stories(&list, &PriorityWeights::default());
            for pair in ranked.windows(2) {
                let ordered = pair[0].priority > pair[1].priority
                    || (pair[0].priority == pair[1].priority && pair[0].story_id < pair[1].story_id);
                prop_assert!(ordered);
            }
        }
    }
}
