use std::collections::BTreeMap;

use clinsim_core::case_model::EvidenceLink;
use clinsim_core::clinical_agents::{explain_diagnosis, score_evidence, DiseaseScore, ObservationSet};
use clinsim_core::reference::chest_pain_case;
use clinsim_core::ClinicalCase;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const DISEASES: [&str; 4] = ["d_alpha", "d_beta", "d_gamma", "d_delta"];
const FINDINGS: [&str; 6] = ["f_a", "f_b", "f_c", "f_d", "f_e", "f_f"];

/// Reference case with its differential and evidence replaced.
fn toy_case(weights: &[(usize, usize, f64)], threshold: f64) -> ClinicalCase {
    let mut case = chest_pain_case();
    case.differential = DISEASES.iter().map(|d| (*d).into()).collect();
    case.evidence_links = weights
        .iter()
        .map(|&(d, f, weight)| EvidenceLink {
            disease: DISEASES[d].into(),
            finding: FINDINGS[f].into(),
            weight,
        })
        .collect();
    case.rule_out_threshold = threshold;
    case
}

fn observations(mask: u8) -> ObservationSet {
    FINDINGS
        .iter()
        .enumerate()
        .filter(|(i, _)| mask & (1 << i) != 0)
        .map(|(_, f)| *f)
        .collect()
}

fn ranking(scores: &[DiseaseScore]) -> Vec<String> {
    scores.iter().map(|s| s.disease.to_string()).collect()
}

/// Sparse link table: each (disease, finding) pair present or not.
fn links(weight: impl Strategy<Value = f64> + Clone) -> impl Strategy<Value = Vec<(usize, usize, f64)>> {
    prop::collection::vec(prop::option::of(weight), 24).prop_map(|cells| {
        cells
            .into_iter()
            .enumerate()
            .filter_map(|(i, w)| w.map(|w| (i / 6, i % 6, w)))
            .collect()
    })
}

fn dyadic() -> impl Strategy<Value = f64> + Clone {
    (-40i32..=40).prop_map(|k| f64::from(k) / 8.0)
}

#[test]
fn naive_bayes_oracle_matches_on_all_subsets() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let p: Vec<Vec<f64>> = (0..4).map(|_| (0..6).map(|_| rng.gen_range(0.05..0.95)).collect()).collect();
    let baseline: Vec<f64> = (0..6).map(|_| rng.gen_range(0.05..0.95)).collect();
    let weights: Vec<(usize, usize, f64)> = (0..4)
        .flat_map(|d| {
            let p = &p;
            let baseline = &baseline;
            (0..6).map(move |f| (d, f, p[d][f].ln() - baseline[f].ln()))
        })
        .collect();
    let case = toy_case(&weights, f64::NEG_INFINITY);

    for mask in 0u8..64 {
        // Posterior under a uniform prior, up to the common normaliser.
        let mut posterior: Vec<(f64, &str)> = (0..4)
            .map(|d| {
                let joint: f64 = (0..6).filter(|f| mask & (1 << f) != 0).map(|f| p[d][f]).product();
                (joint, DISEASES[d])
            })
            .collect();
        posterior.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(b.1)));
        let oracle: Vec<String> = posterior.iter().map(|(_, d)| d.to_string()).collect();
        let ranked = ranking(&score_evidence(&case, &observations(mask)));
        if mask == 0 {
            let mut ids: Vec<String> = DISEASES.iter().map(|d| d.to_string()).collect();
            ids.sort();
            assert_eq!(ranked, ids);
        } else {
            assert_eq!(ranked, oracle, "subset {mask:06b}");
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn score_is_exact_sum_of_contributions(w in links(-8.0f64..8.0), mask in 0u8..64, t in -6.0f64..2.0) {
        let case = toy_case(&w, t);
        let obs = observations(mask);
        for s in score_evidence(&case, &obs) {
            prop_assert_eq!(s.score.to_bits(), s.contribution_sum().to_bits());
            prop_assert_eq!(s.status == clinsim_core::clinical_agents::DiseaseStatus::RuledOut, s.score < t);
            let e = explain_diagnosis(&case, &obs, s.disease.as_str(), "p#1").unwrap();
            let mut from_explanation: BTreeMap<String, f64> = BTreeMap::new();
            for c in e.contributions() {
                from_explanation.insert(c.feature.clone(), c.weight);
            }
            let from_score: BTreeMap<String, f64> =
                s.contributions.iter().map(|c| (c.finding.to_string(), c.weight)).collect();
            prop_assert_eq!(&from_explanation, &from_score);
            let resummed = from_explanation.values().fold(0.0, |a, w| a + w);
            prop_assert_eq!(resummed.to_bits(), s.score.to_bits());
        }
    }

    #[test]
    fn adding_a_finding_moves_score_with_its_sign(w in links(-8.0f64..8.0), mask in 0u8..64, extra in 0usize..6) {
        prop_assume!(mask & (1 << extra) == 0);
        let case = toy_case(&w, -1.0);
        let before = score_evidence(&case, &observations(mask));
        let after = score_evidence(&case, &observations(mask | (1 << extra)));
        for d in DISEASES {
            let b = before.iter().find(|s| s.disease == d).unwrap().score;
            let a = after.iter().find(|s| s.disease == d).unwrap().score;
            match case.evidence_weight(d, FINDINGS[extra]) {
                Some(x) if x > 0.0 => prop_assert!(a >= b),
                Some(x) if x < 0.0 => prop_assert!(a <= b),
                _ => prop_assert_eq!(a, b),
            }
        }
    }

    #[test]
    fn positive_scaling_keeps_the_ranking(w in links(dyadic()), mask in 0u8..64, c in prop::sample::select(vec![0.25, 0.5, 2.0, 3.0, 4.0, 5.0, 16.0])) {
        let case = toy_case(&w, -1.0);
        let scaled: Vec<_> = w.iter().map(|&(d, f, x)| (d, f, x * c)).collect();
        let scaled_case = toy_case(&scaled, -1.0);
        let obs = observations(mask);
        let base = score_evidence(&case, &obs);
        let other = score_evidence(&scaled_case, &obs);
        prop_assert_eq!(ranking(&base), ranking(&other));
        for (x, y) in base.iter().zip(&other) {
            prop_assert_eq!(x.score * c, y.score);
        }
        for i in 0..4 {
            for j in 0..4 {
                prop_assert_eq!(base[i].score.total_cmp(&base[j].score), (other[i].score).total_cmp(&other[j].score));
            }
        }
    }

    #[test]
    fn scoring_is_deterministic(w in links(-8.0f64..8.0), mask in 0u8..64) {
        let case = toy_case(&w, -1.0);
        prop_assert_eq!(score_evidence(&case, &observations(mask)), score_evidence(&case, &observations(mask)));
    }
}
