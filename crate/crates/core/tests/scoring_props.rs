use proptest::prelude::*;
use quadbench::scoring::{
    apply_penalty, normalize_weights, rank, renormalize_missing, score_matrix, CompositeScore, PlatformClassWeights,
    ScenarioClassWeights, WeightConfig,
};

mod common;

use common::scoring_oracle::{build, oracle, Case, TRIALS};

fn weight() -> impl Strategy<Value = f64> {
    0.05..5.0f64
}

fn case(na: usize, ns: usize, nm: usize) -> impl Strategy<Value = Case> {
    (
        prop::collection::vec(prop::collection::vec(prop::collection::vec(0..=TRIALS, nm), ns), na),
        prop::collection::vec(any::<bool>(), ns),
        prop::collection::vec(any::<bool>(), nm),
        (weight(), weight(), weight(), weight(), 0.0..=1.0f64),
    )
        .prop_map(|(counts, classic, real, (wc, wt, wr, wv, beta))| Case {
            counts,
            classic,
            real,
            config: WeightConfig {
                scenario_class_weights: ScenarioClassWeights { classic: wc, theoretical: wt },
                platform_class_weights: PlatformClassWeights { real: wr, virtual_: wv },
                beta,
            },
        })
}

proptest! {
    #[test]
    fn matches_triple_loop_oracle(c in case(3, 3, 4)) {
        let report = score_matrix(&build(&c), &c.config).unwrap();
        for (e, (score, var, fin)) in report.entries.iter().zip(oracle(&c)) {
            prop_assert!((e.score - score).abs() < 1e-12, "{} vs {}", e.score, score);
            prop_assert!((e.variance - var).abs() < 1e-12);
            prop_assert!((e.final_score - fin).abs() < 1e-12);
        }
    }

    #[test]
    fn penalty_bounds(c in case(3, 4, 3)) {
        let report = score_matrix(&build(&c), &c.config).unwrap();
        for e in &report.entries {
            prop_assert!(e.final_score <= e.score + 1e-12);
            prop_assert!(e.final_score >= e.score * (1.0 - c.config.beta) - 1e-12);
            prop_assert!((0.0..=1.0).contains(&e.normalized_variance));
            prop_assert!((e.final_score - e.score * (1.0 - report.beta * e.normalized_variance)).abs() < 1e-9);
        }
    }

    #[test]
    fn zero_beta_is_plain_average(c in case(2, 3, 3)) {
        let cfg = c.config.with_beta(0.0);
        let report = score_matrix(&build(&c), &cfg).unwrap();
        for e in &report.entries {
            prop_assert_eq!(e.final_score, e.score);
        }
    }

    #[test]
    fn scaling_raw_weights_changes_nothing(c in case(3, 3, 4), k in 0.01..100.0f64) {
        let mut scaled = c.clone();
        let s = &mut scaled.config.scenario_class_weights;
        s.classic *= k;
        s.theoretical *= k;
        let p = &mut scaled.config.platform_class_weights;
        p.real *= k;
        p.virtual_ *= k;
        let a = score_matrix(&build(&c), &c.config).unwrap();
        let b = score_matrix(&build(&scaled), &scaled.config).unwrap();
        for (x, y) in a.entries.iter().zip(&b.entries) {
            prop_assert!((x.score - y.score).abs() < 1e-9);
            prop_assert!((x.variance - y.variance).abs() < 1e-12);
            prop_assert!((x.final_score - y.final_score).abs() < 1e-9);
        }
    }

    #[test]
    fn worst_variance_normalizes_to_one(c in case(3, 3, 3)) {
        let report = score_matrix(&build(&c), &c.config).unwrap();
        let max = report.entries.iter().map(|e| e.variance).fold(0.0, f64::max);
        prop_assume!(max > 0.0);
        let worst = report.entries.iter().find(|e| e.variance == max).unwrap();
        prop_assert_eq!(worst.normalized_variance, 1.0);
    }

    #[test]
    fn complete_weight_mass_is_one(raw_s in prop::collection::vec(weight(), 1..8), raw_m in prop::collection::vec(weight(), 1..8)) {
        let ws = normalize_weights(&raw_s).unwrap();
        let wm = normalize_weights(&raw_m).unwrap();
        prop_assert!((ws.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        let mut mass = 0.0;
        for a in &ws {
            for b in &wm {
                mass += a * b;
            }
        }
        prop_assert!((mass - 1.0).abs() < 1e-12);
    }

    #[test]
    fn renormalized_weights_sum_to_one(raw in prop::collection::vec(weight(), 2..8), drop in any::<prop::sample::Index>()) {
        let w = normalize_weights(&raw).unwrap();
        let mut excluded = vec![false; w.len()];
        excluded[drop.index(w.len())] = true;
        let kept = renormalize_missing(&w, &excluded).unwrap();
        prop_assert!((kept.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        prop_assert_eq!(renormalize_missing(&w, &vec![false; w.len()]).unwrap(), w);
    }

    #[test]
    fn ranking_is_sorted_with_name_ties(scores in prop::collection::vec((0u8..5, 0u8..3), 1..8)) {
        let cohort: Vec<CompositeScore> = scores
            .iter()
            .enumerate()
            .map(|(i, &(s, v))| CompositeScore {
                algorithm: format!("alg{}", 9 - i),
                score: 10.0 * f64::from(s),
                variance: 0.05 * f64::from(v),
                excluded_scenarios: vec![],
                masked_cells: 0,
            })
            .collect();
        let ranked = rank(&apply_penalty(cohort, 0.3).unwrap());
        for w in ranked.windows(2) {
            let (x, y) = (&w[0].entry, &w[1].entry);
            prop_assert!(x.final_score > y.final_score || (x.final_score == y.final_score && x.algorithm < y.algorithm));
        }
    }
}
