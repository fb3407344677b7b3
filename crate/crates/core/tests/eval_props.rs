use proptest::prelude::*;
use quadbench::eval::{
    bootstrap_ci, read_results_csv, results_csv, run_matrix, summarize, AlgorithmSpec, Cell, MatrixConfig,
    PlatformInfo, PlatformSpec, ScenarioInfo, ScenarioSpec, SuccessMatrix,
};
use quadbench::kinodyn::{load_platform_dataset, Category};
use quadbench::scenegen::{Family, ScenarioClass};

fn platforms() -> Vec<PlatformSpec> {
    load_platform_dataset().iter().step_by(9).map(PlatformSpec::from).collect()
}

fn random_matrix(rates: &[(u32, bool)], ns: usize, nm: usize) -> SuccessMatrix {
    let mut m = SuccessMatrix::new(
        vec!["a".into(), "b".into()],
        (0..ns)
            .map(|s| ScenarioInfo {
                name: format!("s{s}"),
                class: if s % 2 == 0 { ScenarioClass::Classic } else { ScenarioClass::Theoretical },
            })
            .collect(),
        (0..nm)
            .map(|p| PlatformInfo {
                name: format!("p{p}"),
                category: if p % 2 == 0 { Category::Real } else { Category::Virtual },
            })
            .collect(),
    )
    .unwrap();
    let mut it = rates.iter().cycle();
    for a in 0..2 {
        for s in 0..ns {
            for p in 0..nm {
                let &(k, present) = it.next().unwrap();
                m.set_cell(a, s, p, present.then(|| Cell::from_counts(k, 10)));
            }
        }
    }
    m
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(4))]

    #[test]
    fn cells_ignore_matrix_order(
        fams in Just(Family::ALL.to_vec()).prop_shuffle(),
        plats in Just(platforms()).prop_shuffle(),
        seed in 0u64..1000,
    ) {
        let config = MatrixConfig::new(3, seed);
        let scen: Vec<ScenarioSpec> = fams.iter().take(3).map(|f| ScenarioSpec::generated(*f)).collect();
        let both = run_matrix(&[AlgorithmSpec::reference(), AlgorithmSpec::straight()], &plats, &scen, &config).unwrap();
        let mut rev_scen = scen.clone();
        rev_scen.reverse();
        let mut rev_plats = plats.clone();
        rev_plats.reverse();
        let alone = run_matrix(&[AlgorithmSpec::straight()], &rev_plats, &rev_scen, &config).unwrap();
        let a0 = both.algorithm_index("straight").unwrap();
        for s in &scen {
            for p in &plats {
                let x = both.cell(a0, both.scenario_index(&s.name).unwrap(), both.platform_index(&p.name).unwrap());
                let y = alone.cell(0, alone.scenario_index(&s.name).unwrap(), alone.platform_index(&p.name).unwrap());
                prop_assert_eq!(x, y);
            }
        }
    }
}

proptest! {
    #[test]
    fn missing_cells_are_counted_never_imputed(
        rates in prop::collection::vec((0u32..=10, prop::bool::weighted(0.8)), 1..40),
        ns in 1usize..5,
        nm in 1usize..5,
    ) {
        let m = random_matrix(&rates, ns, nm);
        let reports = summarize(&m, 7).unwrap();
        for row in &reports.per_scenario {
            prop_assert_eq!(row.present + row.missing, nm);
            prop_assert_eq!(row.mean.is_none(), row.present == 0);
        }
        for row in &reports.per_platform {
            prop_assert_eq!(row.present + row.missing, ns);
        }
        let a = m.algorithm_index("a").unwrap();
        for (s, row) in reports.per_scenario.iter().filter(|r| r.algorithm == "a").enumerate() {
            let present: Vec<f64> = (0..nm).filter_map(|p| m.rate(a, s, p)).collect();
            if let Some(mean) = row.mean {
                let direct = present.iter().sum::<f64>() / present.len() as f64;
                prop_assert!((mean - direct).abs() < 1e-12);
            }
        }
        let csv = results_csv(&m, 7).unwrap();
        prop_assert_eq!(csv.lines().filter(|l| l.contains(",NA,")).count(), m.missing_count());
        let back = read_results_csv(&csv).unwrap();
        prop_assert_eq!(back.missing_count(), m.missing_count());
    }

    #[test]
    fn interval_brackets_the_mean(samples in prop::collection::vec(prop::bool::ANY, 1..30), seed in any::<u64>()) {
        let xs: Vec<f64> = samples.iter().map(|&b| f64::from(u8::from(b))).collect();
        let ci = bootstrap_ci(&xs, 300, 0.95, seed).unwrap();
        prop_assert!(ci.lower <= ci.mean && ci.mean <= ci.upper);
        prop_assert!(ci.lower >= 0.0 && ci.upper <= 1.0);
        prop_assert_eq!(ci, bootstrap_ci(&xs, 300, 0.95, seed).unwrap());
    }
}
