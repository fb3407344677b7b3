//! Independent transcription of the composite-score formulas.

use quadbench::eval::{Cell, PlatformInfo, ScenarioInfo, SuccessMatrix};
use quadbench::kinodyn::Category;
use quadbench::scenegen::ScenarioClass;
use quadbench::scoring::WeightConfig;

pub const TRIALS: u32 = 20;

#[derive(Debug, Clone)]
pub struct Case {
    /// `[algorithm][scenario][platform]` success counts out of `TRIALS`.
    pub counts: Vec<Vec<Vec<u32>>>,
    pub classic: Vec<bool>,
    pub real: Vec<bool>,
    pub config: WeightConfig,
}

pub fn build(case: &Case) -> SuccessMatrix {
    let na = case.counts.len();
    let mut m = SuccessMatrix::new(
        (0..na).map(|a| format!("alg{a}")).collect(),
        case.classic
            .iter()
            .enumerate()
            .map(|(s, &c)| ScenarioInfo {
                name: format!("s{s}"),
                class: if c { ScenarioClass::Classic } else { ScenarioClass::Theoretical },
            })
            .collect(),
        case.real
            .iter()
            .enumerate()
            .map(|(p, &r)| PlatformInfo {
                name: format!("p{p}"),
                category: if r { Category::Real } else { Category::Virtual },
            })
            .collect(),
    )
    .unwrap();
    for (a, rows) in case.counts.iter().enumerate() {
        for (s, row) in rows.iter().enumerate() {
            for (p, &k) in row.iter().enumerate() {
                m.set_cell(a, s, p, Some(Cell::from_counts(k, TRIALS)));
            }
        }
    }
    m
}

/// Direct transcription of the weighting, mean, variance and penalty
/// formulas as nested loops over algorithms, scenarios and platforms.
pub fn oracle(case: &Case) -> Vec<(f64, f64, f64)> {
    let cfg = &case.config;
    let ws_raw: Vec<f64> = case
        .classic
        .iter()
        .map(|&c| if c { cfg.scenario_class_weights.classic } else { cfg.scenario_class_weights.theoretical })
        .collect();
    let wm_raw: Vec<f64> = case
        .real
        .iter()
        .map(|&r| if r { cfg.platform_class_weights.real } else { cfg.platform_class_weights.virtual_ })
        .collect();
    let mut ws_total = 0.0;
    for w in &ws_raw {
        ws_total += w;
    }
    let mut wm_total = 0.0;
    for w in &wm_raw {
        wm_total += w;
    }
    let mut raw = Vec::new();
    for rows in &case.counts {
        let mut num = 0.0;
        let mut den = 0.0;
        for (s, row) in rows.iter().enumerate() {
            for (m, &k) in row.iter().enumerate() {
                let w = (ws_raw[s] / ws_total) * (wm_raw[m] / wm_total);
                num += w * (k as f64 / TRIALS as f64);
                den += w;
            }
        }
        let mean = num / den;
        let mut var = 0.0;
        for (s, row) in rows.iter().enumerate() {
            for (m, &k) in row.iter().enumerate() {
                let w = (ws_raw[s] / ws_total) * (wm_raw[m] / wm_total);
                var += w * (k as f64 / TRIALS as f64 - mean).powi(2);
            }
        }
        raw.push((100.0 * mean, var));
    }
    let mut max_var: f64 = 0.0;
    for &(_, v) in &raw {
        max_var = max_var.max(v);
    }
    raw.iter()
        .map(|&(score, var)| {
            let norm = if max_var > 0.0 { var / max_var } else { 0.0 };
            (score, var, score * (1.0 - cfg.beta * norm))
        })
        .collect()
}

