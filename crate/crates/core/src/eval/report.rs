use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::{
    bootstrap_ci, cell_bootstrap_seed, Cell, EvalError, PlatformInfo, ScenarioInfo, SuccessMatrix, DEFAULT_LEVEL,
    DEFAULT_RESAMPLES,
};
use crate::kinodyn::Category;
use crate::scenegen::ScenarioClass;
use crate::seed::SeedBuilder;
use crate::sim::Outcome;

pub const RESULTS_HEADER: &str = "algorithm,scenario_family,scenario_class,platform,category,success_rate,trials,ci_lower,ci_upper";

const NA: &str = "NA";

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(|| NA.to_string(), |x| format!("{x:.6}"))
}

/// One row per cell, in algorithm-scenario-platform order; missing cells
/// carry `NA` rates and zero trials.
pub fn results_csv(matrix: &SuccessMatrix, master_seed: u64) -> Result<String, EvalError> {
    let mut out = String::from(RESULTS_HEADER);
    out.push('\n');
    let [na, ns, nm] = matrix.shape();
    for a in 0..na {
        for s in 0..ns {
            for m in 0..nm {
                let alg = &matrix.algorithms[a];
                let scen = &matrix.scenarios[s];
                let plat = &matrix.platforms[m];
                let (rate, trials, lo, hi) = match matrix.cell(a, s, m) {
                    Some(c) => {
                        let seed = cell_bootstrap_seed(master_seed, alg, &scen.name, &plat.name);
                        let ci = bootstrap_ci(&c.samples(), DEFAULT_RESAMPLES, DEFAULT_LEVEL, seed)?;
                        (Some(c.rate()), c.trials, Some(ci.lower), Some(ci.upper))
                    }
                    None => (None, 0, None, None),
                };
                writeln!(
                    out,
                    "{},{},{},{},{},{},{},{},{}",
                    alg,
                    scen.name,
                    scen.class.as_str(),
                    plat.name,
                    plat.category.as_str(),
                    fmt_opt(rate),
                    trials,
                    fmt_opt(lo),
                    fmt_opt(hi)
                )
                .expect("writing to a string");
            }
        }
    }
    Ok(out)
}

#[derive(Debug, Deserialize)]
struct ResultRow {
    algorithm: String,
    scenario_family: String,
    scenario_class: String,
    platform: String,
    category: String,
    success_rate: String,
    trials: u32,
}

fn parse_class(s: &str) -> Result<ScenarioClass, EvalError> {
    match s.to_ascii_lowercase().as_str() {
        "classic" => Ok(ScenarioClass::Classic),
        "theoretical" => Ok(ScenarioClass::Theoretical),
        other => Err(EvalError::Malformed(format!("unknown scenario class `{other}`"))),
    }
}

fn push_unique<T: PartialEq>(list: &mut Vec<T>, item: T) -> usize {
    match list.iter().position(|x| *x == item) {
        Some(i) => i,
        None => {
            list.push(item);
            list.len() - 1
        }
    }
}

/// Rebuild a matrix from a results CSV. Axis order follows first
/// appearance; combinations absent from the file are missing.
pub fn read_results_csv(text: &str) -> Result<SuccessMatrix, EvalError> {
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    let mut algorithms = Vec::new();
    let mut scenarios: Vec<ScenarioInfo> = Vec::new();
    let mut platforms: Vec<PlatformInfo> = Vec::new();
    let mut entries = Vec::new();
    for row in reader.deserialize() {
        let row: ResultRow = row?;
        let class = parse_class(&row.scenario_class)?;
        let category: Category = row.category.parse().map_err(|e: String| EvalError::Malformed(e))?;
        let a = push_unique(&mut algorithms, row.algorithm.clone());
        let s = match scenarios.iter().position(|x| x.name == row.scenario_family) {
            Some(i) if scenarios[i].class != class => {
                return Err(EvalError::Malformed(format!("scenario `{}` listed with two classes", row.scenario_family)))
            }
            Some(i) => i,
            None => push_unique(&mut scenarios, ScenarioInfo { name: row.scenario_family.clone(), class }),
        };
        let m = match platforms.iter().position(|x| x.name == row.platform) {
            Some(i) if platforms[i].category != category => {
                return Err(EvalError::Malformed(format!("platform `{}` listed with two categories", row.platform)))
            }
            Some(i) => i,
            None => push_unique(&mut platforms, PlatformInfo { name: row.platform.clone(), category }),
        };
        let cell = if row.success_rate.trim() == NA {
            None
        } else {
            let rate: f64 = row
                .success_rate
                .trim()
                .parse()
                .map_err(|_| EvalError::Malformed(format!("bad success_rate `{}`", row.success_rate)))?;
            if !(0.0..=1.0).contains(&rate) || row.trials == 0 {
                return Err(EvalError::Malformed(format!("rate {rate} over {} trials", row.trials)));
            }
            let successes = (rate * row.trials as f64).round();
            if (successes - rate * row.trials as f64).abs() > 1e-4 {
                return Err(EvalError::Malformed(format!("rate {rate} is not a multiple of 1/{}", row.trials)));
            }
            Some(Cell::from_counts(successes as u32, row.trials))
        };
        entries.push((a, s, m, cell));
    }
    if entries.is_empty() {
        return Err(EvalError::Malformed("no result rows".into()));
    }
    let mut matrix = SuccessMatrix::new(algorithms, scenarios, platforms)?;
    for (a, s, m, cell) in entries {
        matrix.set_cell(a, s, m, cell);
    }
    Ok(matrix)
}

/// Serialised form of a matrix with the missing mask spelled out.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixDocument {
    pub algorithms: Vec<String>,
    pub scenarios: Vec<ScenarioInfo>,
    pub platforms: Vec<PlatformInfo>,
    pub cells: Vec<CellEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellEntry {
    pub algorithm: String,
    pub scenario: String,
    pub platform: String,
    pub missing: bool,
    pub successes: u32,
    pub trials: u32,
    pub success_rate: Option<f64>,
    pub unsolvable_trials: u32,
    pub outcomes: Vec<Outcome>,
}

impl MatrixDocument {
    pub fn from_matrix(matrix: &SuccessMatrix) -> Self {
        let [na, ns, nm] = matrix.shape();
        let mut cells = Vec::with_capacity(na * ns * nm);
        for a in 0..na {
            for s in 0..ns {
                for m in 0..nm {
                    let c = matrix.cell(a, s, m);
                    cells.push(CellEntry {
                        algorithm: matrix.algorithms[a].clone(),
                        scenario: matrix.scenarios[s].name.clone(),
                        platform: matrix.platforms[m].name.clone(),
                        missing: c.is_none(),
                        successes: c.map_or(0, |c| c.successes),
                        trials: c.map_or(0, |c| c.trials),
                        success_rate: c.map(Cell::rate),
                        unsolvable_trials: c.map_or(0, |c| c.unsolvable_trials),
                        outcomes: c.map_or_else(Vec::new, |c| c.outcomes.clone()),
                    });
                }
            }
        }
        MatrixDocument {
            algorithms: matrix.algorithms.clone(),
            scenarios: matrix.scenarios.clone(),
            platforms: matrix.platforms.clone(),
            cells,
        }
    }

    pub fn into_matrix(self) -> Result<SuccessMatrix, EvalError> {
        let mut matrix = SuccessMatrix::new(self.algorithms, self.scenarios, self.platforms)?;
        for e in self.cells {
            let lookup = |found: Option<usize>, what: &str| {
                found.ok_or_else(|| EvalError::Malformed(format!("cell refers to unknown {what}")))
            };
            let a = lookup(matrix.algorithm_index(&e.algorithm), "algorithm")?;
            let s = lookup(matrix.scenario_index(&e.scenario), "scenario")?;
            let m = lookup(matrix.platform_index(&e.platform), "platform")?;
            if e.missing {
                matrix.set_cell(a, s, m, None);
                continue;
            }
            if e.trials == 0 || e.successes > e.trials {
                return Err(EvalError::Malformed(format!("{} successes over {} trials", e.successes, e.trials)));
            }
            matrix.set_cell(
                a,
                s,
                m,
                Some(Cell {
                    successes: e.successes,
                    trials: e.trials,
                    outcomes: e.outcomes,
                    unsolvable_trials: e.unsolvable_trials,
                }),
            );
        }
        Ok(matrix)
    }

    pub fn to_json(&self) -> Result<String, EvalError> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self, EvalError> {
        Ok(serde_json::from_str(text)?)
    }
}

/// Mean of one algorithm's rates along one axis value.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MarginalRow {
    pub algorithm: String,
    pub key: String,
    /// `None` when every contributing cell is missing.
    pub mean: Option<f64>,
    pub ci_lower: Option<f64>,
    pub ci_upper: Option<f64>,
    pub present: usize,
    pub missing: usize,
}

/// Platform × scenario rates of one algorithm.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Heatmap {
    pub algorithm: String,
    pub scenarios: Vec<String>,
    pub platforms: Vec<String>,
    /// `[platform][scenario]`.
    pub rates: Vec<Vec<Option<f64>>>,
}

impl Heatmap {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("platform");
        for s in &self.scenarios {
            out.push(',');
            out.push_str(s);
        }
        out.push('\n');
        for (p, row) in self.platforms.iter().zip(&self.rates) {
            out.push_str(p);
            for r in row {
                out.push(',');
                out.push_str(&fmt_opt(*r));
            }
            out.push('\n');
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Reports {
    pub per_scenario: Vec<MarginalRow>,
    pub per_platform: Vec<MarginalRow>,
    pub heatmaps: Vec<Heatmap>,
}

fn marginal_csv(rows: &[MarginalRow], key: &str) -> String {
    let mut out = format!("algorithm,{key},mean,ci_lower,ci_upper,present,missing\n");
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{},{},{}",
            r.algorithm,
            r.key,
            fmt_opt(r.mean),
            fmt_opt(r.ci_lower),
            fmt_opt(r.ci_upper),
            r.present,
            r.missing
        )
        .expect("writing to a string");
    }
    out
}

impl Reports {
    pub fn per_scenario_csv(&self) -> String {
        marginal_csv(&self.per_scenario, "scenario")
    }

    pub fn per_platform_csv(&self) -> String {
        marginal_csv(&self.per_platform, "platform")
    }

    pub fn to_json(&self) -> Result<String, EvalError> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

fn marginal(algorithm: &str, key: &str, rates: &[Option<f64>], seed: u64) -> Result<MarginalRow, EvalError> {
    let present: Vec<f64> = rates.iter().flatten().copied().collect();
    let missing = rates.len() - present.len();
    let (mean, lo, hi) = if present.is_empty() {
        (None, None, None)
    } else {
        let ci = bootstrap_ci(&present, DEFAULT_RESAMPLES, DEFAULT_LEVEL, seed)?;
        (Some(ci.mean), Some(ci.lower), Some(ci.upper))
    };
    Ok(MarginalRow {
        algorithm: algorithm.to_string(),
        key: key.to_string(),
        mean,
        ci_lower: lo,
        ci_upper: hi,
        present: present.len(),
        missing,
    })
}

/// Per-scenario means over platforms, per-platform means over scenarios and
/// one heatmap per algorithm. Missing cells are excluded and counted.
pub fn summarize(matrix: &SuccessMatrix, master_seed: u64) -> Result<Reports, EvalError> {
    let [na, ns, nm] = matrix.shape();
    let mut per_scenario = Vec::new();
    let mut per_platform = Vec::new();
    let mut heatmaps = Vec::new();
    for a in 0..na {
        let alg = &matrix.algorithms[a];
        for s in 0..ns {
            let name = &matrix.scenarios[s].name;
            let rates: Vec<Option<f64>> = (0..nm).map(|m| matrix.rate(a, s, m)).collect();
            let seed = SeedBuilder::new(master_seed).label("scenario-marginal").label(alg).label(name).finish();
            per_scenario.push(marginal(alg, name, &rates, seed)?);
        }
        for m in 0..nm {
            let name = &matrix.platforms[m].name;
            let rates: Vec<Option<f64>> = (0..ns).map(|s| matrix.rate(a, s, m)).collect();
            let seed = SeedBuilder::new(master_seed).label("platform-marginal").label(alg).label(name).finish();
            per_platform.push(marginal(alg, name, &rates, seed)?);
        }
        heatmaps.push(Heatmap {
            algorithm: alg.clone(),
            scenarios: matrix.scenarios.iter().map(|s| s.name.clone()).collect(),
            platforms: matrix.platforms.iter().map(|p| p.name.clone()).collect(),
            rates: (0..nm).map(|m| (0..ns).map(|s| matrix.rate(a, s, m)).collect()).collect(),
        });
    }
    Ok(Reports { per_scenario, per_platform, heatmaps })
}
