//! The algorithm × scenario × platform trial matrix and its statistics.

mod bootstrap;
mod report;

use std::collections::HashSet;

#[cfg(feature = "parallel")]
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::kinodyn::{Category, KinodynamicProfile, PlatformRecord};
use crate::scenegen::{validate_scene, Family, ScenarioClass, Scene, ScenegenError};
use crate::seed::SeedBuilder;
use crate::sim::{
    greedy_reference_planner, run_trial_in, straight_flight_planner, Outcome, Planner, ReferenceParams, SceneEnv,
    SimError, TaskSpec, TrialOptions, TrialResult,
};

pub use bootstrap::{bootstrap_ci, ConfidenceInterval, DEFAULT_LEVEL, DEFAULT_RESAMPLES};
pub use report::{
    read_results_csv, results_csv, summarize, Heatmap, MarginalRow, MatrixDocument, Reports, RESULTS_HEADER,
};

/// Distinct generated instances per family.
pub const INSTANCES_PER_FAMILY: u32 = 10;

#[derive(Debug, thiserror::Error)]
pub enum EvalError {
    #[error("bootstrap needs at least one sample")]
    EmptySamples,
    #[error("confidence level {0} must lie strictly between 0 and 1")]
    InvalidLevel(f64),
    #[error("bootstrap needs at least one resample")]
    InvalidResamples,
    #[error("trials per cell must be at least 1")]
    NoTrials,
    #[error("matrix needs at least one algorithm, scenario and platform")]
    EmptyMatrix,
    #[error("duplicate {kind} name `{name}`")]
    DuplicateName { kind: &'static str, name: String },
    #[error("scenario `{name}` has no scenes")]
    NoScenes { name: String },
    #[error("malformed results: {0}")]
    Malformed(String),
    #[error(transparent)]
    Scenegen(#[from] ScenegenError),
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum PlannerKind {
    Straight,
    Reference(ReferenceParams),
}

impl PlannerKind {
    pub fn build(&self) -> Box<dyn Planner> {
        match self {
            PlannerKind::Straight => Box::new(straight_flight_planner()),
            PlannerKind::Reference(p) => Box::new(greedy_reference_planner(*p)),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AlgorithmSpec {
    pub name: String,
    pub planner: PlannerKind,
    /// Scenario names this algorithm cannot be run on; their cells are missing.
    pub unavailable: Vec<String>,
}

impl AlgorithmSpec {
    pub fn straight() -> Self {
        AlgorithmSpec { name: "straight".into(), planner: PlannerKind::Straight, unavailable: Vec::new() }
    }

    pub fn reference() -> Self {
        AlgorithmSpec {
            name: "reference".into(),
            planner: PlannerKind::Reference(ReferenceParams::default()),
            unavailable: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ScenarioSource {
    /// Instances `1..=INSTANCES_PER_FAMILY` generated from the master seed.
    Generated(Family),
    /// Explicit scenes, cycled over trials.
    Fixed(Vec<Scene>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioSpec {
    pub name: String,
    pub class: ScenarioClass,
    pub source: ScenarioSource,
}

impl ScenarioSpec {
    pub fn generated(family: Family) -> Self {
        ScenarioSpec { name: family.as_str().into(), class: family.class(), source: ScenarioSource::Generated(family) }
    }

    pub fn fixed(name: &str, class: ScenarioClass, scenes: Vec<Scene>) -> Self {
        ScenarioSpec { name: name.into(), class, source: ScenarioSource::Fixed(scenes) }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlatformSpec {
    pub name: String,
    pub category: Category,
    pub profile: KinodynamicProfile,
}

impl From<&PlatformRecord> for PlatformSpec {
    fn from(r: &PlatformRecord) -> Self {
        PlatformSpec { name: r.name.clone(), category: r.category, profile: r.profile }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScenarioInfo {
    pub name: String,
    pub class: ScenarioClass,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlatformInfo {
    pub name: String,
    pub category: Category,
}

/// Aggregate of one (algorithm, scenario, platform) combination.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cell {
    pub successes: u32,
    pub trials: u32,
    /// Per-trial outcomes in trial order; empty when loaded from a summary.
    pub outcomes: Vec<Outcome>,
    /// Trials flown on scenes that failed the solvability check.
    pub unsolvable_trials: u32,
}

impl Cell {
    pub fn from_counts(successes: u32, trials: u32) -> Self {
        assert!(trials > 0 && successes <= trials);
        Cell { successes, trials, outcomes: Vec::new(), unsolvable_trials: 0 }
    }

    pub fn rate(&self) -> f64 {
        self.successes as f64 / self.trials as f64
    }

    /// Per-trial 0/1 samples.
    pub fn samples(&self) -> Vec<f64> {
        let mut v = vec![1.0; self.successes as usize];
        v.resize(self.trials as usize, 0.0);
        v
    }
}

/// Success rates `S[a][s][m]` with an explicit missing mask.
#[derive(Debug, Clone, PartialEq)]
pub struct SuccessMatrix {
    pub algorithms: Vec<String>,
    pub scenarios: Vec<ScenarioInfo>,
    pub platforms: Vec<PlatformInfo>,
    cells: Vec<Option<Cell>>,
}

impl SuccessMatrix {
    /// All cells start missing.
    pub fn new(algorithms: Vec<String>, scenarios: Vec<ScenarioInfo>, platforms: Vec<PlatformInfo>) -> Result<Self, EvalError> {
        if algorithms.is_empty() || scenarios.is_empty() || platforms.is_empty() {
            return Err(EvalError::EmptyMatrix);
        }
        check_unique("algorithm", algorithms.iter().map(String::as_str))?;
        check_unique("scenario", scenarios.iter().map(|s| s.name.as_str()))?;
        check_unique("platform", platforms.iter().map(|p| p.name.as_str()))?;
        let n = algorithms.len() * scenarios.len() * platforms.len();
        Ok(SuccessMatrix { algorithms, scenarios, platforms, cells: vec![None; n] })
    }

    pub fn shape(&self) -> [usize; 3] {
        [self.algorithms.len(), self.scenarios.len(), self.platforms.len()]
    }

    fn flat(&self, a: usize, s: usize, m: usize) -> usize {
        let [_, ns, nm] = self.shape();
        (a * ns + s) * nm + m
    }

    pub fn cell(&self, a: usize, s: usize, m: usize) -> Option<&Cell> {
        self.cells[self.flat(a, s, m)].as_ref()
    }

    pub fn set_cell(&mut self, a: usize, s: usize, m: usize, cell: Option<Cell>) {
        let i = self.flat(a, s, m);
        self.cells[i] = cell;
    }

    pub fn rate(&self, a: usize, s: usize, m: usize) -> Option<f64> {
        self.cell(a, s, m).map(Cell::rate)
    }

    pub fn is_missing(&self, a: usize, s: usize, m: usize) -> bool {
        self.cell(a, s, m).is_none()
    }

    pub fn algorithm_index(&self, name: &str) -> Option<usize> {
        self.algorithms.iter().position(|a| a == name)
    }

    pub fn scenario_index(&self, name: &str) -> Option<usize> {
        self.scenarios.iter().position(|s| s.name == name)
    }

    pub fn platform_index(&self, name: &str) -> Option<usize> {
        self.platforms.iter().position(|p| p.name == name)
    }

    /// Rates for one algorithm as `[scenario][platform]`.
    pub fn rates_for(&self, a: usize) -> Vec<Vec<Option<f64>>> {
        let [_, ns, nm] = self.shape();
        (0..ns).map(|s| (0..nm).map(|m| self.rate(a, s, m)).collect()).collect()
    }

    pub fn missing_count(&self) -> usize {
        self.cells.iter().filter(|c| c.is_none()).count()
    }
}

fn check_unique<'a>(kind: &'static str, names: impl Iterator<Item = &'a str>) -> Result<(), EvalError> {
    let mut seen = HashSet::new();
    for n in names {
        if !seen.insert(n) {
            return Err(EvalError::DuplicateName { kind, name: n.to_string() });
        }
    }
    Ok(())
}

/// Identifies one trial in the matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialKey<'a> {
    pub algorithm: &'a str,
    pub scenario: &'a str,
    pub platform: &'a str,
    /// 1-based.
    pub trial: u32,
    pub scene: &'a Scene,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MatrixConfig {
    pub trials_per_cell: u32,
    pub master_seed: u64,
    pub task: TaskSpec,
    pub trial_options: TrialOptions,
}

impl MatrixConfig {
    pub fn new(trials_per_cell: u32, master_seed: u64) -> Self {
        MatrixConfig { trials_per_cell, master_seed, task: TaskSpec::default(), trial_options: TrialOptions::default() }
    }
}

/// Seed for one trial. Depends only on names and the trial number so that
/// adding rows or columns leaves existing cells untouched.
pub fn trial_seed(master: u64, algorithm: &str, scenario: &str, platform: &str, trial: u32) -> u64 {
    SeedBuilder::new(master)
        .label("trial")
        .label(algorithm)
        .label(scenario)
        .label(platform)
        .int(trial as u64)
        .finish()
}

/// Seed for the bootstrap of one cell.
pub fn cell_bootstrap_seed(master: u64, algorithm: &str, scenario: &str, platform: &str) -> u64 {
    SeedBuilder::new(master).label("bootstrap").label(algorithm).label(scenario).label(platform).finish()
}

/// Scene instance index flown on 1-based trial `trial`.
pub fn instance_for_trial(trial: u32, instances: u32) -> u32 {
    (trial - 1) % instances + 1
}

struct PreparedScenario {
    envs: Vec<SceneEnv>,
    solvable: Vec<bool>,
}

fn prepare(spec: &ScenarioSpec, config: &MatrixConfig) -> Result<PreparedScenario, EvalError> {
    let scenes: Vec<Scene> = match &spec.source {
        ScenarioSource::Generated(family) => {
            let count = config.trials_per_cell.min(INSTANCES_PER_FAMILY);
            (1..=count).map(|i| family.generate(config.master_seed, i)).collect::<Result<_, _>>()?
        }
        ScenarioSource::Fixed(scenes) => scenes.clone(),
    };
    if scenes.is_empty() {
        return Err(EvalError::NoScenes { name: spec.name.clone() });
    }
    let solvable = scenes.iter().map(|s| validate_scene(s, config.task.vehicle_radius).is_solvable()).collect();
    Ok(PreparedScenario { envs: scenes.into_iter().map(SceneEnv::new).collect(), solvable })
}

/// `run_matrix_with` without a per-trial sink.
pub fn run_matrix(
    algorithms: &[AlgorithmSpec],
    platforms: &[PlatformSpec],
    scenarios: &[ScenarioSpec],
    config: &MatrixConfig,
) -> Result<SuccessMatrix, EvalError> {
    run_matrix_with(algorithms, platforms, scenarios, config, &|_, _| {})
}

/// Fly every trial of every available cell and assemble the matrix.
///
/// Trial `i` flies scene instance `((i − 1) mod k) + 1` of the scenario with a
/// seed from [`trial_seed`]. Scenes failing the solvability check are still
/// flown and counted in `Cell::unsolvable_trials`. `sink` sees each finished
/// trial, possibly from several threads.
pub fn run_matrix_with(
    algorithms: &[AlgorithmSpec],
    platforms: &[PlatformSpec],
    scenarios: &[ScenarioSpec],
    config: &MatrixConfig,
    sink: &(dyn Fn(&TrialKey<'_>, &TrialResult) + Sync),
) -> Result<SuccessMatrix, EvalError> {
    if config.trials_per_cell == 0 {
        return Err(EvalError::NoTrials);
    }
    config.task.validate()?;
    let mut matrix = SuccessMatrix::new(
        algorithms.iter().map(|a| a.name.clone()).collect(),
        scenarios.iter().map(|s| ScenarioInfo { name: s.name.clone(), class: s.class }).collect(),
        platforms.iter().map(|p| PlatformInfo { name: p.name.clone(), category: p.category }).collect(),
    )?;
    let prepared: Vec<PreparedScenario> = scenarios.iter().map(|s| prepare(s, config)).collect::<Result<_, _>>()?;

    let mut work = Vec::new();
    for (a, alg) in algorithms.iter().enumerate() {
        for (s, scen) in scenarios.iter().enumerate() {
            if alg.unavailable.iter().any(|u| u == &scen.name) {
                continue;
            }
            for m in 0..platforms.len() {
                for trial in 1..=config.trials_per_cell {
                    work.push((a, s, m, trial));
                }
            }
        }
    }

    let run_one = |&(a, s, m, trial): &(usize, usize, usize, u32)| -> Result<(Outcome, bool), EvalError> {
        let alg = &algorithms[a];
        let scen = &scenarios[s];
        let plat = &platforms[m];
        let prep = &prepared[s];
        let instance = instance_for_trial(trial, prep.envs.len() as u32) as usize - 1;
        let env = &prep.envs[instance];
        let seed = trial_seed(config.master_seed, &alg.name, &scen.name, &plat.name, trial);
        let mut planner = alg.planner.build();
        let result = run_trial_in(planner.as_mut(), env, &plat.profile, &config.task, seed, &config.trial_options)?;
        let key = TrialKey {
            algorithm: &alg.name,
            scenario: &scen.name,
            platform: &plat.name,
            trial,
            scene: env.scene(),
            seed,
        };
        sink(&key, &result);
        Ok((result.outcome, prep.solvable[instance]))
    };

    #[cfg(feature = "parallel")]
    let outcomes: Vec<(Outcome, bool)> = work.par_iter().map(run_one).collect::<Result<_, _>>()?;
    #[cfg(not(feature = "parallel"))]
    let outcomes: Vec<(Outcome, bool)> = work.iter().map(run_one).collect::<Result<_, _>>()?;

    for (&(a, s, m, _), (outcome, solvable)) in work.iter().zip(outcomes) {
        let i = matrix.flat(a, s, m);
        let cell = matrix.cells[i].get_or_insert_with(|| Cell {
            successes: 0,
            trials: 0,
            outcomes: Vec::new(),
            unsolvable_trials: 0,
        });
        cell.trials += 1;
        cell.successes += u32::from(outcome == Outcome::Success);
        cell.unsolvable_trials += u32::from(!solvable);
        cell.outcomes.push(outcome);
    }
    Ok(matrix)
}
