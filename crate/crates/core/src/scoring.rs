//! Weighted composite scoring with a variance-based stability penalty.
//!
//! Success rates enter as fractions in `[0, 1]`; `score` is reported in
//! percent while `variance` stays on the fractional scale.

use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::eval::SuccessMatrix;
use crate::kinodyn::Category;
use crate::scenegen::ScenarioClass;

#[derive(Debug, Error)]
pub enum ScoringError {
    #[error("no weights to normalize")]
    EmptyWeights,
    #[error("weight {0} must be finite and positive")]
    NonPositiveWeight(f64),
    #[error("beta {0} must lie in [0, 1]")]
    InvalidBeta(f64),
    #[error("every scenario is excluded")]
    AllExcluded,
    #[error("exclusion mask has {got} entries for {expected} weights")]
    MaskLength { expected: usize, got: usize },
    #[error("unknown algorithm `{0}`")]
    UnknownAlgorithm(String),
    #[error("algorithm `{0}` has no results")]
    NoResults(String),
    #[error("no algorithms to score")]
    EmptyCohort,
    #[error("malformed score table: {0}")]
    Malformed(String),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScenarioClassWeights {
    #[serde(rename = "Classic", alias = "classic")]
    pub classic: f64,
    #[serde(rename = "Theoretical", alias = "theoretical")]
    pub theoretical: f64,
}

impl ScenarioClassWeights {
    pub fn get(&self, class: ScenarioClass) -> f64 {
        match class {
            ScenarioClass::Classic => self.classic,
            ScenarioClass::Theoretical => self.theoretical,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlatformClassWeights {
    #[serde(rename = "Real", alias = "real")]
    pub real: f64,
    #[serde(rename = "Virtual", alias = "virtual")]
    pub virtual_: f64,
}

impl PlatformClassWeights {
    pub fn get(&self, category: Category) -> f64 {
        match category {
            Category::Real => self.real,
            Category::Virtual => self.virtual_,
        }
    }
}

/// Raw class weights and penalty strength.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeightConfig {
    pub scenario_class_weights: ScenarioClassWeights,
    pub platform_class_weights: PlatformClassWeights,
    pub beta: f64,
}

impl Default for WeightConfig {
    fn default() -> Self {
        WeightConfig {
            scenario_class_weights: ScenarioClassWeights { classic: 1.2, theoretical: 1.0 },
            platform_class_weights: PlatformClassWeights { real: 1.5, virtual_: 1.0 },
            beta: 0.3,
        }
    }
}

fn check_weight(w: f64) -> Result<(), ScoringError> {
    if w.is_finite() && w > 0.0 {
        Ok(())
    } else {
        Err(ScoringError::NonPositiveWeight(w))
    }
}

fn check_beta(beta: f64) -> Result<(), ScoringError> {
    if (0.0..=1.0).contains(&beta) {
        Ok(())
    } else {
        Err(ScoringError::InvalidBeta(beta))
    }
}

impl WeightConfig {
    pub fn validate(&self) -> Result<(), ScoringError> {
        let s = &self.scenario_class_weights;
        let p = &self.platform_class_weights;
        for w in [s.classic, s.theoretical, p.real, p.virtual_] {
            check_weight(w)?;
        }
        check_beta(self.beta)
    }

    pub fn with_beta(mut self, beta: f64) -> Self {
        self.beta = beta;
        self
    }

    pub fn from_json(text: &str) -> Result<Self, ScoringError> {
        let cfg: WeightConfig = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("weight config serializes")
    }

    pub fn load(path: &Path) -> Result<Self, ScoringError> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn save(&self, path: &Path) -> Result<(), ScoringError> {
        std::fs::write(path, self.to_json() + "\n")?;
        Ok(())
    }

    /// Normalized per-scenario weights for the matrix's scenario list.
    pub fn scenario_weights(&self, matrix: &SuccessMatrix) -> Result<Vec<f64>, ScoringError> {
        let raw: Vec<f64> = matrix.scenarios.iter().map(|s| self.scenario_class_weights.get(s.class)).collect();
        normalize_weights(&raw)
    }

    /// Normalized per-platform weights for the matrix's platform list.
    pub fn platform_weights(&self, matrix: &SuccessMatrix) -> Result<Vec<f64>, ScoringError> {
        let raw: Vec<f64> = matrix.platforms.iter().map(|p| self.platform_class_weights.get(p.category)).collect();
        normalize_weights(&raw)
    }
}

/// Divides each weight by the total.
pub fn normalize_weights(raw: &[f64]) -> Result<Vec<f64>, ScoringError> {
    if raw.is_empty() {
        return Err(ScoringError::EmptyWeights);
    }
    for &w in raw {
        check_weight(w)?;
    }
    let total: f64 = raw.iter().sum();
    Ok(raw.iter().map(|w| w / total).collect())
}

/// Rescales the retained weights to sum to 1; excluded entries become 0.
/// An empty exclusion returns the weights untouched.
pub fn renormalize_missing(weights: &[f64], excluded: &[bool]) -> Result<Vec<f64>, ScoringError> {
    if weights.len() != excluded.len() {
        return Err(ScoringError::MaskLength { expected: weights.len(), got: excluded.len() });
    }
    if !excluded.contains(&true) {
        return Ok(weights.to_vec());
    }
    let kept: f64 = weights.iter().zip(excluded).filter(|(_, &x)| !x).map(|(w, _)| w).sum();
    if excluded.iter().all(|&x| x) || kept <= 0.0 {
        return Err(ScoringError::AllExcluded);
    }
    Ok(weights.iter().zip(excluded).map(|(w, &x)| if x { 0.0 } else { w / kept }).collect())
}

/// Score and variance of one algorithm before the cohort penalty.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompositeScore {
    pub algorithm: String,
    /// Weighted mean success, percent.
    pub score: f64,
    /// Weighted variance of fractional success.
    pub variance: f64,
    /// Scenarios with no results at all, removed by renormalization.
    pub excluded_scenarios: Vec<String>,
    /// Individual missing cells masked out inside retained scenarios.
    pub masked_cells: usize,
}

/// Weighted mean and variance of one algorithm's success rates.
///
/// Scenarios without any result are dropped and the remaining scenario
/// weights renormalized. Isolated missing cells are masked out of both the
/// weight sum and the variance so the weights of present cells still sum
/// to one.
pub fn composite_score(matrix: &SuccessMatrix, algorithm: &str, config: &WeightConfig) -> Result<CompositeScore, ScoringError> {
    let a = matrix.algorithm_index(algorithm).ok_or_else(|| ScoringError::UnknownAlgorithm(algorithm.to_string()))?;
    let rates = matrix.rates_for(a);
    let excluded: Vec<bool> = rates.iter().map(|row| row.iter().all(Option::is_none)).collect();
    if excluded.iter().all(|&x| x) {
        return Err(ScoringError::NoResults(algorithm.to_string()));
    }
    let ws = renormalize_missing(&config.scenario_weights(matrix)?, &excluded)?;
    let wm = config.platform_weights(matrix)?;

    let mut mass = 0.0;
    let mut sum = 0.0;
    let mut masked_cells = 0;
    for (s, row) in rates.iter().enumerate() {
        if excluded[s] {
            continue;
        }
        for (m, rate) in row.iter().enumerate() {
            match rate {
                Some(r) => {
                    mass += ws[s] * wm[m];
                    sum += ws[s] * wm[m] * r;
                }
                None => masked_cells += 1,
            }
        }
    }
    let mean = sum / mass;
    let mut spread = 0.0;
    for (s, row) in rates.iter().enumerate() {
        for (m, rate) in row.iter().enumerate() {
            if let Some(r) = rate {
                spread += ws[s] * wm[m] * (r - mean).powi(2);
            }
        }
    }
    Ok(CompositeScore {
        algorithm: algorithm.to_string(),
        score: 100.0 * mean,
        variance: spread / mass,
        excluded_scenarios: matrix
            .scenarios
            .iter()
            .zip(&excluded)
            .filter(|(_, &x)| x)
            .map(|(s, _)| s.name.clone())
            .collect(),
        masked_cells,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreEntry {
    pub algorithm: String,
    pub score: f64,
    pub variance: f64,
    /// Variance over the cohort maximum; 0 for all when every variance is 0.
    pub normalized_variance: f64,
    pub final_score: f64,
    pub excluded_scenarios: Vec<String>,
    pub masked_cells: usize,
}

impl ScoreEntry {
    /// Scored on a reduced scenario set, so not directly comparable.
    pub fn reference_only(&self) -> bool {
        !self.excluded_scenarios.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreReport {
    pub beta: f64,
    pub entries: Vec<ScoreEntry>,
}

/// Normalizes variances by the cohort maximum and applies the penalty
/// `score·(1 − β·normalized_variance)`. Entry order is preserved.
pub fn apply_penalty(scores: Vec<CompositeScore>, beta: f64) -> Result<ScoreReport, ScoringError> {
    check_beta(beta)?;
    if scores.is_empty() {
        return Err(ScoringError::EmptyCohort);
    }
    let max_var = scores.iter().map(|c| c.variance).fold(0.0, f64::max);
    let entries = scores
        .into_iter()
        .map(|c| {
            let normalized_variance = if max_var > 0.0 { c.variance / max_var } else { 0.0 };
            ScoreEntry {
                final_score: c.score * (1.0 - beta * normalized_variance),
                normalized_variance,
                algorithm: c.algorithm,
                score: c.score,
                variance: c.variance,
                excluded_scenarios: c.excluded_scenarios,
                masked_cells: c.masked_cells,
            }
        })
        .collect();
    Ok(ScoreReport { beta, entries })
}

/// Scores every algorithm in the matrix as one cohort.
pub fn score_matrix(matrix: &SuccessMatrix, config: &WeightConfig) -> Result<ScoreReport, ScoringError> {
    config.validate()?;
    let scores = matrix
        .algorithms
        .iter()
        .map(|a| composite_score(matrix, a, config))
        .collect::<Result<Vec<_>, _>>()?;
    apply_penalty(scores, config.beta)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedEntry {
    /// 1-based position in the sorted list.
    pub rank: usize,
    pub reference_only: bool,
    pub entry: ScoreEntry,
}

/// Sorts by final score, highest first; ties go to the lexicographically
/// smaller name. Entries scored on a reduced scenario set stay in the list but
/// are flagged.
pub fn rank(report: &ScoreReport) -> Vec<RankedEntry> {
    let mut entries = report.entries.clone();
    entries.sort_by(|a, b| b.final_score.total_cmp(&a.final_score).then_with(|| a.algorithm.cmp(&b.algorithm)));
    entries
        .into_iter()
        .enumerate()
        .map(|(i, entry)| RankedEntry { rank: i + 1, reference_only: entry.reference_only(), entry })
        .collect()
}

pub const SCORE_HEADER: [&str; 5] = ["algorithm", "score", "variance", "final_score", "missing_scenarios"];

/// Missing scenarios are `;`-separated, `-` when none. Masked cells add a
/// `masked_cells=<n>` token.
fn missing_field(e: &ScoreEntry) -> String {
    let mut parts = e.excluded_scenarios.clone();
    if e.masked_cells > 0 {
        parts.push(format!("masked_cells={}", e.masked_cells));
    }
    if parts.is_empty() {
        "-".to_string()
    } else {
        parts.join(";")
    }
}

/// Score table in ranked order.
pub fn write_score_csv<W: Write>(report: &ScoreReport, out: W) -> Result<(), ScoringError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(SCORE_HEADER)?;
    for r in rank(report) {
        let e = &r.entry;
        w.write_record([
            e.algorithm.clone(),
            format!("{:.6}", e.score),
            format!("{:.6}", e.variance),
            format!("{:.6}", e.final_score),
            missing_field(e),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn score_csv(report: &ScoreReport) -> String {
    let mut buf = Vec::new();
    write_score_csv(report, &mut buf).expect("writing to memory");
    String::from_utf8(buf).expect("csv is utf-8")
}

/// Reads `algorithm,score,variance[,final_score][,missing_scenarios]` rows as
/// penalty-free composites; any final score column is ignored.
pub fn read_score_table<R: Read>(input: R) -> Result<Vec<CompositeScore>, ScoringError> {
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(input);
    let headers = reader.headers()?.clone();
    let col = |name: &str| headers.iter().position(|h| h == name);
    let (Some(ia), Some(is), Some(iv)) = (col("algorithm"), col("score"), col("variance")) else {
        return Err(ScoringError::Malformed("need algorithm, score and variance columns".into()));
    };
    let im = col("missing_scenarios");
    let mut out = Vec::new();
    for rec in reader.records() {
        let rec = rec?;
        let num = |i: usize| -> Result<f64, ScoringError> {
            let field = rec.get(i).unwrap_or("");
            field.parse().map_err(|_| ScoringError::Malformed(format!("`{field}` is not a number")))
        };
        let mut excluded = Vec::new();
        let mut masked_cells = 0;
        for part in im.and_then(|i| rec.get(i)).unwrap_or("-").split(';').map(str::trim) {
            if part.is_empty() || part == "-" {
                continue;
            }
            match part.strip_prefix("masked_cells=") {
                Some(n) => masked_cells = n.parse().map_err(|_| ScoringError::Malformed(format!("bad mask count `{n}`")))?,
                None => excluded.push(part.to_string()),
            }
        }
        out.push(CompositeScore {
            algorithm: rec.get(ia).unwrap_or("").to_string(),
            score: num(is)?,
            variance: num(iv)?,
            excluded_scenarios: excluded,
            masked_cells,
        });
    }
    if out.is_empty() {
        return Err(ScoringError::EmptyCohort);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eval::{Cell, PlatformInfo, ScenarioInfo};

    fn two_by_two(rates: [[f64; 2]; 2]) -> SuccessMatrix {
        let mut m = SuccessMatrix::new(
            vec!["a".into()],
            vec![
                ScenarioInfo { name: "classic".into(), class: ScenarioClass::Classic },
                ScenarioInfo { name: "theory".into(), class: ScenarioClass::Theoretical },
            ],
            vec![
                PlatformInfo { name: "real".into(), category: Category::Real },
                PlatformInfo { name: "virtual".into(), category: Category::Virtual },
            ],
        )
        .unwrap();
        for (s, row) in rates.iter().enumerate() {
            for (p, r) in row.iter().enumerate() {
                m.set_cell(0, s, p, Some(Cell::from_counts((r * 10.0).round() as u32, 10)));
            }
        }
        m
    }

    #[test]
    fn normalization_examples() {
        let w = normalize_weights(&[1.2, 1.0]).unwrap();
        assert!((w[0] - 0.545455).abs() < 1e-6 && (w[1] - 0.454545).abs() < 1e-6);
        assert!(matches!(normalize_weights(&[]), Err(ScoringError::EmptyWeights)));
        assert!(matches!(normalize_weights(&[1.0, 0.0]), Err(ScoringError::NonPositiveWeight(_))));
    }

    #[test]
    fn renormalization_examples() {
        let w = renormalize_missing(&[0.4, 0.35, 0.25], &[false, false, true]).unwrap();
        assert!((w[0] - 0.533333).abs() < 1e-6 && (w[1] - 0.466667).abs() < 1e-6);
        assert_eq!(w[2], 0.0);
        assert_eq!(renormalize_missing(&[0.4, 0.6], &[false, false]).unwrap(), vec![0.4, 0.6]);
        assert!(matches!(renormalize_missing(&[1.0], &[true]), Err(ScoringError::AllExcluded)));
    }

    #[test]
    fn hand_computed_two_by_two() {
        // Ws = (6/11, 5/11), Wm = (0.6, 0.4):
        // mean = 6/11·0.8 + 5/11·0.2 = 5.8/11.
        let m = two_by_two([[1.0, 0.5], [0.0, 0.5]]);
        let c = composite_score(&m, "a", &WeightConfig::default()).unwrap();
        let mean: f64 = 5.8 / 11.0;
        let var = 6.0 / 11.0 * (0.6 * (1.0 - mean).powi(2) + 0.4 * (0.5 - mean).powi(2))
            + 5.0 / 11.0 * (0.6 * mean.powi(2) + 0.4 * (0.5 - mean).powi(2));
        assert!((c.score - 100.0 * mean).abs() < 1e-12);
        assert!((c.variance - var).abs() < 1e-12);
        assert!((c.score - 52.73).abs() < 0.005);
        assert!((c.variance - 0.1493).abs() < 5e-5);
    }

    #[test]
    fn perfect_algorithm() {
        let m = two_by_two([[1.0, 1.0], [1.0, 1.0]]);
        let r = score_matrix(&m, &WeightConfig::default()).unwrap();
        let e = &r.entries[0];
        assert_eq!((e.score, e.variance, e.normalized_variance, e.final_score), (100.0, 0.0, 0.0, 100.0));
    }

    #[test]
    fn masked_cell_drops_out_of_mean() {
        let mut m = two_by_two([[1.0, 0.0], [1.0, 1.0]]);
        m.set_cell(0, 0, 1, None);
        let c = composite_score(&m, "a", &WeightConfig::default()).unwrap();
        assert_eq!(c.masked_cells, 1);
        assert!(c.excluded_scenarios.is_empty());
        assert!((c.score - 100.0).abs() < 1e-12 && c.variance.abs() < 1e-12);
    }

    #[test]
    fn whole_scenario_exclusion_flags_reference_only() {
        let mut m = two_by_two([[1.0, 0.5], [0.0, 0.5]]);
        m.set_cell(0, 1, 0, None);
        m.set_cell(0, 1, 1, None);
        let c = composite_score(&m, "a", &WeightConfig::default()).unwrap();
        assert_eq!(c.excluded_scenarios, vec!["theory".to_string()]);
        assert_eq!(c.masked_cells, 0);
        assert!((c.score - 80.0).abs() < 1e-12);
        let report = apply_penalty(vec![c], 0.3).unwrap();
        assert!(rank(&report)[0].reference_only);
    }

    #[test]
    fn all_zero_variance_cohort() {
        let cs = ["x", "y"].map(|n| CompositeScore {
            algorithm: n.into(),
            score: 50.0,
            variance: 0.0,
            excluded_scenarios: vec![],
            masked_cells: 0,
        });
        let r = apply_penalty(cs.to_vec(), 0.3).unwrap();
        assert!(r.entries.iter().all(|e| e.normalized_variance == 0.0 && e.final_score == 50.0));
        let ranked = rank(&r);
        assert_eq!((ranked[0].entry.algorithm.as_str(), ranked[1].entry.algorithm.as_str()), ("x", "y"));
    }

    #[test]
    fn config_json_round_trip() {
        let cfg = WeightConfig::default();
        let text = cfg.to_json();
        assert!(text.contains("scenario_class_weights") && text.contains("\"Classic\": 1.2"));
        assert_eq!(WeightConfig::from_json(&text).unwrap(), cfg);
        let bad = text.replace("0.3", "1.5");
        assert!(matches!(WeightConfig::from_json(&bad), Err(ScoringError::InvalidBeta(_))));
    }

    #[test]
    fn score_csv_round_trip() {
        let m = two_by_two([[1.0, 0.5], [0.0, 0.5]]);
        let r = score_matrix(&m, &WeightConfig::default()).unwrap();
        let text = score_csv(&r);
        assert!(text.starts_with("algorithm,score,variance,final_score,missing_scenarios\n"));
        let back = read_score_table(text.as_bytes()).unwrap();
        assert_eq!(back[0].algorithm, "a");
        assert!((back[0].score - r.entries[0].score).abs() < 1e-6);
    }
}
