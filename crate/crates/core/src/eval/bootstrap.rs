use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::EvalError;

pub const DEFAULT_RESAMPLES: usize = 1000;
pub const DEFAULT_LEVEL: f64 = 0.95;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConfidenceInterval {
    pub mean: f64,
    pub lower: f64,
    pub upper: f64,
    pub level: f64,
    pub resamples: usize,
}

/// Percentile bootstrap of the sample mean.
///
/// Resampled means are sorted and the bounds read at
/// `floor(B·(1 − level)/2)` and `ceil(B·(1 + level)/2) − 1`. The interval is
/// widened to contain the sample mean when the percentiles miss it.
pub fn bootstrap_ci(samples: &[f64], resamples: usize, level: f64, seed: u64) -> Result<ConfidenceInterval, EvalError> {
    if samples.is_empty() {
        return Err(EvalError::EmptySamples);
    }
    if !(level > 0.0 && level < 1.0) {
        return Err(EvalError::InvalidLevel(level));
    }
    if resamples == 0 {
        return Err(EvalError::InvalidResamples);
    }
    let n = samples.len();
    let mean = samples.iter().sum::<f64>() / n as f64;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut means: Vec<f64> = (0..resamples)
        .map(|_| (0..n).map(|_| samples[rng.random_range(0..n)]).sum::<f64>() / n as f64)
        .collect();
    means.sort_by(f64::total_cmp);
    let alpha = 1.0 - level;
    let lo_idx = ((resamples as f64 * alpha / 2.0).floor() as usize).min(resamples - 1);
    let hi_idx = ((resamples as f64 * (1.0 - alpha / 2.0)).ceil() as usize).clamp(1, resamples) - 1;
    Ok(ConfidenceInterval {
        mean,
        lower: means[lo_idx].min(mean),
        upper: means[hi_idx].max(mean),
        level,
        resamples,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn degenerate_samples() {
        let ones = bootstrap_ci(&[1.0; 10], 1000, 0.95, 3).unwrap();
        assert_eq!((ones.mean, ones.lower, ones.upper), (1.0, 1.0, 1.0));
        let zeros = bootstrap_ci(&[0.0; 10], 1000, 0.95, 3).unwrap();
        assert_eq!((zeros.mean, zeros.lower, zeros.upper), (0.0, 0.0, 0.0));
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(bootstrap_ci(&[], 1000, 0.95, 1), Err(EvalError::EmptySamples)));
        assert!(matches!(bootstrap_ci(&[1.0], 1000, 1.0, 1), Err(EvalError::InvalidLevel(_))));
    }

    #[test]
    fn deterministic_under_seed() {
        let s = [1.0, 0.0, 1.0, 1.0, 0.0, 1.0, 0.0, 1.0, 1.0, 0.0];
        assert_eq!(bootstrap_ci(&s, 1000, 0.95, 42).unwrap(), bootstrap_ci(&s, 1000, 0.95, 42).unwrap());
    }
}
