use rand::seq::SliceRandom;
use rand::Rng;

use super::ScenegenError;

/// Improved 3D gradient noise with a seeded permutation table. Output is in
/// roughly `[-1, 1]` and exactly zero on integer lattice points.
#[derive(Debug, Clone)]
pub struct PerlinNoise {
    perm: [u8; 512],
}

impl PerlinNoise {
    pub fn new<R: Rng>(rng: &mut R) -> Self {
        let mut p: Vec<u8> = (0..=255).collect();
        p.shuffle(rng);
        let mut perm = [0u8; 512];
        for i in 0..512 {
            perm[i] = p[i & 255];
        }
        PerlinNoise { perm }
    }

    pub fn sample(&self, x: f64, y: f64, z: f64) -> f64 {
        let (xi, xf) = split(x);
        let (yi, yf) = split(y);
        let (zi, zf) = split(z);
        let u = fade(xf);
        let v = fade(yf);
        let w = fade(zf);
        let p = &self.perm;
        let a = p[xi] as usize + yi;
        let aa = p[a] as usize + zi;
        let ab = p[a + 1] as usize + zi;
        let b = p[xi + 1] as usize + yi;
        let ba = p[b] as usize + zi;
        let bb = p[b + 1] as usize + zi;

        lerp(
            w,
            lerp(
                v,
                lerp(u, grad(p[aa], xf, yf, zf), grad(p[ba], xf - 1.0, yf, zf)),
                lerp(u, grad(p[ab], xf, yf - 1.0, zf), grad(p[bb], xf - 1.0, yf - 1.0, zf)),
            ),
            lerp(
                v,
                lerp(u, grad(p[aa + 1], xf, yf, zf - 1.0), grad(p[ba + 1], xf - 1.0, yf, zf - 1.0)),
                lerp(u, grad(p[ab + 1], xf, yf - 1.0, zf - 1.0), grad(p[bb + 1], xf - 1.0, yf - 1.0, zf - 1.0)),
            ),
        )
    }
}

fn split(v: f64) -> (usize, f64) {
    let f = v.floor();
    ((f as i64).rem_euclid(256) as usize, v - f)
}

fn fade(t: f64) -> f64 {
    t * t * t * (t * (t * 6.0 - 15.0) + 10.0)
}

fn lerp(t: f64, a: f64, b: f64) -> f64 {
    a + t * (b - a)
}

fn grad(hash: u8, x: f64, y: f64, z: f64) -> f64 {
    let h = hash & 15;
    let u = if h < 8 { x } else { y };
    let v = if h < 4 {
        y
    } else if h == 12 || h == 14 {
        x
    } else {
        z
    };
    (if h & 1 == 0 { u } else { -u }) + (if h & 2 == 0 { v } else { -v })
}

/// Threshold `t` such that the share of `values` strictly above `t`, measured
/// against `total` cells, is within `tolerance` of `target`.
///
/// Bisects over `[min, max]` of the values. Fails when the field is flat or no
/// threshold lands inside the tolerance band.
pub fn fill_threshold(values: &[f64], total: usize, target: f64, tolerance: f64) -> Result<f64, ScenegenError> {
    if values.is_empty() || total == 0 {
        return Err(ScenegenError::Threshold("no samples".into()));
    }
    let (lo, hi) = values
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    // min/max skip NaN, so an all-NaN field also lands here.
    if hi <= lo {
        return Err(ScenegenError::Threshold("noise field is constant".into()));
    }
    let fraction = |t: f64| values.iter().filter(|&&v| v > t).count() as f64 / total as f64;
    let (mut lo, mut hi) = (lo, hi);
    let mut best = (f64::INFINITY, hi);
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        let f = fraction(mid);
        let err = (f - target).abs();
        if err < best.0 {
            best = (err, mid);
        }
        if err <= tolerance * 0.1 {
            break;
        }
        if f > target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    if best.0 <= tolerance {
        Ok(best.1)
    } else {
        Err(ScenegenError::Threshold(format!("closest fill {:.4} misses target {target}", best.0)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn zero_on_lattice_and_bounded() {
        let n = PerlinNoise::new(&mut ChaCha8Rng::seed_from_u64(3));
        assert_eq!(n.sample(2.0, 5.0, 7.0), 0.0);
        for i in 0..1000 {
            let t = i as f64 * 0.0137;
            let v = n.sample(t * 3.1, t * 1.7, t * 0.3);
            assert!(v.abs() <= 1.1, "{v}");
        }
    }

    #[test]
    fn noise_is_continuous() {
        let n = PerlinNoise::new(&mut ChaCha8Rng::seed_from_u64(9));
        let a = n.sample(1.3, 2.7, 0.4);
        let b = n.sample(1.3 + 1e-7, 2.7, 0.4);
        assert!((a - b).abs() < 1e-5);
    }

    #[test]
    fn flat_field_fails_threshold_search() {
        let values = vec![0.0; 1000];
        assert!(matches!(fill_threshold(&values, 1000, 0.03, 0.005), Err(ScenegenError::Threshold(_))));
    }

    #[test]
    fn threshold_hits_target_on_ramp() {
        let values: Vec<f64> = (0..10_000).map(|i| i as f64).collect();
        let t = fill_threshold(&values, 10_000, 0.03, 0.005).unwrap();
        let f = values.iter().filter(|&&v| v > t).count() as f64 / 10_000.0;
        assert!((f - 0.03).abs() <= 0.0005);
    }
}
