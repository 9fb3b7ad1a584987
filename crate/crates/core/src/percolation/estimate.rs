//! Monte Carlo estimates with Wilson score intervals.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{sample, PercConfig};
use super::rng::StreamKey;
use super::window::EdgeWindow;

/// Two-sided 95% normal quantile.
pub const Z95: f64 = 1.959_963_984_540_054;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Estimate {
    pub successes: u64,
    pub trials: u64,
}

/// Wilson score interval at normal quantile `z`.
pub fn wilson(successes: u64, trials: u64, z: f64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let n = trials as f64;
    let ph = successes as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let centre = (ph + z2 / (2.0 * n)) / denom;
    let half = z * (ph * (1.0 - ph) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    let lo = if successes == 0 { 0.0 } else { (centre - half).max(0.0) };
    let hi = if successes == trials { 1.0 } else { (centre + half).min(1.0) };
    (lo, hi)
}

impl Estimate {
    pub fn new(successes: u64, trials: u64) -> Self {
        Estimate { successes, trials }
    }

    pub fn phat(&self) -> f64 {
        if self.trials == 0 {
            return f64::NAN;
        }
        self.successes as f64 / self.trials as f64
    }

    pub fn interval(&self) -> (f64, f64) {
        wilson(self.successes, self.trials, Z95)
    }

    pub fn lower(&self) -> f64 {
        self.interval().0
    }

    pub fn upper(&self) -> f64 {
        self.interval().1
    }

    pub fn ci_halfwidth(&self) -> f64 {
        let (lo, hi) = self.interval();
        (hi - lo) / 2.0
    }
}

/// Fraction of trials on which `event` holds; trial `t` uses stream `t` of `key`.
pub fn estimate<F>(window: &EdgeWindow, p: f64, trials: u64, key: StreamKey, event: F) -> Estimate
where
    F: Fn(&PercConfig) -> bool + Sync,
{
    assert!(trials >= 1, "at least one trial");
    let hits: u64 = (0..trials).into_par_iter().map(|t| event(&sample(window, p, key, t)) as u64).sum();
    Estimate::new(hits, trials)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wilson_at_extremes() {
        let (lo, hi) = wilson(100, 100, Z95);
        assert_eq!(hi, 1.0);
        assert!((lo - 100.0 / (100.0 + Z95 * Z95)).abs() < 1e-12);
        let (lo, hi) = wilson(0, 100, Z95);
        assert_eq!(lo, 0.0);
        assert!(hi > 0.0 && hi < 0.05);
    }

    #[test]
    fn wilson_contains_phat() {
        for s in 0..=20 {
            let (lo, hi) = wilson(s, 20, Z95);
            let ph = s as f64 / 20.0;
            assert!(lo <= ph && ph <= hi);
        }
    }
}
