//! Monte Carlo estimates and binomial confidence intervals.

use libm::sqrt;

use crate::numeric::pairwise_sum;

/// Sampled quantity with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MonteCarloEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub n: u64,
    pub seed: u64,
}

impl MonteCarloEstimate {
    /// Proportion of `successes` out of `n` trials.
    pub fn from_bernoulli(successes: u64, n: u64, seed: u64) -> Self {
        assert!(n >= 1, "estimate needs at least one sample");
        let p = successes as f64 / n as f64;
        MonteCarloEstimate {
            mean: p,
            std_error: sqrt(p * (1.0 - p) / n as f64),
            n,
            seed,
        }
    }

    /// Sample mean and standard error of the mean (unbiased variance).
    pub fn from_samples(samples: &[f64], seed: u64) -> Self {
        let n = samples.len();
        assert!(n >= 1, "estimate needs at least one sample");
        let mean = pairwise_sum(samples) / n as f64;
        let std_error = if n > 1 {
            let dev: alloc::vec::Vec<f64> = samples.iter().map(|x| (x - mean) * (x - mean)).collect();
            sqrt(pairwise_sum(&dev) / (n - 1) as f64 / n as f64)
        } else {
            0.0
        };
        MonteCarloEstimate {
            mean,
            std_error,
            n: n as u64,
            seed,
        }
    }

    /// Multiplies mean and standard error by `c > 0`.
    pub fn scaled(self, c: f64) -> Self {
        MonteCarloEstimate {
            mean: self.mean * c,
            std_error: self.std_error * c,
            ..self
        }
    }

    /// Whether `reference` is within `k` standard errors of the mean.
    pub fn agrees_with(&self, reference: f64, k: f64) -> bool {
        (self.mean - reference).abs() <= k * self.std_error
    }
}

/// Wilson score interval `(lower, upper)` for `successes` out of `n` at
/// normal quantile `z` (1.959963984540054 for 95%).
pub fn wilson_interval(successes: u64, n: u64, z: f64) -> (f64, f64) {
    assert!(n >= 1, "interval needs at least one trial");
    let nf = n as f64;
    let p = successes as f64 / nf;
    let z2 = z * z;
    let denom = 1.0 + z2 / nf;
    let centre = (p + z2 / (2.0 * nf)) / denom;
    let half = z * sqrt(p * (1.0 - p) / nf + z2 / (4.0 * nf * nf)) / denom;
    ((centre - half).max(0.0), (centre + half).min(1.0))
}

pub const Z_95: f64 = 1.959_963_984_540_054;
