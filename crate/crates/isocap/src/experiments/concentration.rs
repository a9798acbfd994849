//! Concentration of the angle between two Haar points around `pi/2`.

use std::f64::consts::{FRAC_PI_2, LN_2};

use isocap_core::{sample_sphere, MonteCarloEstimate, Pole, RandomStream, Sphere};

use crate::config::ConcentrationConfig;
use crate::error::AppResult;
use crate::output::{fmt_bool, fmt_f64, Artifacts, Table};

use super::Outcome;

pub const HEADER: &[&str] = &[
    "m",
    "radius",
    "eps",
    "exact_probability",
    "target",
    "meets_target",
    "n_samples",
    "estimate_mean",
    "estimate_std_error",
    "estimate_agrees",
];

#[derive(Debug, Clone, PartialEq)]
pub struct ConcentrationRow {
    pub m: usize,
    /// `P(angle(z0, Y) in [pi/2 - eps, pi/2 + eps])`.
    pub exact: f64,
    pub target: f64,
    pub meets_target: bool,
    pub estimate: Option<MonteCarloEstimate>,
    /// Estimate within 4 standard errors of `exact`.
    pub agrees: Option<bool>,
}

#[derive(Debug, Clone)]
pub struct ConcentrationReport {
    pub config: ConcentrationConfig,
    pub rows: Vec<ConcentrationRow>,
    /// Exact probabilities nondecreasing in `m` (rows taken in increasing `m`).
    pub monotone_in_m: bool,
}

/// `1 - 2 F(pi/2 - eps)`.
pub fn exact_probability(sphere: &Sphere, eps: f64) -> f64 {
    let ln_f = sphere.tails(FRAC_PI_2 - eps).lower;
    -(LN_2 + ln_f).exp_m1()
}

pub fn run(config: &ConcentrationConfig) -> AppResult<ConcentrationReport> {
    let eps = config.eps;
    let mut rows = Vec::with_capacity(config.ms.len());
    for &m in &config.ms {
        let sphere = Sphere::new(m, config.radius)?;
        let exact = exact_probability(&sphere, eps);
        let estimate = (config.samples > 0).then(|| {
            // One stream per dimension, so a row does not depend on the list.
            let mut stream = RandomStream::new(config.seed, m as u64);
            let pole = Pole::axis(0);
            let hits = (0..config.samples)
                .filter(|_| {
                    let z = sample_sphere(&sphere, &mut stream);
                    (pole.angle_to(&z) - FRAC_PI_2).abs() <= eps
                })
                .count() as u64;
            MonteCarloEstimate::from_bernoulli(hits, config.samples, config.seed)
        });
        rows.push(ConcentrationRow {
            m,
            exact,
            target: 1.0 - eps,
            meets_target: exact >= 1.0 - eps,
            agrees: estimate.map(|e| e.agrees_with(exact, 4.0)),
            estimate,
        });
    }
    let mut by_m: Vec<&ConcentrationRow> = rows.iter().collect();
    by_m.sort_by_key(|r| r.m);
    let monotone_in_m = by_m.windows(2).all(|w| w[1].exact >= w[0].exact);
    Ok(ConcentrationReport {
        config: config.clone(),
        rows,
        monotone_in_m,
    })
}

impl ConcentrationReport {
    pub fn passed(&self) -> bool {
        self.monotone_in_m && self.rows.iter().all(|r| r.meets_target && r.agrees != Some(false))
    }

    pub fn table(&self) -> Table {
        let mut t = Table::new(HEADER);
        for r in &self.rows {
            let (n, mean, se, agrees) = match (&r.estimate, r.agrees) {
                (Some(e), Some(a)) => (
                    e.n.to_string(),
                    fmt_f64(e.mean),
                    fmt_f64(e.std_error),
                    fmt_bool(a).to_string(),
                ),
                _ => ("0".into(), String::new(), String::new(), String::new()),
            };
            t.push(vec![
                r.m.to_string(),
                fmt_f64(self.config.radius),
                fmt_f64(self.config.eps),
                fmt_f64(r.exact),
                fmt_f64(r.target),
                fmt_bool(r.meets_target).into(),
                n,
                mean,
                se,
                agrees,
            ]);
        }
        t
    }

    pub fn into_outcome(self) -> Outcome {
        let failing: Vec<String> = self
            .rows
            .iter()
            .filter(|r| !r.meets_target)
            .map(|r| r.m.to_string())
            .collect();
        let summary = format!(
            "concentration: eps={} over {} dimension(s); below 1-eps at m in [{}]; monotone in m: {}",
            self.config.eps,
            self.rows.len(),
            failing.join(","),
            self.monotone_in_m
        );
        let artifacts = Artifacts {
            main: self.table(),
            details: Vec::new(),
        };
        Outcome::new("concentration", &self.config, artifacts, self.passed(), summary)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(ms: Vec<usize>, eps: f64, samples: u64) -> ConcentrationConfig {
        ConcentrationConfig {
            ms,
            radius: 1.0,
            eps,
            samples,
            seed: 3,
        }
    }

    #[test]
    fn two_sphere_closed_form() {
        let r = run(&cfg(vec![3], 0.1, 0)).unwrap();
        assert!((r.rows[0].exact - 0.1f64.sin()).abs() < 1e-15);
        assert!(!r.passed());
    }

    #[test]
    fn near_the_full_sphere() {
        let r = run(&cfg(vec![5, 50], FRAC_PI_2 - 1e-9, 0)).unwrap();
        assert!(r.rows.iter().all(|row| (row.exact - 1.0).abs() < 1e-8));
    }

    #[test]
    fn sampled_estimate_agrees() {
        let r = run(&cfg(vec![40], 0.2, 20_000)).unwrap();
        assert_eq!(r.rows[0].agrees, Some(true));
    }
}
