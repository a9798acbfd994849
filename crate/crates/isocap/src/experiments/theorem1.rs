//! Monte Carlo check of `P(mu(A ∩ Cap(Y, omega + eps)) > (1 - eps) V) >= 1 - eps`
//! for Haar-random `Y`.
//!
//! For each outer sample `Y` the intersection is `mu(Cap(omega + eps))` times
//! the probability that a uniform point of `Cap(Y, omega + eps)` lies in `A`.
//! For zonal sets that probability is estimated by drawing only the angle
//! `rho` of the cap point from `Y` and averaging the exact probability that the
//! rest of the point (uniform on the slice at angle `rho`) lands in `A`. This is
//! the conditional expectation of the plain hit count, so it has the same mean
//! and never more variance; at `m = 128` the plain hit rate is of order 1e-12
//! and would almost always be zero. Other sets use plain hit counting.

use isocap_core::estimate::Z_95;
use isocap_core::numeric::{log_sum_exp, pairwise_sum};
use isocap_core::{
    sample_sphere, theorem1_v, wilson_interval, CapSampler, MonteCarloEstimate, Pole, RandomStream, Sphere,
    SpherePoint, SphereSet, ZonalSet,
};
use rayon::prelude::*;

use crate::config::Theorem1Config;
use crate::error::AppResult;
use crate::output::{fmt_bool, fmt_f64, Artifacts, Table};

use super::{measure_of, Outcome};

pub const HEADER: &[&str] = &[
    "set",
    "m",
    "radius",
    "omega",
    "eps",
    "effective_angle",
    "measure_exact",
    "inner_estimator",
    "ln_v",
    "ln_threshold",
    "ln_cap_measure",
    "ln_set_measure",
    "n_outer",
    "n_inner",
    "seed",
    "successes",
    "success_rate",
    "success_std_error",
    "wilson_lower",
    "wilson_upper",
    "meets_target",
    "total_mass_ratio",
    "total_mass_std_error",
    "total_mass_z",
    "total_mass_ok",
];

pub const PER_Y_HEADER: &[&str] = &[
    "y_index",
    "alpha",
    "ln_estimate",
    "ln_estimate_over_v",
    "inner_rel_std_error",
    "success",
];

/// Inner estimate for one outer sample.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PerY {
    pub index: u64,
    /// Angle from the set's axis to `Y`; NaN for non-zonal sets.
    pub alpha: f64,
    /// `ln` of the estimated `mu(A ∩ Cap(Y, omega + eps))`.
    pub ln_estimate: f64,
    /// Inner standard error relative to the estimate.
    pub inner_rel_std_error: f64,
    pub success: bool,
}

/// Everything fixed across outer samples.
#[derive(Debug, Clone)]
pub struct Theorem1Setup {
    pub sphere: Sphere,
    pub set: SphereSet,
    zonal: Option<ZonalSet>,
    sampler: CapSampler,
    pub effective_angle: f64,
    pub measure_exact: bool,
    pub ln_set_fraction: f64,
    pub ln_v: f64,
    pub ln_threshold: f64,
    /// `ln mu(Cap(omega + eps))`.
    pub ln_cap_measure: f64,
}

impl Theorem1Setup {
    pub fn new(config: &Theorem1Config) -> AppResult<Self> {
        config.validate()?;
        let sphere = Sphere::new(config.m, config.radius)?;
        let set = config.set.build(sphere)?.canonicalize();
        let (ln_set_fraction, theta, measure_exact) = measure_of(&set, config.samples, config.seed)?;
        let ln_v = theorem1_v(&sphere, theta, config.omega)?.ln();
        let kappa = config.omega + config.eps;
        Ok(Theorem1Setup {
            sphere,
            zonal: set.zonal().ok(),
            set,
            sampler: CapSampler::new(sphere, kappa)?,
            effective_angle: theta,
            measure_exact,
            ln_set_fraction,
            ln_v,
            ln_threshold: (1.0 - config.eps).ln() + ln_v,
            ln_cap_measure: sphere.log_area().ln() + sphere.tails(kappa).lower,
        })
    }

    pub fn inner_estimator(&self) -> &'static str {
        if self.zonal.is_some() {
            "conditional"
        } else {
            "counting"
        }
    }

    /// `(ln P(z in A), relative standard error)` for `z` uniform in
    /// `Cap(y, omega + eps)`, from `n` draws.
    pub fn cap_hit_probability(&self, y: &SpherePoint, n: u64, stream: &mut RandomStream) -> AppResult<(f64, f64)> {
        let nf = n as f64;
        match &self.zonal {
            Some(z) => {
                let alpha = z.axis().angle_to(y);
                let ln_c: Vec<f64> = (0..n)
                    .map(|_| z.ln_slice_membership(alpha, self.sampler.sample_latitude(stream)))
                    .collect();
                let ln_sum = log_sum_exp(&ln_c);
                if ln_sum == f64::NEG_INFINITY {
                    return Ok((f64::NEG_INFINITY, f64::NAN));
                }
                // Moments relative to the mean avoid underflow.
                let ln_mean = ln_sum - nf.ln();
                let sq: Vec<f64> = ln_c.iter().map(|&l| ((l - ln_mean).exp() - 1.0).powi(2)).collect();
                let rel_se = (pairwise_sum(&sq) / (nf - 1.0) / nf).sqrt();
                Ok((ln_mean, rel_se))
            }
            None => {
                let pole = Pole::direction(y.unit())?;
                let mut hits = 0u64;
                for _ in 0..n {
                    if self.set.contains(&self.sampler.sample(&pole, stream)?)? {
                        hits += 1;
                    }
                }
                let p = hits as f64 / nf;
                Ok((p.ln(), ((1.0 - p) / (p * nf)).sqrt()))
            }
        }
    }

    /// Outer sample `index`: `Y` and its inner draws all come from stream
    /// `(seed, index)`, so the result does not depend on scheduling.
    pub fn outer_sample(&self, seed: u64, index: u64, n_inner: u64) -> AppResult<PerY> {
        let mut stream = RandomStream::new(seed, index);
        let y = sample_sphere(&self.sphere, &mut stream);
        let alpha = self.zonal.as_ref().map_or(f64::NAN, |z| z.axis().angle_to(&y));
        let (ln_p, rel_se) = self.cap_hit_probability(&y, n_inner, &mut stream)?;
        let ln_estimate = self.ln_cap_measure + ln_p;
        Ok(PerY {
            index,
            alpha,
            ln_estimate,
            inner_rel_std_error: rel_se,
            success: ln_estimate > self.ln_threshold,
        })
    }
}

#[derive(Debug, Clone)]
pub struct Theorem1Report {
    pub config: Theorem1Config,
    pub setup: Theorem1Setup,
    pub per_y: Vec<PerY>,
    pub success: MonteCarloEstimate,
    pub successes: u64,
    pub wilson: (f64, f64),
    /// Wilson lower bound at least `1 - eps`.
    pub meets_target: bool,
    /// Mean over `Y` of the estimate divided by `mu(Cap(omega + eps)) P(A)`;
    /// should be 1. The standard error is that of the per-`Y` estimates, so
    /// it already carries the inner sampling noise.
    pub total_mass_ratio: f64,
    pub total_mass_std_error: f64,
    pub total_mass_z: f64,
    /// Ratio within 4 standard errors of 1.
    pub total_mass_ok: bool,
}

pub fn run(config: &Theorem1Config) -> AppResult<Theorem1Report> {
    let setup = Theorem1Setup::new(config)?;
    let per_y = (0..config.n_outer)
        .into_par_iter()
        .map(|i| setup.outer_sample(config.seed, i, config.n_inner))
        .collect::<AppResult<Vec<PerY>>>()?;

    let n = config.n_outer;
    let successes = per_y.iter().filter(|p| p.success).count() as u64;
    let wilson = wilson_interval(successes, n, Z_95);

    // Total mass, in units of the expected mean and shifted by the largest
    // term so nothing overflows.
    let ln_unit = setup.ln_cap_measure + setup.ln_set_fraction;
    let lq: Vec<f64> = per_y.iter().map(|p| p.ln_estimate - ln_unit).collect();
    let shift = lq.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let shift = if shift.is_finite() { shift } else { 0.0 };
    let w: Vec<f64> = lq.iter().map(|l| (l - shift).exp()).collect();
    let est = MonteCarloEstimate::from_samples(&w, config.seed);
    let one = (-shift).exp();
    let total_mass_z = (est.mean - one) / est.std_error;
    let total_mass_ok = (est.mean - one).abs() <= 4.0 * est.std_error;

    Ok(Theorem1Report {
        config: config.clone(),
        success: MonteCarloEstimate::from_bernoulli(successes, n, config.seed),
        successes,
        wilson,
        meets_target: wilson.0 >= 1.0 - config.eps,
        total_mass_ratio: est.mean * shift.exp(),
        total_mass_std_error: est.std_error * shift.exp(),
        total_mass_z,
        total_mass_ok,
        setup,
        per_y,
    })
}

impl Theorem1Report {
    pub fn passed(&self) -> bool {
        self.meets_target && self.total_mass_ok
    }

    pub fn table(&self) -> Table {
        let c = &self.config;
        let s = &self.setup;
        let mut t = Table::new(HEADER);
        t.push(vec![
            c.set.to_json(),
            c.m.to_string(),
            fmt_f64(c.radius),
            fmt_f64(c.omega),
            fmt_f64(c.eps),
            fmt_f64(s.effective_angle),
            fmt_bool(s.measure_exact).into(),
            s.inner_estimator().into(),
            fmt_f64(s.ln_v),
            fmt_f64(s.ln_threshold),
            fmt_f64(s.ln_cap_measure),
            fmt_f64(s.sphere.log_area().ln() + s.ln_set_fraction),
            c.n_outer.to_string(),
            c.n_inner.to_string(),
            c.seed.to_string(),
            self.successes.to_string(),
            fmt_f64(self.success.mean),
            fmt_f64(self.success.std_error),
            fmt_f64(self.wilson.0),
            fmt_f64(self.wilson.1),
            fmt_bool(self.meets_target).into(),
            fmt_f64(self.total_mass_ratio),
            fmt_f64(self.total_mass_std_error),
            fmt_f64(self.total_mass_z),
            fmt_bool(self.total_mass_ok).into(),
        ]);
        t
    }

    pub fn per_y_table(&self) -> Table {
        let mut t = Table::new(PER_Y_HEADER);
        for p in &self.per_y {
            t.push(vec![
                p.index.to_string(),
                fmt_f64(p.alpha),
                fmt_f64(p.ln_estimate),
                fmt_f64(p.ln_estimate - self.setup.ln_v),
                fmt_f64(p.inner_rel_std_error),
                fmt_bool(p.success).into(),
            ]);
        }
        t
    }

    pub fn into_outcome(self) -> Outcome {
        let summary = format!(
            "theorem1: m={} theta={:.6} success {}/{} (Wilson 95% [{:.4}, {:.4}], target {}); total mass ratio {:.4} ± {:.4}",
            self.config.m,
            self.setup.effective_angle,
            self.successes,
            self.config.n_outer,
            self.wilson.0,
            self.wilson.1,
            1.0 - self.config.eps,
            self.total_mass_ratio,
            self.total_mass_std_error,
        );
        let artifacts = Artifacts {
            main: self.table(),
            details: vec![("per_y.csv", self.per_y_table())],
        };
        Outcome::new("theorem1", &self.config, artifacts, self.passed(), summary)
    }
}
