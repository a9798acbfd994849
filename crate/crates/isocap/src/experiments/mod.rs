//! Experiment runners. Each returns a typed report; [`Outcome`] turns a report
//! into CSV tables and the sidecar metadata.
//!
//! CSV columns, by experiment:
//!
//! * `concentration`: `m, radius, eps, exact_probability, target, meets_target,
//!   n_samples, estimate_mean, estimate_std_error, estimate_agrees`
//! * `blowup`: `set, m, radius, eps, measure_exact, ln_set_fraction,
//!   effective_angle, t, neighbourhood_probability, target, meets_target`
//! * `theorem1`: one summary row (see [`theorem1::HEADER`]) plus
//!   `<stem>.per_y.csv` with one row per outer sample
//! * `riesz`: one row per trial in `<stem>.trials.csv`; the main file holds
//!   the summary
//! * `proof-chain`: one summary row plus `<stem>.profiles.csv` in long form
//!   (`profile, cell_index, latitude_midpoint, value`)

pub mod blowup;
pub mod concentration;
pub mod proof_chain;
pub mod riesz;
pub mod theorem1;

use std::time::Duration;

use isocap_core::{cap_angle_from_ln, Measured, MonteCarloEstimate, RandomStream, SphereSet};
use serde::Serialize;
use serde_json::{json, Value};

use crate::output::Artifacts;

/// What an experiment run produced.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub experiment: &'static str,
    pub artifacts: Artifacts,
    /// Whether every verification property held.
    pub passed: bool,
    /// One line for the terminal.
    pub summary: String,
    pub config: Value,
}

impl Outcome {
    pub fn new<C: Serialize>(
        experiment: &'static str,
        config: &C,
        artifacts: Artifacts,
        passed: bool,
        summary: String,
    ) -> Self {
        Outcome {
            experiment,
            artifacts,
            passed,
            summary,
            config: serde_json::to_value(config).unwrap_or(Value::Null),
        }
    }

    /// Sidecar JSON: full config, versions and wall time. Kept out of the CSV
    /// so that the CSV is reproducible byte for byte.
    pub fn sidecar(&self, wall: Duration) -> Value {
        json!({
            "experiment": self.experiment,
            "config": self.config,
            "passed": self.passed,
            "wall_time_seconds": wall.as_secs_f64(),
            "versions": {
                "isocap": env!("CARGO_PKG_VERSION"),
                "csv_format": 1,
            },
        })
    }
}

/// `(ln P(A), effective angle, exact?)`. Sets without exact measure fall back
/// to a Haar estimate from `samples` draws on stream `(seed, u64::MAX)`.
pub(crate) fn measure_of(set: &SphereSet, samples: u64, seed: u64) -> isocap_core::Result<(f64, f64, bool)> {
    let mut stream = RandomStream::new(seed, u64::MAX);
    match set.fraction_or_estimate(samples.max(1), &mut stream)? {
        Measured::Exact(_) => {
            let (ln_p, _) = set.ln_fractions()?;
            Ok((ln_p, set.effective_angle()?, true))
        }
        Measured::Estimated(MonteCarloEstimate { mean, .. }) => {
            let ln_p = mean.ln();
            Ok((ln_p, cap_angle_from_ln(set.sphere(), ln_p), false))
        }
    }
}
