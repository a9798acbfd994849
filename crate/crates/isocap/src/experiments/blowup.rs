//! Blow-up of a set by `pi/2 - theta + eps`, where `theta` is its effective
//! angle.

use std::f64::consts::FRAC_PI_2;

use isocap_core::{RandomStream, Sphere};

use crate::config::BlowupConfig;
use crate::descriptor::SetDescriptor;
use crate::error::AppResult;
use crate::output::{fmt_bool, fmt_f64, Artifacts, Table};

use super::{measure_of, Outcome};

pub const HEADER: &[&str] = &[
    "set",
    "m",
    "radius",
    "eps",
    "measure_exact",
    "ln_set_fraction",
    "effective_angle",
    "t",
    "neighbourhood_probability",
    "target",
    "meets_target",
];

#[derive(Debug, Clone, PartialEq)]
pub struct BlowupRow {
    pub set: SetDescriptor,
    /// Both the set and its neighbourhood measured exactly.
    pub measure_exact: bool,
    pub ln_set_fraction: f64,
    pub effective_angle: f64,
    /// `max(pi/2 - theta + eps, 0)`.
    pub t: f64,
    pub neighbourhood_probability: f64,
    pub meets_target: bool,
}

#[derive(Debug, Clone)]
pub struct BlowupReport {
    pub config: BlowupConfig,
    pub rows: Vec<BlowupRow>,
}

pub fn blow_up(sphere: Sphere, set: &SetDescriptor, eps: f64, samples: u64, seed: u64) -> AppResult<BlowupRow> {
    // Complements of caps and bands become caps and unions of caps here.
    let a = set.build(sphere)?.canonicalize();
    let (ln_p, theta, exact_a) = measure_of(&a, samples, seed)?;
    if !(theta > 0.0) {
        return Err(crate::error::AppError::Config(format!(
            "set {} has measure zero",
            set.to_json()
        )));
    }
    // For theta > pi/2 + eps the radius would be negative; the set itself is
    // then already the blow-up.
    let t = (FRAC_PI_2 - theta + eps).max(0.0);
    let grown = a.neighborhood(t)?;
    let mut stream = RandomStream::new(seed, u64::MAX - 1);
    let p = grown.fraction_or_estimate(samples.max(1), &mut stream)?;
    Ok(BlowupRow {
        set: set.clone(),
        measure_exact: exact_a && p.is_exact(),
        ln_set_fraction: ln_p,
        effective_angle: theta,
        t,
        neighbourhood_probability: p.value(),
        meets_target: p.value() >= 1.0 - eps,
    })
}

pub fn run(config: &BlowupConfig) -> AppResult<BlowupReport> {
    let sphere = Sphere::new(config.m, config.radius)?;
    let rows = config
        .sets
        .iter()
        .map(|s| blow_up(sphere, s, config.eps, config.samples, config.seed))
        .collect::<AppResult<_>>()?;
    Ok(BlowupReport {
        config: config.clone(),
        rows,
    })
}

impl BlowupReport {
    pub fn passed(&self) -> bool {
        self.rows.iter().all(|r| r.meets_target)
    }

    pub fn table(&self) -> Table {
        let mut t = Table::new(HEADER);
        for r in &self.rows {
            t.push(vec![
                r.set.to_json(),
                self.config.m.to_string(),
                fmt_f64(self.config.radius),
                fmt_f64(self.config.eps),
                fmt_bool(r.measure_exact).into(),
                fmt_f64(r.ln_set_fraction),
                fmt_f64(r.effective_angle),
                fmt_f64(r.t),
                fmt_f64(r.neighbourhood_probability),
                fmt_f64(1.0 - self.config.eps),
                fmt_bool(r.meets_target).into(),
            ]);
        }
        t
    }

    pub fn into_outcome(self) -> Outcome {
        let met = self.rows.iter().filter(|r| r.meets_target).count();
        let summary = format!(
            "blowup: m={} eps={}: {met}/{} set(s) reach probability 1-eps",
            self.config.m,
            self.config.eps,
            self.rows.len()
        );
        let artifacts = Artifacts {
            main: self.table(),
            details: Vec::new(),
        };
        Outcome::new("blowup", &self.config, artifacts, self.passed(), summary)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use isocap_core::cap_fraction;

    fn d(text: &str) -> SetDescriptor {
        SetDescriptor::parse(text).unwrap()
    }

    #[test]
    fn cap_reduces_to_the_hemisphere_plus_eps() {
        let s = Sphere::unit(128).unwrap();
        let row = blow_up(s, &d(r#"{"shape":"cap","pole_axis":0,"theta":1.2}"#), 0.1, 10, 0).unwrap();
        let want = cap_fraction(&s, FRAC_PI_2 + 0.1).unwrap();
        assert!((row.neighbourhood_probability - want).abs() < 1e-12);
        assert!(row.measure_exact);
    }

    #[test]
    fn complement_of_cap_matches_the_cap() {
        let s = Sphere::unit(64).unwrap();
        let plain = blow_up(
            s,
            &d(r#"{"shape":"cap","pole_axis":0,"negative":true,"theta":0.9}"#),
            0.1,
            10,
            0,
        )
        .unwrap();
        let comp = blow_up(
            s,
            &d(r#"{"complement":{"shape":"cap","pole_axis":0,"theta":2.2415926535897931}}"#),
            0.1,
            10,
            0,
        )
        .unwrap();
        assert!((plain.neighbourhood_probability - comp.neighbourhood_probability).abs() < 1e-9);
    }

    #[test]
    fn antipodal_union_reaches_the_target() {
        let s = Sphere::unit(128).unwrap();
        let text =
            r#"[{"shape":"cap","pole_axis":0,"theta":0.6},{"shape":"cap","pole_axis":0,"negative":true,"theta":0.6}]"#;
        let row = blow_up(s, &d(text), 0.1, 10, 0).unwrap();
        assert!(row.meets_target, "{}", row.neighbourhood_probability);
    }

    #[test]
    fn thin_band_at_high_dimension_misses_the_target() {
        // theta_eff sits near theta2, so the neighbourhood is the band
        // [theta1 - t, theta2 + t] with t = pi/2 - theta_eff + eps.
        let s = Sphere::unit(128).unwrap();
        let row = blow_up(
            s,
            &d(r#"{"shape":"band","pole_axis":0,"theta1":1.0,"theta2":1.4}"#),
            0.1,
            10,
            0,
        )
        .unwrap();
        let t = FRAC_PI_2 - row.effective_angle + 0.1;
        let f = |a: f64| s.tails(a).lower.exp();
        let expected = f(1.4 + t) - f(1.0 - t);
        assert!((row.neighbourhood_probability - expected).abs() < 1e-12);
        assert!((expected - f(FRAC_PI_2 + 0.1)).abs() < 1e-3);
        assert!(!row.meets_target);
    }

    #[test]
    fn complement_of_a_union_is_unsupported() {
        let s = Sphere::unit(8).unwrap();
        let text =
            r#"{"complement":[{"shape":"cap","pole_axis":0,"theta":0.6},{"shape":"cap","pole_axis":1,"theta":0.6}]}"#;
        assert!(blow_up(s, &d(text), 0.1, 10, 0).is_err());
    }
}
