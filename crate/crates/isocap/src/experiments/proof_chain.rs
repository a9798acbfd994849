//! The rearrangement chain for one set, serialised.

use isocap_core::{proof_chain_check_with, LatitudeGrid, ProofChainReport, Sphere, ZonalFunction};

use crate::config::ProofChainConfig;
use crate::error::AppResult;
use crate::output::{fmt_bool, fmt_f64, Artifacts, Table};
use crate::parallel;

use super::Outcome;

pub const HEADER: &[&str] = &[
    "set",
    "m",
    "radius",
    "omega",
    "eps",
    "grid_n",
    "effective_angle",
    "v",
    "beta",
    "beta_cell",
    "tolerance",
    "pointwise_tolerance",
    "total_expected",
    "total_psi_star",
    "total_psi_bar",
    "partial_psi_star",
    "partial_psi_bar",
    "min_psi_bar_near_equator",
    "totals_ok",
    "partial_ok",
    "greater_v_ok",
];

pub const PROFILES_HEADER: &[&str] = &["profile", "cell_index", "latitude_midpoint", "value"];

#[derive(Debug, Clone)]
pub struct ProofChainRun {
    pub config: ProofChainConfig,
    pub report: ProofChainReport,
}

pub fn run(config: &ProofChainConfig) -> AppResult<ProofChainRun> {
    let sphere = Sphere::new(config.m, config.radius)?;
    let set = config.set.build(sphere)?.canonicalize();
    let grid = LatitudeGrid::new(sphere, config.grid_n)?;
    let report = proof_chain_check_with(&set, config.omega, config.eps, &grid, parallel::convolve)?;
    Ok(ProofChainRun {
        config: config.clone(),
        report,
    })
}

impl ProofChainRun {
    pub fn passed(&self) -> bool {
        self.report.all_passed()
    }

    pub fn table(&self) -> Table {
        let c = &self.config;
        let r = &self.report;
        let mut t = Table::new(HEADER);
        t.push(vec![
            c.set.to_json(),
            c.m.to_string(),
            fmt_f64(c.radius),
            fmt_f64(c.omega),
            fmt_f64(c.eps),
            c.grid_n.to_string(),
            fmt_f64(r.theta),
            fmt_f64(r.v),
            fmt_f64(r.beta),
            r.beta_cell.to_string(),
            fmt_f64(r.tolerance),
            fmt_f64(r.pointwise_tolerance),
            fmt_f64(r.total_expected),
            fmt_f64(r.total_psi_star),
            fmt_f64(r.total_psi_bar),
            fmt_f64(r.partial_psi_star),
            fmt_f64(r.partial_psi_bar),
            fmt_f64(r.min_psi_bar_near_equator),
            fmt_bool(r.totals_ok).into(),
            fmt_bool(r.partial_ok).into(),
            fmt_bool(r.greater_v_ok).into(),
        ]);
        t
    }

    pub fn profiles_table(&self) -> Table {
        let mut t = Table::new(PROFILES_HEADER);
        let r = &self.report;
        let profiles: [(&str, &ZonalFunction); 3] =
            [("psi", &r.psi), ("psi_star", &r.psi_star), ("psi_bar", &r.psi_bar)];
        for (name, f) in profiles {
            for (i, (&mid, &v)) in f.grid().midpoints().iter().zip(f.values()).enumerate() {
                t.push(vec![name.into(), i.to_string(), fmt_f64(mid), fmt_f64(v)]);
            }
        }
        t
    }

    pub fn into_outcome(self) -> Outcome {
        let r = &self.report;
        let summary = format!(
            "proof-chain: m={} N={} theta={:.6}: totals {} | partial on [0, beta={:.4}] {} | psi-bar >= V near equator {}",
            self.config.m,
            self.config.grid_n,
            r.theta,
            ok(r.totals_ok),
            r.beta,
            ok(r.partial_ok),
            ok(r.greater_v_ok),
        );
        let artifacts = Artifacts {
            main: self.table(),
            details: vec![("profiles.csv", self.profiles_table())],
        };
        Outcome::new("proof-chain", &self.config, artifacts, self.passed(), summary)
    }
}

fn ok(b: bool) -> &'static str {
    if b {
        "ok"
    } else {
        "FAILED"
    }
}
