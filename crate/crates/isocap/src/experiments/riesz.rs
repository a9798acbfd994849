//! Randomised check of the Riesz-type rearrangement inequality
//! `∬ f K g <= ∬ f* K g*` for zonal `f`, `g` and nondecreasing kernels `K`.
//!
//! The discrete functional evaluates the kernel at cell midpoints, so the
//! inequality is checked up to the grid tolerance
//! `2 max|f| max|g| sup|K| mu(S)^2 / N`: one cell of boundary error in the
//! double integral.

use std::f64::consts::PI;
use std::sync::Arc;

use isocap_core::{rearrange, riesz_functional, LatitudeGrid, MonotoneKernel, RandomStream, Sphere, ZonalFunction};
use rayon::prelude::*;

use crate::config::RieszConfig;
use crate::error::AppResult;
use crate::output::{fmt_bool, fmt_f64, Artifacts, Table};

use super::Outcome;

pub const HEADER: &[&str] = &[
    "m",
    "radius",
    "grid_n",
    "seed",
    "trials",
    "violations",
    "max_margin",
    "tolerance",
    "equality_cases_ok",
];

pub const TRIALS_HEADER: &[&str] = &[
    "trial", "case", "f_kind", "g_kind", "kernel", "lhs", "rhs", "margin", "ok",
];

/// Relative tolerance for the equality cases.
pub const EQUALITY_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct RieszTrial {
    pub trial: u64,
    /// `random`, or one of the equality cases `constant_kernel`,
    /// `symmetric_decreasing`, `zero_function`.
    pub case: &'static str,
    pub f_kind: &'static str,
    pub g_kind: &'static str,
    pub kernel: String,
    pub lhs: f64,
    pub rhs: f64,
    pub ok: bool,
}

impl RieszTrial {
    /// `lhs - rhs`; positive values are violations before tolerance.
    pub fn margin(&self) -> f64 {
        self.lhs - self.rhs
    }
}

#[derive(Debug, Clone)]
pub struct RieszReport {
    pub config: RieszConfig,
    pub tolerance: f64,
    pub trials: Vec<RieszTrial>,
}

fn random_function(grid: &Arc<LatitudeGrid>, stream: &mut RandomStream) -> AppResult<(ZonalFunction, &'static str)> {
    let n = grid.len();
    if stream.next_open01() < 0.5 {
        let density = stream.next_open01();
        let values = (0..n)
            .map(|_| if stream.next_open01() < density { 1.0 } else { 0.0 })
            .collect();
        Ok((ZonalFunction::new(grid.clone(), values)?, "indicator"))
    } else {
        // Piecewise constant on a few random runs of cells, values in [0, 1).
        let pieces = 1 + (stream.next_u64() % 8) as usize;
        let mut cuts: Vec<usize> = (0..pieces - 1)
            .map(|_| (stream.next_u64() % n as u64) as usize)
            .collect();
        cuts.sort_unstable();
        let levels: Vec<f64> = (0..pieces).map(|_| stream.next_open01()).collect();
        let values = (0..n)
            .map(|i| levels[cuts.iter().filter(|&&c| c <= i).count()])
            .collect();
        Ok((ZonalFunction::new(grid.clone(), values)?, "step"))
    }
}

fn random_kernel(stream: &mut RandomStream) -> AppResult<(MonotoneKernel, String)> {
    if stream.next_open01() < 0.5 {
        let omega = PI * stream.next_open01();
        Ok((
            MonotoneKernel::indicator_angle(omega)?,
            format!("indicator({})", fmt_f64(omega)),
        ))
    } else {
        let k = 1 + (stream.next_u64() % 4) as usize;
        let mut breaks: Vec<f64> = (0..k).map(|_| 2.0 * stream.next_open01() - 1.0).collect();
        breaks.sort_by(f64::total_cmp);
        breaks.dedup();
        let mut values: Vec<f64> = (0..=breaks.len()).map(|_| stream.next_open01()).collect();
        values.sort_by(f64::total_cmp);
        Ok((MonotoneKernel::step(breaks, values)?, format!("step({k})")))
    }
}

fn sup_kernel(k: &MonotoneKernel) -> f64 {
    // Nondecreasing in u, so the extremes sit at u = -1 and u = 1.
    k.eval(1.0).abs().max(k.eval(-1.0).abs())
}

fn random_trial(grid: &Arc<LatitudeGrid>, seed: u64, trial: u64, area: f64) -> AppResult<RieszTrial> {
    let mut stream = RandomStream::new(seed, trial);
    let (f, f_kind) = random_function(grid, &mut stream)?;
    let (g, g_kind) = random_function(grid, &mut stream)?;
    let (k, kernel) = random_kernel(&mut stream)?;
    let lhs = riesz_functional(&f, &g, &k)?;
    let rhs = riesz_functional(&rearrange(&f), &rearrange(&g), &k)?;
    let tol = 2.0 * f.max_abs() * g.max_abs() * sup_kernel(&k) * area * area / grid.len() as f64;
    Ok(RieszTrial {
        trial,
        case: "random",
        f_kind,
        g_kind,
        kernel,
        lhs,
        rhs,
        ok: lhs <= rhs + tol,
    })
}

fn equality_trials(grid: &Arc<LatitudeGrid>, seed: u64, first: u64) -> AppResult<Vec<RieszTrial>> {
    let mut stream = RandomStream::new(seed, first);
    let (f, f_kind) = random_function(grid, &mut stream)?;
    let (g, g_kind) = random_function(grid, &mut stream)?;
    let (k, kernel) = random_kernel(&mut stream)?;
    let constant = MonotoneKernel::constant(1.0)?;
    let zero = ZonalFunction::constant(grid.clone(), 0.0)?;
    let (fs, gs) = (rearrange(&f), rearrange(&g));
    let cases: [(&'static str, &ZonalFunction, &ZonalFunction, &MonotoneKernel, String); 3] = [
        ("constant_kernel", &f, &g, &constant, "constant(1)".into()),
        ("symmetric_decreasing", &fs, &gs, &k, kernel.clone()),
        ("zero_function", &zero, &g, &k, kernel),
    ];
    cases
        .into_iter()
        .enumerate()
        .map(|(i, (case, a, b, kern, name))| {
            let lhs = riesz_functional(a, b, kern)?;
            let rhs = riesz_functional(&rearrange(a), &rearrange(b), kern)?;
            Ok(RieszTrial {
                trial: first + i as u64,
                case,
                f_kind: if case == "zero_function" { "zero" } else { f_kind },
                g_kind,
                kernel: name,
                lhs,
                rhs,
                ok: (lhs - rhs).abs() <= EQUALITY_TOL * rhs.abs().max(1.0),
            })
        })
        .collect()
}

pub fn run(config: &RieszConfig) -> AppResult<RieszReport> {
    let sphere = Sphere::new(config.m, config.radius)?;
    let grid = LatitudeGrid::new(sphere, config.grid_n)?;
    let area = sphere.log_area().value();
    let mut trials = (0..config.trials)
        .into_par_iter()
        .map(|t| random_trial(&grid, config.seed, t, area))
        .collect::<AppResult<Vec<_>>>()?;
    trials.extend(equality_trials(&grid, config.seed, config.trials)?);
    Ok(RieszReport {
        config: config.clone(),
        // For indicator functions and kernels bounded by 1.
        tolerance: 2.0 * area * area / config.grid_n as f64,
        trials,
    })
}

impl RieszReport {
    pub fn random_trials(&self) -> impl Iterator<Item = &RieszTrial> {
        self.trials.iter().filter(|t| t.case == "random")
    }

    pub fn violations(&self) -> usize {
        self.random_trials().filter(|t| !t.ok).count()
    }

    pub fn max_margin(&self) -> f64 {
        self.random_trials()
            .map(RieszTrial::margin)
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn equality_cases_ok(&self) -> bool {
        self.trials.iter().filter(|t| t.case != "random").all(|t| t.ok)
    }

    pub fn passed(&self) -> bool {
        self.violations() == 0 && self.equality_cases_ok()
    }

    pub fn table(&self) -> Table {
        let c = &self.config;
        let mut t = Table::new(HEADER);
        t.push(vec![
            c.m.to_string(),
            fmt_f64(c.radius),
            c.grid_n.to_string(),
            c.seed.to_string(),
            c.trials.to_string(),
            self.violations().to_string(),
            fmt_f64(self.max_margin()),
            fmt_f64(self.tolerance),
            fmt_bool(self.equality_cases_ok()).into(),
        ]);
        t
    }

    pub fn trials_table(&self) -> Table {
        let mut t = Table::new(TRIALS_HEADER);
        for r in &self.trials {
            t.push(vec![
                r.trial.to_string(),
                r.case.into(),
                r.f_kind.into(),
                r.g_kind.into(),
                r.kernel.clone(),
                fmt_f64(r.lhs),
                fmt_f64(r.rhs),
                fmt_f64(r.margin()),
                fmt_bool(r.ok).into(),
            ]);
        }
        t
    }

    pub fn into_outcome(self) -> Outcome {
        let summary = format!(
            "riesz: m={} N={}: {} violation(s) in {} trials, max lhs-rhs {:.3e}; equality cases ok: {}",
            self.config.m,
            self.config.grid_n,
            self.violations(),
            self.config.trials,
            self.max_margin(),
            self.equality_cases_ok()
        );
        let artifacts = Artifacts {
            main: self.table(),
            details: vec![("trials.csv", self.trials_table())],
        };
        Outcome::new("riesz", &self.config, artifacts, self.passed(), summary)
    }
}
