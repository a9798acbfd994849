//! Zonal functions on an equal-measure latitude grid: rearrangement, zonal
//! convolution with monotone kernels of the inner product, the Riesz
//! functional, and the objects of the intersection argument (`psi`, `psi*`,
//! `psi-bar`, `beta`).
//!
//! Every cell of a [`LatitudeGrid`] carries the same surface measure
//! `mu(S)/N`, so the symmetric decreasing rearrangement of a zonal function
//! is a descending sort of its cell values.

use alloc::sync::Arc;
use alloc::vec::Vec;
use core::f64::consts::{FRAC_PI_2, PI};

use libm::{cos, exp, log, sin};

use crate::geometry::{ln_slice_cover, theorem1_v};
use crate::numeric::pairwise_sum_by;
use crate::quad::GaussRule;
use crate::sets::SphereSet;
use crate::specfun::{cap_angle, LogMeasure, Sphere};
use crate::{Error, Result};

/// Latitude cells `[phi_k, phi_{k+1}]` of equal surface measure.
#[derive(Debug, Clone, PartialEq)]
pub struct LatitudeGrid {
    sphere: Sphere,
    boundaries: Vec<f64>,
    midpoints: Vec<f64>,
    ln_cell: f64,
}

impl LatitudeGrid {
    /// Boundaries at cap probabilities `k/N`, midpoints at `(k + 1/2)/N`
    /// (the measure median of each cell).
    pub fn new(sphere: Sphere, n: usize) -> Result<Arc<Self>> {
        if n == 0 {
            return Err(Error::InvalidGrid("at least one cell is required"));
        }
        let nf = n as f64;
        let mut boundaries = Vec::with_capacity(n + 1);
        boundaries.push(0.0);
        for k in 1..n {
            boundaries.push(cap_angle(&sphere, k as f64 / nf)?);
        }
        boundaries.push(PI);
        if boundaries.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidGrid("too many cells to resolve in double precision"));
        }
        let midpoints = (0..n)
            .map(|k| cap_angle(&sphere, (k as f64 + 0.5) / nf))
            .collect::<Result<Vec<_>>>()?;
        Ok(Arc::new(LatitudeGrid {
            sphere,
            boundaries,
            midpoints,
            ln_cell: sphere.log_area().ln() - log(nf),
        }))
    }

    pub fn sphere(&self) -> &Sphere {
        &self.sphere
    }

    pub fn len(&self) -> usize {
        self.midpoints.len()
    }

    pub fn is_empty(&self) -> bool {
        self.midpoints.is_empty()
    }

    pub fn boundaries(&self) -> &[f64] {
        &self.boundaries
    }

    pub fn midpoints(&self) -> &[f64] {
        &self.midpoints
    }

    /// `mu(S)/N`.
    pub fn cell_measure(&self) -> f64 {
        exp(self.ln_cell)
    }

    pub fn ln_cell_measure(&self) -> f64 {
        self.ln_cell
    }

    /// Index of the cell containing latitude `phi`.
    pub fn cell_of(&self, phi: f64) -> usize {
        let k = self.boundaries.partition_point(|&b| b <= phi);
        k.saturating_sub(1).min(self.len() - 1)
    }
}

/// A function of the latitude only, one value per grid cell.
#[derive(Debug, Clone, PartialEq)]
pub struct ZonalFunction {
    grid: Arc<LatitudeGrid>,
    values: Vec<f64>,
}

impl ZonalFunction {
    pub fn new(grid: Arc<LatitudeGrid>, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::InvalidZonal("value count differs from the cell count"));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidZonal("values must be finite"));
        }
        Ok(ZonalFunction { grid, values })
    }

    pub fn constant(grid: Arc<LatitudeGrid>, c: f64) -> Result<Self> {
        let n = grid.len();
        ZonalFunction::new(grid, alloc::vec![c; n])
    }

    /// Samples `f` at the cell midpoints.
    pub fn from_fn<F: Fn(f64) -> f64>(grid: Arc<LatitudeGrid>, f: F) -> Result<Self> {
        let values = grid.midpoints().iter().map(|&p| f(p)).collect();
        ZonalFunction::new(grid, values)
    }

    pub fn grid(&self) -> &Arc<LatitudeGrid> {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    /// `int f dmu`.
    pub fn integral(&self) -> f64 {
        pairwise_sum_by(0, self.values.len(), &|i| self.values[i]) * self.grid.cell_measure()
    }

    /// `int f dmu` over the cells lying in `[0, phi_k]`.
    pub fn integral_below(&self, k: usize) -> f64 {
        pairwise_sum_by(0, k.min(self.values.len()), &|i| self.values[i]) * self.grid.cell_measure()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn is_nonincreasing(&self) -> bool {
        self.values.windows(2).all(|w| w[1] <= w[0])
    }

    fn same_grid(&self, other: &ZonalFunction) -> Result<()> {
        if Arc::ptr_eq(&self.grid, &other.grid) || self.grid == other.grid {
            Ok(())
        } else {
            Err(Error::GridMismatch)
        }
    }
}

/// Symmetric decreasing rearrangement: cell values sorted nonincreasing from
/// the pole.
pub fn rearrange(f: &ZonalFunction) -> ZonalFunction {
    let mut values = f.values.clone();
    values.sort_by(|a, b| b.total_cmp(a));
    ZonalFunction {
        grid: f.grid.clone(),
        values,
    }
}

/// `mu({f > d})`.
pub fn super_level_measure(f: &ZonalFunction, d: f64) -> LogMeasure {
    let count = f.values.iter().filter(|&&v| v > d).count();
    if count == 0 {
        LogMeasure::ZERO
    } else {
        LogMeasure::from_ln(log(count as f64) + f.grid.ln_cell)
    }
}

/// Smallest cell boundary at which the nonincreasing `psi_star` has dropped
/// to `d` or below; `pi` if it never does.
pub fn beta_threshold(psi_star: &ZonalFunction, d: f64) -> Result<f64> {
    beta_cell(psi_star, d).map(|k| psi_star.grid.boundaries[k])
}

fn beta_cell(psi_star: &ZonalFunction, d: f64) -> Result<usize> {
    if !psi_star.is_nonincreasing() {
        return Err(Error::NotMonotone);
    }
    Ok(psi_star
        .values
        .iter()
        .position(|&v| v <= d)
        .unwrap_or(psi_star.values.len()))
}

/// `int_0^inf mu_w({f > t}) dt` for nonnegative `f`, where `mu_w` is the
/// grid measure weighted by `c`, evaluated by sorting the values of `f`.
pub fn layer_cake_integral(f: &ZonalFunction, c: &ZonalFunction) -> Result<f64> {
    f.same_grid(c)?;
    if f.values.iter().any(|&v| v < 0.0) {
        return Err(Error::InvalidZonal("layer-cake integral needs a nonnegative function"));
    }
    let mut order: Vec<usize> = (0..f.values.len()).collect();
    order.sort_by(|&a, &b| f.values[b].total_cmp(&f.values[a]));
    // Walking down the levels, {f > t} for t in [v_(k+1), v_k) is the first
    // k+1 cells in the sorted order.
    let mut total = 0.0;
    let mut weight = 0.0;
    for (pos, &i) in order.iter().enumerate() {
        weight += c.values[i];
        let next = order.get(pos + 1).map_or(0.0, |&j| f.values[j]);
        total += (f.values[i] - next) * weight;
    }
    Ok(total * f.grid.cell_measure())
}

/// Nondecreasing bounded kernel `K(u)` of the inner product `u in [-1, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub enum MonotoneKernel {
    /// `K(u) = 1` for `u >= cos_threshold`, else 0.
    Indicator { cos_threshold: f64 },
    /// `K(u) = values[j]` where `j` counts the breakpoints `<= u`.
    Step { breakpoints: Vec<f64>, values: Vec<f64> },
    /// Linear interpolation between knots, constant outside them.
    PiecewiseLinear { knots: Vec<f64>, values: Vec<f64> },
}

impl MonotoneKernel {
    /// Indicator of `angle <= omega`, i.e. of `u >= cos omega`.
    pub fn indicator_angle(omega: f64) -> Result<Self> {
        if !(0.0..=PI).contains(&omega) {
            return Err(Error::Domain {
                what: "kernel angle",
                value: omega,
            });
        }
        Ok(MonotoneKernel::Indicator {
            cos_threshold: cos(omega),
        })
    }

    pub fn constant(c: f64) -> Result<Self> {
        MonotoneKernel::step(Vec::new(), alloc::vec![c])
    }

    pub fn step(breakpoints: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if values.len() != breakpoints.len() + 1 {
            return Err(Error::InvalidKernel(
                "a step kernel needs one more value than breakpoints",
            ));
        }
        check_table(&breakpoints, &values)?;
        Ok(MonotoneKernel::Step { breakpoints, values })
    }

    pub fn piecewise_linear(knots: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if knots.is_empty() || knots.len() != values.len() {
            return Err(Error::InvalidKernel(
                "knots and values must be nonempty and of equal length",
            ));
        }
        check_table(&knots, &values)?;
        Ok(MonotoneKernel::PiecewiseLinear { knots, values })
    }

    pub fn eval(&self, u: f64) -> f64 {
        match self {
            MonotoneKernel::Indicator { cos_threshold } => {
                if u >= *cos_threshold {
                    1.0
                } else {
                    0.0
                }
            }
            MonotoneKernel::Step { breakpoints, values } => values[breakpoints.partition_point(|&b| b <= u)],
            MonotoneKernel::PiecewiseLinear { knots, values } => {
                let j = knots.partition_point(|&k| k <= u);
                if j == 0 {
                    values[0]
                } else if j == knots.len() {
                    values[j - 1]
                } else {
                    let t = (u - knots[j - 1]) / (knots[j] - knots[j - 1]);
                    values[j - 1] + t * (values[j] - values[j - 1])
                }
            }
        }
    }
}

fn check_table(points: &[f64], values: &[f64]) -> Result<()> {
    if values.iter().any(|v| !v.is_finite()) || points.iter().any(|p| !p.is_finite()) {
        return Err(Error::InvalidKernel("entries must be finite"));
    }
    if points.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidKernel("breakpoints must be strictly increasing"));
    }
    if values.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::InvalidKernel("kernel must be nondecreasing"));
    }
    Ok(())
}

const AZIMUTH_NODES: usize = 128;

enum Azimuth {
    /// Two equal atoms at `cos psi = +-1` (circles).
    Atoms,
    /// Gauss rule in `t = cos psi` for the weight `(1 - t^2)^((m-4)/2)`.
    Rule(GaussRule),
}

/// Evaluates `E_psi K(cos a cos phi + sin a sin phi cos psi)` for one kernel
/// on one sphere. Indicator and step kernels are exact; piecewise-linear
/// kernels use a fixed Gauss rule over the azimuth.
pub struct KernelProjector {
    kernel: MonotoneKernel,
    slice: Option<Sphere>,
    azimuth: Option<Azimuth>,
}

impl KernelProjector {
    pub fn new(kernel: MonotoneKernel, dim: usize) -> Result<Self> {
        if dim < 2 {
            return Err(Error::InvalidDimension(dim));
        }
        let slice = Sphere::unit(dim).ok().and_then(|s| s.slice_sphere());
        let azimuth = match kernel {
            MonotoneKernel::PiecewiseLinear { .. } => Some(if dim == 2 {
                Azimuth::Atoms
            } else {
                Azimuth::Rule(GaussRule::jacobi_symmetric(AZIMUTH_NODES, (dim as f64 - 4.0) / 2.0))
            }),
            _ => None,
        };
        Ok(KernelProjector { kernel, slice, azimuth })
    }

    pub fn kernel(&self) -> &MonotoneKernel {
        &self.kernel
    }

    /// Azimuthal probability that the inner product is at least `c`.
    fn upper_prob(&self, c: f64, alpha: f64, phi: f64) -> f64 {
        exp(ln_slice_cover(self.slice.as_ref(), c, phi, alpha))
    }

    pub fn eval(&self, alpha: f64, phi: f64) -> f64 {
        match &self.kernel {
            MonotoneKernel::Indicator { cos_threshold } => self.upper_prob(*cos_threshold, alpha, phi),
            MonotoneKernel::Step { breakpoints, values } => {
                let mut acc = values[0];
                for (j, &b) in breakpoints.iter().enumerate() {
                    let jump = values[j + 1] - values[j];
                    if jump != 0.0 {
                        acc += jump * self.upper_prob(b, alpha, phi);
                    }
                }
                acc
            }
            MonotoneKernel::PiecewiseLinear { .. } => {
                let (ca, sa, cp, sp) = (cos(alpha), sin(alpha), cos(phi), sin(phi));
                match self.azimuth.as_ref().expect("rule built for table kernels") {
                    Azimuth::Atoms => 0.5 * (self.kernel.eval(ca * cp + sa * sp) + self.kernel.eval(ca * cp - sa * sp)),
                    Azimuth::Rule(rule) => rule
                        .nodes
                        .iter()
                        .zip(&rule.weights)
                        .map(|(t, w)| w * self.kernel.eval(ca * cp + sa * sp * t))
                        .sum(),
                }
            }
        }
    }
}

/// Azimuthal average of `K` for `z` at latitude `phi` and `y` at latitude
/// `alpha` on the sphere of dimension `dim`.
pub fn projected_kernel(kernel: &MonotoneKernel, alpha: f64, phi: f64, dim: usize) -> Result<f64> {
    Ok(KernelProjector::new(kernel.clone(), dim)?.eval(alpha, phi))
}

/// `psi(y) = int f(z) K(<z, y>) dz` for zonal `f`, tabulated per grid cell.
pub struct ZonalConvolver {
    projector: KernelProjector,
    grid: Arc<LatitudeGrid>,
}

impl ZonalConvolver {
    pub fn new(kernel: MonotoneKernel, grid: Arc<LatitudeGrid>) -> Result<Self> {
        Ok(ZonalConvolver {
            projector: KernelProjector::new(kernel, grid.sphere().dim())?,
            grid,
        })
    }

    pub fn grid(&self) -> &Arc<LatitudeGrid> {
        &self.grid
    }

    fn check(&self, f: &ZonalFunction) -> Result<()> {
        if Arc::ptr_eq(&self.grid, &f.grid) || *self.grid == *f.grid {
            Ok(())
        } else {
            Err(Error::GridMismatch)
        }
    }

    /// `psi` at latitude `alpha`. Terms with `f = 0` are skipped without
    /// changing the summation tree.
    pub fn at(&self, f: &ZonalFunction, alpha: f64) -> Result<f64> {
        self.check(f)?;
        Ok(self.at_unchecked(f, alpha))
    }

    fn at_unchecked(&self, f: &ZonalFunction, alpha: f64) -> f64 {
        let mid = &self.grid.midpoints;
        let term = |i: usize| {
            let fi = f.values[i];
            if fi == 0.0 {
                0.0
            } else {
                fi * self.projector.eval(alpha, mid[i])
            }
        };
        pairwise_sum_by(0, mid.len(), &term) * self.grid.cell_measure()
    }

    /// `psi` at the midpoint of cell `j`.
    pub fn cell(&self, f: &ZonalFunction, j: usize) -> Result<f64> {
        self.check(f)?;
        Ok(self.at_unchecked(f, self.grid.midpoints[j]))
    }

    pub fn convolve(&self, f: &ZonalFunction) -> Result<ZonalFunction> {
        self.check(f)?;
        let values = self.grid.midpoints.iter().map(|&a| self.at_unchecked(f, a)).collect();
        ZonalFunction::new(self.grid.clone(), values)
    }
}

pub fn zonal_convolve(f: &ZonalFunction, kernel: &MonotoneKernel) -> Result<ZonalFunction> {
    ZonalConvolver::new(kernel.clone(), f.grid.clone())?.convolve(f)
}

pub fn zonal_convolve_at(f: &ZonalFunction, kernel: &MonotoneKernel, alpha: f64) -> Result<f64> {
    ZonalConvolver::new(kernel.clone(), f.grid.clone())?.at(f, alpha)
}

/// `int int f(z) K(<z, y>) g(y) dz dy`.
pub fn riesz_functional(f: &ZonalFunction, g: &ZonalFunction, kernel: &MonotoneKernel) -> Result<f64> {
    f.same_grid(g)?;
    let psi = zonal_convolve(f, kernel)?;
    Ok(pairing(&psi, g))
}

/// `int psi g dmu`.
pub fn pairing(psi: &ZonalFunction, g: &ZonalFunction) -> f64 {
    pairwise_sum_by(0, psi.values.len(), &|i| psi.values[i] * g.values[i]) * psi.grid.cell_measure()
}

/// Outcome of the three numerical checks of the intersection argument.
#[derive(Debug, Clone, PartialEq)]
pub struct ProofChainReport {
    /// Effective angle of the set.
    pub theta: f64,
    pub omega: f64,
    pub eps: f64,
    /// Orthogonal-pole intersection volume for `(theta, omega)`.
    pub v: f64,
    pub beta: f64,
    pub beta_cell: usize,
    /// Discretisation slack for the integral checks, `2 max|psi| mu(S) / N`.
    pub tolerance: f64,
    /// Discretisation slack for the pointwise check, `2 sup|1_A| mu(S) / N`.
    pub pointwise_tolerance: f64,
    /// `mu(Cap(omega + eps)) mu(A)`, which both totals approximate.
    pub total_expected: f64,
    pub total_psi_star: f64,
    pub total_psi_bar: f64,
    pub partial_psi_star: f64,
    pub partial_psi_bar: f64,
    /// Smallest `psi-bar` over cells with midpoint in `[pi/2 - eps, pi/2 + eps]`.
    pub min_psi_bar_near_equator: f64,
    pub totals_ok: bool,
    pub partial_ok: bool,
    pub greater_v_ok: bool,
    pub psi: ZonalFunction,
    pub psi_star: ZonalFunction,
    pub psi_bar: ZonalFunction,
}

impl ProofChainReport {
    pub fn all_passed(&self) -> bool {
        self.totals_ok && self.partial_ok && self.greater_v_ok
    }
}

/// Runs the intersection-argument checks for an axis-aligned set on a grid of
/// `n` cells.
pub fn proof_chain_check(set: &SphereSet, omega: f64, eps: f64, n: usize) -> Result<ProofChainReport> {
    let grid = LatitudeGrid::new(*set.sphere(), n)?;
    proof_chain_check_with(set, omega, eps, &grid, |c, f| c.convolve(f))
}

/// As [`proof_chain_check`], with a caller-supplied grid and convolution
/// (for example a parallel one).
pub fn proof_chain_check_with<C>(
    set: &SphereSet,
    omega: f64,
    eps: f64,
    grid: &Arc<LatitudeGrid>,
    convolve: C,
) -> Result<ProofChainReport>
where
    C: Fn(&ZonalConvolver, &ZonalFunction) -> Result<ZonalFunction>,
{
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::Domain {
            what: "epsilon",
            value: eps,
        });
    }
    if !(omega > 0.0 && omega + eps <= PI) {
        return Err(Error::Domain {
            what: "kernel angle omega",
            value: omega,
        });
    }
    let sphere = *set.sphere();
    let f = set.zonal_profile(grid)?;
    let theta = set.effective_angle()?;
    let v = theorem1_v(&sphere, theta, omega)?.value();

    let convolver = ZonalConvolver::new(MonotoneKernel::indicator_angle(omega + eps)?, grid.clone())?;
    let psi = convolve(&convolver, &f)?;
    let psi_star = rearrange(&psi);
    let f_star = rearrange(&f);
    let psi_bar = convolve(&convolver, &f_star)?;

    let beta_cell = beta_cell(&psi_star, (1.0 - eps) * v)?;
    let beta = grid.boundaries[beta_cell];

    let area = sphere.log_area().value();
    let nf = grid.len() as f64;
    let tolerance = 2.0 * psi.max_abs().max(psi_bar.max_abs()) * area / nf;
    // sup of the indicator itself: a set thinner than a cell has an all-zero profile.
    let sup_f = if set.measure()?.is_zero() { 0.0 } else { 1.0 };
    let pointwise_tolerance = 2.0 * sup_f * area / nf;

    let total_psi_star = psi_star.integral();
    let total_psi_bar = psi_bar.integral();
    let total_expected = exp(area.ln() + sphere.tails(omega + eps).lower + set.measure()?.ln());

    let partial_psi_star = psi_star.integral_below(beta_cell);
    let partial_psi_bar = psi_bar.integral_below(beta_cell);

    let min_psi_bar_near_equator = grid
        .midpoints
        .iter()
        .zip(&psi_bar.values)
        .filter(|(&a, _)| (a - FRAC_PI_2).abs() <= eps)
        .map(|(_, &p)| p)
        .fold(f64::INFINITY, f64::min);

    Ok(ProofChainReport {
        theta,
        omega,
        eps,
        v,
        beta,
        beta_cell,
        tolerance,
        pointwise_tolerance,
        total_expected,
        total_psi_star,
        total_psi_bar,
        partial_psi_star,
        partial_psi_bar,
        min_psi_bar_near_equator,
        totals_ok: (total_psi_star - total_psi_bar).abs() <= tolerance,
        partial_ok: partial_psi_star <= partial_psi_bar + tolerance,
        greater_v_ok: min_psi_bar_near_equator >= v - pointwise_tolerance,
        psi,
        psi_star,
        psi_bar,
    })
}
