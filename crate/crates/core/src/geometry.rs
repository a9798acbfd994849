//! Points, poles, the geodesic metric and the exact volume of the
//! intersection of two caps.
//!
//! The intersection `Cap(z0, theta) ∩ Cap(y0, omega)` with `angle(z0, y0) =
//! alpha` is integrated slice by slice in the latitude `phi` measured from
//! `z0`. A slice is an `(m-2)`-sphere; the part of it within `omega` of `y0`
//! is itself a cap of that smaller sphere with half-angle
//!
//! ```text
//! arccos((cos omega - cos phi cos alpha) / (sin phi sin alpha))
//! ```
//!
//! clamped to the empty or the full slice. The slices with full coverage are
//! summed in closed form; only the partially covered latitudes go through
//! quadrature.

use alloc::vec::Vec;
use core::f64::consts::{FRAC_PI_2, PI};

use libm::{atan2, cos, sin, sqrt};

use crate::numeric::log_sum_exp;
use crate::quad::integrate_ln;
use crate::specfun::{ln_band_unchecked, LogMeasure, Sphere};
use crate::{Error, Result};

const POINT_NORM_TOL: f64 = 1e-9;

/// Pole of a cap or band: a signed coordinate axis or an arbitrary direction.
#[derive(Debug, Clone, PartialEq)]
pub enum Pole {
    Axis {
        index: usize,
        negative: bool,
    },
    /// Unit vector.
    Direction(Vec<f64>),
}

impl Pole {
    pub fn axis(index: usize) -> Self {
        Pole::Axis { index, negative: false }
    }

    pub fn negative_axis(index: usize) -> Self {
        Pole::Axis { index, negative: true }
    }

    /// Pole along `v`, which is normalised.
    pub fn direction(v: Vec<f64>) -> Result<Self> {
        let norm = sqrt(v.iter().map(|x| x * x).sum::<f64>());
        if !(norm > 0.0 && norm.is_finite()) {
            return Err(Error::InvalidPoint("pole direction must be nonzero and finite"));
        }
        Ok(Pole::Direction(v.into_iter().map(|x| x / norm).collect()))
    }

    pub fn negated(&self) -> Pole {
        match self {
            Pole::Axis { index, negative } => Pole::Axis {
                index: *index,
                negative: !negative,
            },
            Pole::Direction(v) => Pole::Direction(v.iter().map(|x| -x).collect()),
        }
    }

    pub(crate) fn check(&self, dim: usize) -> Result<()> {
        match self {
            Pole::Axis { index, .. } if *index >= dim => {
                Err(Error::InvalidPoint("pole axis index exceeds the dimension"))
            }
            Pole::Direction(v) if v.len() != dim => Err(Error::InvalidPoint("pole direction has the wrong length")),
            _ => Ok(()),
        }
    }

    pub fn unit_vector(&self, dim: usize) -> Vec<f64> {
        match self {
            Pole::Axis { index, negative } => {
                let mut v = alloc::vec![0.0; dim];
                v[*index] = if *negative { -1.0 } else { 1.0 };
                v
            }
            Pole::Direction(v) => v.clone(),
        }
    }

    /// Geodesic angle between the pole and the direction of `z`.
    pub fn angle_to(&self, z: &SpherePoint) -> f64 {
        let r = z.sphere.radius();
        let (mut diff, mut sum) = (0.0, 0.0);
        match self {
            Pole::Axis { index, negative } => {
                let s = if *negative { -1.0 } else { 1.0 };
                for (i, x) in z.coords.iter().enumerate() {
                    let u = x / r;
                    let p = if i == *index { s } else { 0.0 };
                    diff += (u - p) * (u - p);
                    sum += (u + p) * (u + p);
                }
            }
            Pole::Direction(p) => {
                for (x, p) in z.coords.iter().zip(p) {
                    let u = x / r;
                    diff += (u - p) * (u - p);
                    sum += (u + p) * (u + p);
                }
            }
        }
        2.0 * atan2(sqrt(diff), sqrt(sum))
    }

    /// Whether `self` and `other` lie on a common line through the origin.
    pub(crate) fn collinear_with(&self, other: &Pole, dim: usize) -> bool {
        match (self, other) {
            (Pole::Axis { index: a, .. }, Pole::Axis { index: b, .. }) => a == b,
            _ => {
                let (u, v) = (self.unit_vector(dim), other.unit_vector(dim));
                let dot: f64 = u.iter().zip(&v).map(|(a, b)| a * b).sum();
                dot.abs() >= 1.0 - 1e-12
            }
        }
    }

    /// Sign of `self` relative to `reference` when the two are collinear.
    pub(crate) fn same_sense(&self, reference: &Pole, dim: usize) -> bool {
        match (self, reference) {
            (Pole::Axis { negative: a, .. }, Pole::Axis { negative: b, .. }) => a == b,
            _ => {
                let (u, v) = (self.unit_vector(dim), reference.unit_vector(dim));
                u.iter().zip(&v).map(|(a, b)| a * b).sum::<f64>() > 0.0
            }
        }
    }

    /// Angle between two poles.
    pub fn angle_between(&self, other: &Pole, dim: usize) -> f64 {
        let (u, v) = (self.unit_vector(dim), other.unit_vector(dim));
        angle_between_units(&u, &v)
    }
}

fn angle_between_units(u: &[f64], v: &[f64]) -> f64 {
    let (mut diff, mut sum) = (0.0, 0.0);
    for (a, b) in u.iter().zip(v) {
        diff += (a - b) * (a - b);
        sum += (a + b) * (a + b);
    }
    2.0 * atan2(sqrt(diff), sqrt(sum))
}

/// A point on a particular sphere.
#[derive(Debug, Clone, PartialEq)]
pub struct SpherePoint {
    coords: Vec<f64>,
    sphere: Sphere,
}

impl SpherePoint {
    /// Checked constructor: `coords` must have length `m` and norm `R`
    /// (within 1e-9 relative).
    pub fn new(sphere: Sphere, coords: Vec<f64>) -> Result<Self> {
        if coords.len() != sphere.dim() {
            return Err(Error::InvalidPoint("coordinate count differs from the dimension"));
        }
        let norm = sqrt(coords.iter().map(|x| x * x).sum::<f64>());
        if !((norm - sphere.radius()).abs() <= POINT_NORM_TOL * sphere.radius()) {
            return Err(Error::InvalidPoint("norm differs from the sphere radius"));
        }
        Ok(SpherePoint { coords, sphere })
    }

    /// Scales a nonzero vector onto the sphere.
    pub fn from_direction(sphere: Sphere, v: Vec<f64>) -> Result<Self> {
        if v.len() != sphere.dim() {
            return Err(Error::InvalidPoint("coordinate count differs from the dimension"));
        }
        let norm = sqrt(v.iter().map(|x| x * x).sum::<f64>());
        if !(norm > 0.0 && norm.is_finite()) {
            return Err(Error::InvalidPoint("direction must be nonzero and finite"));
        }
        let scale = sphere.radius() / norm;
        Ok(SpherePoint {
            coords: v.into_iter().map(|x| x * scale).collect(),
            sphere,
        })
    }

    pub(crate) fn from_raw(sphere: Sphere, coords: Vec<f64>) -> Self {
        SpherePoint { coords, sphere }
    }

    /// The point `R * pole`.
    pub fn at_pole(sphere: Sphere, pole: &Pole) -> Result<Self> {
        pole.check(sphere.dim())?;
        let r = sphere.radius();
        Ok(SpherePoint {
            coords: pole.unit_vector(sphere.dim()).into_iter().map(|x| x * r).collect(),
            sphere,
        })
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn sphere(&self) -> &Sphere {
        &self.sphere
    }

    pub fn into_coords(self) -> Vec<f64> {
        self.coords
    }

    pub fn unit(&self) -> Vec<f64> {
        let r = self.sphere.radius();
        self.coords.iter().map(|x| x / r).collect()
    }
}

/// Cap of angle `theta` about `pole`.
#[derive(Debug, Clone, PartialEq)]
pub struct CapSpec {
    pub pole: Pole,
    pub theta: f64,
}

impl CapSpec {
    pub fn new(pole: Pole, theta: f64) -> Result<Self> {
        if !(0.0..=PI).contains(&theta) {
            return Err(Error::Domain {
                what: "cap angle",
                value: theta,
            });
        }
        Ok(CapSpec { pole, theta })
    }

    pub fn contains(&self, z: &SpherePoint) -> bool {
        self.pole.angle_to(z) <= self.theta
    }
}

/// `arccos(<z/R, y/R>)`, evaluated as `2 atan2(|z - y|, |z + y|)` so it stays
/// accurate near 0 and pi.
pub fn geodesic_angle(z: &SpherePoint, y: &SpherePoint) -> Result<f64> {
    if z.sphere != y.sphere {
        return Err(Error::MismatchedSpheres);
    }
    let r = z.sphere.radius();
    let (mut diff, mut sum) = (0.0, 0.0);
    for (a, b) in z.coords.iter().zip(&y.coords) {
        let (a, b) = (a / r, b / r);
        diff += (a - b) * (a - b);
        sum += (a + b) * (a + b);
    }
    Ok(2.0 * atan2(sqrt(diff), sqrt(sum)))
}

/// Log of the fraction of the latitude-`phi` slice about `z0` that lies within
/// angle `omega` (given as `cos omega`) of a point `y0` at angle `alpha` from
/// `z0`. `slice` is the unit `(m-2)`-sphere, `None` for circles.
pub(crate) fn ln_slice_cover(slice: Option<&Sphere>, cos_omega: f64, phi: f64, alpha: f64) -> f64 {
    let (s_phi, c_phi) = (sin(phi), cos(phi));
    let (s_alpha, c_alpha) = (sin(alpha), cos(alpha));
    let denom = s_phi * s_alpha;
    if denom <= 0.0 {
        return if c_phi * c_alpha >= cos_omega {
            0.0
        } else {
            f64::NEG_INFINITY
        };
    }
    let c = (cos_omega - c_phi * c_alpha) / denom;
    if c > 1.0 {
        return f64::NEG_INFINITY;
    }
    if c <= -1.0 {
        return 0.0;
    }
    match slice {
        Some(s) => s.tails_from_cos(c).lower,
        // The 0-sphere slice is two points at azimuth 0 and pi.
        None => -core::f64::consts::LN_2,
    }
}

fn check_angle(what: &'static str, value: f64) -> Result<()> {
    if (0.0..=PI).contains(&value) {
        Ok(())
    } else {
        Err(Error::Domain { what, value })
    }
}

const INTERSECTION_REL_TOL: f64 = 1e-13;

/// `ln P(Cap(z0, theta) ∩ Cap(y0, omega))` with `angle(z0, y0) = alpha`.
pub fn ln_cap_intersection_fraction(sphere: &Sphere, theta: f64, omega: f64, alpha: f64) -> Result<f64> {
    check_angle("cap angle theta", theta)?;
    check_angle("cap angle omega", omega)?;
    check_angle("pole separation alpha", alpha)?;

    let tails = |t: f64| sphere.tails(t);
    if theta == 0.0 || omega == 0.0 {
        return Ok(f64::NEG_INFINITY);
    }
    if alpha == 0.0 {
        return Ok(tails(theta.min(omega)).lower);
    }
    if alpha == PI {
        return Ok(if theta + omega <= PI {
            f64::NEG_INFINITY
        } else {
            ln_band_unchecked(sphere, PI - omega, theta)
        });
    }
    if omega >= alpha + theta {
        return Ok(tails(theta).lower);
    }
    if theta >= alpha + omega {
        return Ok(tails(omega).lower);
    }
    if theta + omega <= alpha {
        return Ok(f64::NEG_INFINITY);
    }
    if 2.0 * PI - theta - omega <= alpha {
        // The complements are disjoint caps.
        let (a, b) = (tails(theta).upper, tails(omega).upper);
        let q = libm::exp(a) + libm::exp(b);
        return Ok(libm::log1p(-q));
    }

    let mut pieces = Vec::with_capacity(3);
    if omega > alpha {
        pieces.push(tails(theta.min(omega - alpha)).lower);
    }
    let lo = (alpha - omega).abs();
    let hi = theta.min(alpha + omega).min(2.0 * PI - alpha - omega);
    if hi > lo {
        let slice = sphere.slice_sphere();
        let cos_omega = cos(omega);
        let integrand = |phi: f64| {
            let cover = ln_slice_cover(slice.as_ref(), cos_omega, phi, alpha);
            if cover == f64::NEG_INFINITY {
                cover
            } else {
                sphere.ln_latitude_density(phi) + cover
            }
        };
        let mut breaks = [0.0; 9];
        for (k, b) in breaks.iter_mut().enumerate() {
            *b = lo + (hi - lo) * k as f64 / 8.0;
        }
        breaks[8] = hi;
        pieces.push(integrate_ln(integrand, &breaks, INTERSECTION_REL_TOL));
    }
    let full_from = 2.0 * PI - omega - alpha;
    if full_from < theta {
        pieces.push(ln_band_unchecked(sphere, full_from, theta));
    }
    Ok(log_sum_exp(&pieces).min(0.0))
}

/// Normalised measure `P(Cap(z0, theta) ∩ Cap(y0, omega))` for poles at
/// angle `alpha`.
pub fn cap_intersection_fraction(sphere: &Sphere, theta: f64, omega: f64, alpha: f64) -> Result<f64> {
    ln_cap_intersection_fraction(sphere, theta, omega, alpha).map(libm::exp)
}

/// `V = mu(Cap(z0, theta) ∩ Cap(y0, omega))` for orthogonal poles, in log form.
///
/// Only defined for `theta + omega > pi/2`; below that the two caps meet in a
/// set whose measure vanishes as the dimension grows and the quantity is not
/// meaningful as a benchmark.
pub fn theorem1_v(sphere: &Sphere, theta: f64, omega: f64) -> Result<LogMeasure> {
    check_angle("cap angle theta", theta)?;
    check_angle("cap angle omega", omega)?;
    if theta + omega <= FRAC_PI_2 {
        return Err(Error::TrivialIntersectionRegime { sum: theta + omega });
    }
    let frac = ln_cap_intersection_fraction(sphere, theta, omega, FRAC_PI_2)?;
    Ok(sphere.log_area().scale_ln(frac))
}
