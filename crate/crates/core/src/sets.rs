//! Test sets with exact measures: caps, bands, unions of caps and
//! complements.
//!
//! Sets whose poles all lie on one line ("axis-aligned") are zonal: membership
//! depends only on the latitude from that axis, and the set is a finite union
//! of closed latitude intervals. Everything exact about a set goes through
//! that interval form. The one non-zonal exact case is a union of pairwise
//! disjoint caps.

use alloc::boxed::Box;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::{LN_2, PI};

use libm::cos;

use crate::estimate::MonteCarloEstimate;
use crate::geometry::{ln_slice_cover, CapSpec, Pole, SpherePoint};
use crate::numeric::{ln1mexp, ln_sub, log_sum_exp};
use crate::rearrange::{LatitudeGrid, ZonalFunction};
use crate::sampling::{sample_sphere, RandomStream};
use crate::specfun::{cap_angle_ln, ln_band_unchecked, LogMeasure, Sphere};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub enum Shape {
    Cap(CapSpec),
    /// Points whose angle from `pole` lies in `[theta1, theta2]`.
    Band {
        pole: Pole,
        theta1: f64,
        theta2: f64,
    },
    Union(Vec<CapSpec>),
    Complement(Box<Shape>),
}

/// A subset of a particular sphere.
#[derive(Debug, Clone, PartialEq)]
pub struct SphereSet {
    sphere: Sphere,
    shape: Shape,
}

fn check_angle(what: &'static str, value: f64) -> Result<()> {
    if (0.0..=PI).contains(&value) {
        Ok(())
    } else {
        Err(Error::Domain { what, value })
    }
}

fn validate(shape: &Shape, dim: usize) -> Result<()> {
    match shape {
        Shape::Cap(c) => {
            check_angle("cap angle", c.theta)?;
            c.pole.check(dim)
        }
        Shape::Band { pole, theta1, theta2 } => {
            check_angle("band lower angle", *theta1)?;
            check_angle("band upper angle", *theta2)?;
            if theta1 > theta2 {
                return Err(Error::Domain {
                    what: "band (lower angle exceeds upper)",
                    value: *theta1,
                });
            }
            pole.check(dim)
        }
        Shape::Union(caps) => caps.iter().try_for_each(|c| {
            check_angle("cap angle", c.theta)?;
            c.pole.check(dim)
        }),
        Shape::Complement(inner) => validate(inner, dim),
    }
}

impl SphereSet {
    pub fn new(sphere: Sphere, shape: Shape) -> Result<Self> {
        validate(&shape, sphere.dim())?;
        Ok(SphereSet { sphere, shape })
    }

    pub fn cap(sphere: Sphere, pole: Pole, theta: f64) -> Result<Self> {
        SphereSet::new(sphere, Shape::Cap(CapSpec { pole, theta }))
    }

    pub fn band(sphere: Sphere, pole: Pole, theta1: f64, theta2: f64) -> Result<Self> {
        SphereSet::new(sphere, Shape::Band { pole, theta1, theta2 })
    }

    pub fn union(sphere: Sphere, caps: Vec<CapSpec>) -> Result<Self> {
        SphereSet::new(sphere, Shape::Union(caps))
    }

    pub fn complement(self) -> Self {
        SphereSet {
            sphere: self.sphere,
            shape: Shape::Complement(Box::new(self.shape)),
        }
    }

    pub fn sphere(&self) -> &Sphere {
        &self.sphere
    }

    pub fn shape(&self) -> &Shape {
        &self.shape
    }

    /// Membership with closed boundaries.
    pub fn contains(&self, z: &SpherePoint) -> Result<bool> {
        if *z.sphere() != self.sphere {
            return Err(Error::MismatchedSpheres);
        }
        Ok(shape_contains(&self.shape, z))
    }

    /// Latitude-interval form about a common axis, if all poles are collinear.
    pub fn zonal(&self) -> Result<ZonalSet> {
        let dim = self.sphere.dim();
        let axis = reference_axis(&self.shape).ok_or(Error::NotAxisAligned)?;
        let intervals = shape_intervals(&self.shape, &axis, dim)?;
        Ok(ZonalSet {
            sphere: self.sphere,
            slice: self.sphere.slice_sphere(),
            axis,
            intervals,
        })
    }

    pub fn is_axis_aligned(&self) -> bool {
        self.zonal().is_ok()
    }

    /// `(ln P(A), ln(1 - P(A)))`, exact. Fails with [`Error::EstimateOnly`]
    /// for overlapping unions whose poles are not collinear.
    pub fn ln_fractions(&self) -> Result<(f64, f64)> {
        match self.zonal() {
            Ok(z) => Ok(z.ln_fractions()),
            Err(Error::NotAxisAligned) => ln_fractions_general(&self.shape, &self.sphere),
            Err(e) => Err(e),
        }
    }

    /// Normalised measure `P(A)`.
    pub fn fraction(&self) -> Result<f64> {
        self.ln_fractions().map(|(lo, _)| libm::exp(lo))
    }

    /// `mu(A)`.
    pub fn measure(&self) -> Result<LogMeasure> {
        let (lo, _) = self.ln_fractions()?;
        Ok(self.sphere.log_area().scale_ln(lo))
    }

    /// Haar Monte Carlo estimate of `P(A)`.
    pub fn estimate_fraction(&self, n: u64, stream: &mut RandomStream) -> MonteCarloEstimate {
        let mut hits = 0u64;
        for _ in 0..n {
            let z = sample_sphere(&self.sphere, stream);
            if shape_contains(&self.shape, &z) {
                hits += 1;
            }
        }
        MonteCarloEstimate::from_bernoulli(hits, n, stream.seed())
    }

    /// Exact `P(A)` where available, otherwise a Monte Carlo estimate.
    pub fn fraction_or_estimate(&self, n: u64, stream: &mut RandomStream) -> Result<Measured> {
        match self.fraction() {
            Ok(p) => Ok(Measured::Exact(p)),
            Err(Error::EstimateOnly) => Ok(Measured::Estimated(self.estimate_fraction(n, stream))),
            Err(e) => Err(e),
        }
    }

    /// Angle of the cap with the same measure.
    pub fn effective_angle(&self) -> Result<f64> {
        let (lo, hi) = self.ln_fractions()?;
        Ok(angle_from_tails(&self.sphere, lo, hi))
    }

    /// The closed `t`-neighbourhood `{z : min angle to A <= t}`.
    pub fn neighborhood(&self, t: f64) -> Result<SphereSet> {
        if !(t >= 0.0) {
            return Err(Error::Domain {
                what: "neighbourhood radius",
                value: t,
            });
        }
        let grow = |c: &CapSpec| CapSpec {
            pole: c.pole.clone(),
            theta: (c.theta + t).min(PI),
        };
        let shape = match &self.shape {
            Shape::Cap(c) => Shape::Cap(grow(c)),
            Shape::Band { pole, theta1, theta2 } => Shape::Band {
                pole: pole.clone(),
                theta1: (theta1 - t).max(0.0),
                theta2: (theta2 + t).min(PI),
            },
            Shape::Union(caps) => Shape::Union(caps.iter().map(grow).collect()),
            Shape::Complement(_) => return Err(Error::UnsupportedShape("neighbourhood of a complement")),
        };
        Ok(SphereSet {
            sphere: self.sphere,
            shape,
        })
    }

    /// Rewrites complements of caps and bands as caps and unions of caps.
    /// The result differs from `self` at most on a boundary of measure zero.
    pub fn canonicalize(&self) -> SphereSet {
        SphereSet {
            sphere: self.sphere,
            shape: canonical(&self.shape),
        }
    }

    /// Indicator of the set on `grid`, each cell judged by its midpoint.
    pub fn zonal_profile(&self, grid: &Arc<LatitudeGrid>) -> Result<ZonalFunction> {
        self.zonal()?.profile(grid)
    }
}

/// A set measure that is either exact or sampled.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Measured {
    Exact(f64),
    Estimated(MonteCarloEstimate),
}

impl Measured {
    pub fn value(&self) -> f64 {
        match self {
            Measured::Exact(v) => *v,
            Measured::Estimated(e) => e.mean,
        }
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, Measured::Exact(_))
    }
}

fn angle_from_tails(sphere: &Sphere, ln_lower: f64, ln_upper: f64) -> f64 {
    if ln_lower <= -LN_2 {
        cap_angle_ln(sphere, ln_lower)
    } else {
        PI - cap_angle_ln(sphere, ln_upper)
    }
}

fn shape_contains(shape: &Shape, z: &SpherePoint) -> bool {
    match shape {
        Shape::Cap(c) => c.contains(z),
        Shape::Band { pole, theta1, theta2 } => {
            let a = pole.angle_to(z);
            *theta1 <= a && a <= *theta2
        }
        Shape::Union(caps) => caps.iter().any(|c| c.contains(z)),
        Shape::Complement(inner) => !shape_contains(inner, z),
    }
}

fn first_pole(shape: &Shape) -> Option<&Pole> {
    match shape {
        Shape::Cap(c) => Some(&c.pole),
        Shape::Band { pole, .. } => Some(pole),
        Shape::Union(caps) => caps.first().map(|c| &c.pole),
        Shape::Complement(inner) => first_pole(inner),
    }
}

/// Positive coordinate axis for axis poles, else the first direction seen.
fn reference_axis(shape: &Shape) -> Option<Pole> {
    let axis = match first_pole(shape)? {
        Pole::Axis { index, .. } => Pole::axis(*index),
        p => p.clone(),
    };
    Some(axis)
}

fn oriented(pole: &Pole, axis: &Pole, dim: usize) -> Result<bool> {
    if !pole.collinear_with(axis, dim) {
        return Err(Error::NotAxisAligned);
    }
    Ok(pole.same_sense(axis, dim))
}

fn shape_intervals(shape: &Shape, axis: &Pole, dim: usize) -> Result<Vec<(f64, f64)>> {
    let cap_interval = |c: &CapSpec| -> Result<(f64, f64)> {
        Ok(if oriented(&c.pole, axis, dim)? {
            (0.0, c.theta)
        } else {
            (PI - c.theta, PI)
        })
    };
    let raw = match shape {
        Shape::Cap(c) => vec![cap_interval(c)?],
        Shape::Band { pole, theta1, theta2 } => {
            if oriented(pole, axis, dim)? {
                vec![(*theta1, *theta2)]
            } else {
                vec![(PI - theta2, PI - theta1)]
            }
        }
        Shape::Union(caps) => caps.iter().map(cap_interval).collect::<Result<Vec<_>>>()?,
        Shape::Complement(inner) => {
            return Ok(complement_intervals(&shape_intervals(inner, axis, dim)?));
        }
    };
    Ok(merge_intervals(raw))
}

fn merge_intervals(mut raw: Vec<(f64, f64)>) -> Vec<(f64, f64)> {
    raw.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    let mut out: Vec<(f64, f64)> = Vec::with_capacity(raw.len());
    for (lo, hi) in raw {
        match out.last_mut() {
            Some(last) if lo <= last.1 => last.1 = last.1.max(hi),
            _ => out.push((lo, hi)),
        }
    }
    out
}

/// Closure of the complement in `[0, pi]`; measure-zero boundaries are kept.
fn complement_intervals(intervals: &[(f64, f64)]) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(intervals.len() + 1);
    let mut start = 0.0;
    for &(lo, hi) in intervals {
        if lo > start {
            out.push((start, lo));
        }
        start = hi;
    }
    if start < PI {
        out.push((start, PI));
    }
    out
}

fn ln_fractions_general(shape: &Shape, sphere: &Sphere) -> Result<(f64, f64)> {
    match shape {
        Shape::Complement(inner) => {
            let (lo, hi) = ln_fractions_general(inner, sphere)?;
            Ok((hi, lo))
        }
        Shape::Union(caps) => {
            let dim = sphere.dim();
            for (i, a) in caps.iter().enumerate() {
                for b in &caps[i + 1..] {
                    if a.pole.angle_between(&b.pole, dim) <= a.theta + b.theta {
                        return Err(Error::EstimateOnly);
                    }
                }
            }
            let terms: Vec<f64> = caps.iter().map(|c| sphere.tails(c.theta).lower).collect();
            let lo = log_sum_exp(&terms).min(0.0);
            Ok((lo, ln1mexp(lo)))
        }
        // Single caps and bands are always zonal.
        _ => Err(Error::EstimateOnly),
    }
}

fn canonical(shape: &Shape) -> Shape {
    match shape {
        Shape::Complement(inner) => match inner.as_ref() {
            Shape::Complement(x) => canonical(x),
            Shape::Cap(c) => Shape::Cap(CapSpec {
                pole: c.pole.negated(),
                theta: PI - c.theta,
            }),
            Shape::Band { pole, theta1, theta2 } => {
                let mut caps = Vec::with_capacity(2);
                if *theta1 > 0.0 {
                    caps.push(CapSpec {
                        pole: pole.clone(),
                        theta: *theta1,
                    });
                }
                if *theta2 < PI {
                    caps.push(CapSpec {
                        pole: pole.negated(),
                        theta: PI - theta2,
                    });
                }
                Shape::Union(caps)
            }
            Shape::Union(_) => shape.clone(),
        },
        other => other.clone(),
    }
}

/// A zonal set: a union of closed latitude intervals about `axis`.
#[derive(Debug, Clone, PartialEq)]
pub struct ZonalSet {
    sphere: Sphere,
    slice: Option<Sphere>,
    axis: Pole,
    intervals: Vec<(f64, f64)>,
}

impl ZonalSet {
    pub fn axis(&self) -> &Pole {
        &self.axis
    }

    /// Disjoint, sorted latitude intervals.
    pub fn intervals(&self) -> &[(f64, f64)] {
        &self.intervals
    }

    pub fn contains_latitude(&self, phi: f64) -> bool {
        self.intervals.iter().any(|&(lo, hi)| lo <= phi && phi <= hi)
    }

    /// `(ln P(A), ln(1 - P(A)))` from band fractions of the intervals and of
    /// the gaps, so neither side suffers cancellation.
    pub fn ln_fractions(&self) -> (f64, f64) {
        let band = |&(lo, hi): &(f64, f64)| ln_band_unchecked(&self.sphere, lo, hi);
        let inside: Vec<f64> = self.intervals.iter().map(band).collect();
        let outside: Vec<f64> = complement_intervals(&self.intervals).iter().map(band).collect();
        (log_sum_exp(&inside).min(0.0), log_sum_exp(&outside).min(0.0))
    }

    pub fn profile(&self, grid: &Arc<LatitudeGrid>) -> Result<ZonalFunction> {
        if *grid.sphere() != self.sphere {
            return Err(Error::MismatchedSpheres);
        }
        let values = grid
            .midpoints()
            .iter()
            .map(|&phi| if self.contains_latitude(phi) { 1.0 } else { 0.0 })
            .collect();
        ZonalFunction::new(grid.clone(), values)
    }

    /// `ln P(z in A)` for `z` uniform on the points at angle `rho` from a
    /// point `y` that sits at angle `alpha` from the axis.
    pub fn ln_slice_membership(&self, alpha: f64, rho: f64) -> f64 {
        let slice = self.slice.as_ref();
        // cover(t, a): fraction of the slice within angle t of a pole at angle a.
        let cover = |t: f64, a: f64| ln_slice_cover(slice, cos(t), rho, a);
        let mirrored = PI - alpha;
        let mut terms = Vec::with_capacity(self.intervals.len());
        for &(lo, hi) in &self.intervals {
            let direct_hi = if hi >= PI { 0.0 } else { cover(hi, alpha) };
            let flip_hi = if lo <= 0.0 { 0.0 } else { cover(PI - lo, mirrored) };
            let term = if direct_hi <= flip_hi {
                let below = if lo <= 0.0 { f64::NEG_INFINITY } else { cover(lo, alpha) };
                ln_sub(direct_hi, below)
            } else {
                let above = if hi >= PI {
                    f64::NEG_INFINITY
                } else {
                    cover(PI - hi, mirrored)
                };
                ln_sub(flip_hi, above)
            };
            terms.push(term);
        }
        log_sum_exp(&terms).min(0.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::specfun::cap_fraction;

    fn s(m: usize) -> Sphere {
        Sphere::unit(m).unwrap()
    }

    #[test]
    fn membership_examples() {
        let sp = s(5);
        let e1 = SpherePoint::at_pole(sp, &Pole::axis(0)).unwrap();
        let cap = SphereSet::cap(sp, Pole::axis(0), 1.0).unwrap();
        assert!(cap.contains(&e1).unwrap());
        assert!(!cap.clone().complement().contains(&e1).unwrap());
        let band = SphereSet::band(sp, Pole::axis(0), 0.5, 1.0).unwrap();
        let z = SpherePoint::from_direction(sp, vec![libm::cos(0.75), libm::sin(0.75), 0.0, 0.0, 0.0]).unwrap();
        assert!(band.contains(&z).unwrap());
    }

    #[test]
    fn exact_measures() {
        let sp = s(12);
        let f = |t| cap_fraction(&sp, t).unwrap();
        let cap = SphereSet::cap(sp, Pole::axis(0), 0.9).unwrap();
        assert!((cap.fraction().unwrap() - f(0.9)).abs() < 1e-15);
        let band = SphereSet::band(sp, Pole::axis(0), 0.0, 0.9).unwrap();
        assert!((band.fraction().unwrap() - f(0.9)).abs() < 1e-15);
        let union = SphereSet::union(
            sp,
            vec![
                CapSpec::new(Pole::axis(0), 0.4).unwrap(),
                CapSpec::new(Pole::negative_axis(0), 0.4).unwrap(),
            ],
        )
        .unwrap();
        assert!((union.fraction().unwrap() - 2.0 * f(0.4)).abs() < 1e-15);
        let comp = cap.clone().complement();
        assert!((comp.fraction().unwrap() - (1.0 - f(0.9))).abs() < 1e-14);
        assert!((comp.effective_angle().unwrap() - (PI - 0.9)).abs() < 1e-12);
    }

    #[test]
    fn overlapping_unions_are_exact_when_collinear_and_estimated_otherwise() {
        let sp = s(6);
        let collinear = SphereSet::union(
            sp,
            vec![
                CapSpec::new(Pole::axis(1), 0.8).unwrap(),
                CapSpec::new(Pole::axis(1), 1.1).unwrap(),
            ],
        )
        .unwrap();
        assert!((collinear.fraction().unwrap() - cap_fraction(&sp, 1.1).unwrap()).abs() < 1e-15);
        let skew = SphereSet::union(
            sp,
            vec![
                CapSpec::new(Pole::axis(0), 0.8).unwrap(),
                CapSpec::new(Pole::axis(1), 0.8).unwrap(),
            ],
        )
        .unwrap();
        assert_eq!(skew.fraction(), Err(Error::EstimateOnly));
        let mut st = RandomStream::new(3, 0);
        assert!(!skew.fraction_or_estimate(1000, &mut st).unwrap().is_exact());
        let disjoint = SphereSet::union(
            sp,
            vec![
                CapSpec::new(Pole::axis(0), 0.5).unwrap(),
                CapSpec::new(Pole::axis(1), 0.5).unwrap(),
            ],
        )
        .unwrap();
        assert!((disjoint.fraction().unwrap() - 2.0 * cap_fraction(&sp, 0.5).unwrap()).abs() < 1e-15);
    }

    #[test]
    fn neighbourhoods() {
        let sp = s(8);
        let band = SphereSet::band(sp, Pole::axis(0), 0.9, 1.3).unwrap();
        let grown = band.neighborhood(0.2).unwrap();
        match grown.shape() {
            Shape::Band { theta1, theta2, .. } => {
                assert!((theta1 - 0.7).abs() < 1e-15 && (theta2 - 1.5).abs() < 1e-15)
            }
            other => panic!("unexpected {other:?}"),
        }
        assert_eq!(band.neighborhood(0.0).unwrap(), band);
        assert_eq!(
            band.clone().complement().neighborhood(0.1),
            Err(Error::UnsupportedShape("neighbourhood of a complement"))
        );
        assert!(band.neighborhood(-0.1).is_err());
    }

    #[test]
    fn canonical_forms() {
        let sp = s(8);
        let comp = SphereSet::cap(sp, Pole::axis(0), 0.7).unwrap().complement();
        let c = comp.canonicalize();
        assert_eq!(
            c.shape(),
            &Shape::Cap(CapSpec::new(Pole::negative_axis(0), PI - 0.7).unwrap())
        );
        let band_c = SphereSet::band(sp, Pole::axis(0), 0.5, 2.0)
            .unwrap()
            .complement()
            .canonicalize();
        assert!((band_c.fraction().unwrap() - comp_band(&sp)).abs() < 1e-14);
    }

    fn comp_band(sp: &Sphere) -> f64 {
        1.0 - (cap_fraction(sp, 2.0).unwrap() - cap_fraction(sp, 0.5).unwrap())
    }

    #[test]
    fn slice_membership_limits() {
        let sp = s(10);
        let z = SphereSet::band(sp, Pole::axis(0), 0.6, 1.4).unwrap().zonal().unwrap();
        // From the axis itself every point at angle rho has latitude rho.
        assert_eq!(z.ln_slice_membership(0.0, 1.0), 0.0);
        assert_eq!(z.ln_slice_membership(0.0, 0.2), f64::NEG_INFINITY);
        assert_eq!(z.ln_slice_membership(PI, PI - 1.0), 0.0);
    }
}
