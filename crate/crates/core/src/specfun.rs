//! Sphere normalisation and the log-domain special functions behind every cap
//! measure.
//!
//! The normalised measure of a cap of angle `theta` on `S^{m-1}` is
//!
//! ```text
//! P(Cap(theta)) = int_0^theta sin^{m-2} / int_0^pi sin^{m-2}
//!              = I_{sin^2 theta}((m-1)/2, 1/2) / 2        (theta <= pi/2)
//! ```
//!
//! and the reflection `P(theta) = 1 - P(pi - theta)` for the other half. All
//! functions keep both tails (and the distance to the equator) in log form so
//! that nothing cancels or underflows at large `m`.

use core::f64::consts::{FRAC_PI_2, LN_2, PI};

use libm::{cos, exp, lgamma, log, sin};

use crate::numeric::{ln1mexp, ln_add, ln_sub};
use crate::{Error, Result};

const LN_PI: f64 = 1.144_729_885_849_400_2;

/// Natural log of a nonnegative measure; `-inf` encodes measure zero.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct LogMeasure(f64);

impl LogMeasure {
    pub const ZERO: LogMeasure = LogMeasure(f64::NEG_INFINITY);

    pub fn from_ln(ln: f64) -> Self {
        LogMeasure(ln)
    }

    pub fn from_value(value: f64) -> Self {
        LogMeasure(log(value))
    }

    pub fn ln(self) -> f64 {
        self.0
    }

    /// `exp` of the stored log. Underflows to zero for very small measures.
    pub fn value(self) -> f64 {
        exp(self.0)
    }

    pub fn is_zero(self) -> bool {
        self.0 == f64::NEG_INFINITY
    }

    /// Measure of a disjoint union.
    pub fn add(self, other: LogMeasure) -> LogMeasure {
        LogMeasure(ln_add(self.0, other.0))
    }

    /// Scale by a factor given in log form.
    pub fn scale_ln(self, ln_factor: f64) -> LogMeasure {
        LogMeasure(self.0 + ln_factor)
    }
}

/// The sphere `S^{m-1} = {z in R^m : |z| = R}` with its surface measure.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sphere {
    dim: usize,
    radius: f64,
    // ln int_0^pi sin^{m-2}(phi) dphi = ln B((m-1)/2, 1/2)
    ln_norm: f64,
    ln_area: f64,
}

impl Sphere {
    pub fn new(dim: usize, radius: f64) -> Result<Self> {
        if dim < 2 {
            return Err(Error::InvalidDimension(dim));
        }
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::InvalidRadius(radius));
        }
        let m = dim as f64;
        let ln_norm = ln_beta((m - 1.0) / 2.0, 0.5);
        let ln_area = LN_2 + 0.5 * m * LN_PI - lgamma(0.5 * m) + (m - 1.0) * log(radius);
        Ok(Sphere {
            dim,
            radius,
            ln_norm,
            ln_area,
        })
    }

    pub fn unit(dim: usize) -> Result<Self> {
        Sphere::new(dim, 1.0)
    }

    /// Ambient dimension `m`.
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn log_area(&self) -> LogMeasure {
        LogMeasure(self.ln_area)
    }

    /// The unit sphere one dimension down: the latitude slices of `self` are
    /// scaled copies of it. `None` for circles, whose slices are point pairs.
    pub fn slice_sphere(&self) -> Option<Sphere> {
        (self.dim >= 3).then(|| Sphere::unit(self.dim - 1).expect("dim - 1 >= 2"))
    }

    /// Log of the normalised latitude density `sin^{m-2}(phi) / B((m-1)/2, 1/2)`.
    pub fn ln_latitude_density(&self, phi: f64) -> f64 {
        if self.dim == 2 {
            return -LN_PI;
        }
        if phi <= 0.0 || phi >= PI {
            return f64::NEG_INFINITY;
        }
        (self.dim as f64 - 2.0) * log(sin(phi)) - self.ln_norm
    }

    /// Both tails of the cap measure at angle `theta`, in log form.
    pub fn tails(&self, theta: f64) -> CapTails {
        if theta <= 0.0 {
            return CapTails::EMPTY;
        }
        if theta >= PI {
            return CapTails::FULL;
        }
        let (s, c) = (sin(theta), cos(theta));
        self.tails_from_sin_cos(s * s, c * c, theta <= FRAC_PI_2)
    }

    /// Both tails of the cap measure for a cap whose angle has cosine `cos_theta`.
    pub fn tails_from_cos(&self, cos_theta: f64) -> CapTails {
        if cos_theta >= 1.0 {
            return CapTails::EMPTY;
        }
        if cos_theta <= -1.0 {
            return CapTails::FULL;
        }
        let sin_sq = (1.0 - cos_theta) * (1.0 + cos_theta);
        self.tails_from_sin_cos(sin_sq, cos_theta * cos_theta, cos_theta >= 0.0)
    }

    fn tails_from_sin_cos(&self, sin_sq: f64, cos_sq: f64, within_hemisphere: bool) -> CapTails {
        let a = (self.dim as f64 - 1.0) / 2.0;
        let (ln_i, ln_1mi) = inc_beta_tails(sin_sq, cos_sq, a, 0.5, self.ln_norm);
        // Within the hemisphere around the pole: F = I/2, 1/2 - F = (1-I)/2.
        let near = ln_i - LN_2;
        let equatorial = ln_1mi - LN_2;
        let far = ln_add(-LN_2, equatorial);
        if within_hemisphere {
            CapTails {
                lower: near,
                upper: far,
                equatorial,
            }
        } else {
            CapTails {
                lower: far,
                upper: near,
                equatorial,
            }
        }
    }

    /// `ln P(Cap(theta))` without range checks.
    pub fn ln_cap(&self, theta: f64) -> f64 {
        self.tails(theta).lower
    }
}

/// Log-domain description of a cap of angle `theta`: `lower = ln P(cap)`,
/// `upper = ln(1 - P(cap))` and `equatorial = ln|1/2 - P(cap)|`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CapTails {
    pub lower: f64,
    pub upper: f64,
    pub equatorial: f64,
}

impl CapTails {
    const EMPTY: CapTails = CapTails {
        lower: f64::NEG_INFINITY,
        upper: 0.0,
        equatorial: -LN_2,
    };
    const FULL: CapTails = CapTails {
        lower: 0.0,
        upper: f64::NEG_INFINITY,
        equatorial: -LN_2,
    };
}

/// `ln B(a, b)`.
pub fn ln_beta(a: f64, b: f64) -> f64 {
    lgamma(a) + lgamma(b) - lgamma(a + b)
}

/// `ln mu(S^{m-1}) = ln(2 pi^{m/2} / Gamma(m/2) R^{m-1})`.
pub fn log_sphere_area(sphere: &Sphere) -> LogMeasure {
    sphere.log_area()
}

/// Regularized incomplete beta function `I_x(a, b)`.
pub fn reg_inc_beta(x: f64, a: f64, b: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::Domain {
            what: "incomplete beta argument",
            value: x,
        });
    }
    if !(a > 0.0 && a.is_finite()) {
        return Err(Error::Domain {
            what: "incomplete beta parameter a",
            value: a,
        });
    }
    if !(b > 0.0 && b.is_finite()) {
        return Err(Error::Domain {
            what: "incomplete beta parameter b",
            value: b,
        });
    }
    let (ln_i, _) = inc_beta_tails(x, 1.0 - x, a, b, ln_beta(a, b));
    Ok(exp(ln_i))
}

/// `(ln I_x(a,b), ln(1 - I_x(a,b)))` with `y = 1 - x` supplied separately so
/// callers can pass an accurately computed complement.
///
/// The continued fraction is evaluated for `I_x(a, b)` when `x <= a/(a+b)` and
/// for `I_y(b, a)` otherwise; the other tail follows by complement.
pub(crate) fn inc_beta_tails(x: f64, y: f64, a: f64, b: f64, ln_beta_ab: f64) -> (f64, f64) {
    if x <= 0.0 {
        return (f64::NEG_INFINITY, 0.0);
    }
    if y <= 0.0 {
        return (0.0, f64::NEG_INFINITY);
    }
    if x <= a / (a + b) {
        let ln_i = a * log(x) + b * log(y) - log(a) - ln_beta_ab + log(beta_cf(x, a, b));
        let ln_i = ln_i.min(0.0);
        (ln_i, ln1mexp(ln_i))
    } else {
        let ln_j = b * log(y) + a * log(x) - log(b) - ln_beta_ab + log(beta_cf(y, b, a));
        let ln_j = ln_j.min(0.0);
        (ln1mexp(ln_j), ln_j)
    }
}

/// Continued fraction for the incomplete beta function (modified Lentz).
fn beta_cf(x: f64, a: f64, b: f64) -> f64 {
    const MAX_ITER: usize = 20_000;
    const EPS: f64 = 1e-16;
    const TINY: f64 = 1e-300;

    let qab = a + b;
    let qap = a + 1.0;
    let qam = a - 1.0;
    let mut c = 1.0;
    let mut d = 1.0 - qab * x / qap;
    if d.abs() < TINY {
        d = TINY;
    }
    d = 1.0 / d;
    let mut h = d;
    for n in 1..=MAX_ITER {
        let nf = n as f64;
        let n2 = 2.0 * nf;

        let aa = nf * (b - nf) * x / ((qam + n2) * (a + n2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        h *= d * c;

        let aa = -(a + nf) * (qab + nf) * x / ((a + n2) * (qap + n2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let delta = d * c;
        h *= delta;
        if (delta - 1.0).abs() < EPS {
            break;
        }
    }
    h
}

fn check_angle(what: &'static str, theta: f64) -> Result<()> {
    if (0.0..=PI).contains(&theta) {
        Ok(())
    } else {
        Err(Error::Domain { what, value: theta })
    }
}

/// Normalised (Haar probability) measure of `Cap(z0, theta)`.
pub fn cap_fraction(sphere: &Sphere, theta: f64) -> Result<f64> {
    check_angle("cap angle", theta)?;
    Ok(exp(sphere.tails(theta).lower))
}

/// `ln P(Cap(z0, theta))`; finite wherever the cap has positive measure.
pub fn ln_cap_fraction(sphere: &Sphere, theta: f64) -> Result<f64> {
    check_angle("cap angle", theta)?;
    Ok(sphere.tails(theta).lower)
}

/// `ln P({z : lo <= angle(z0, z) <= hi})`.
pub fn ln_band_fraction(sphere: &Sphere, lo: f64, hi: f64) -> Result<f64> {
    check_angle("band lower angle", lo)?;
    check_angle("band upper angle", hi)?;
    if lo > hi {
        return Err(Error::Domain {
            what: "band (lower angle exceeds upper)",
            value: lo,
        });
    }
    Ok(ln_band_unchecked(sphere, lo, hi))
}

pub(crate) fn ln_band_unchecked(sphere: &Sphere, lo: f64, hi: f64) -> f64 {
    if hi <= lo {
        return f64::NEG_INFINITY;
    }
    if lo >= FRAC_PI_2 {
        return ln_band_unchecked(sphere, PI - hi, PI - lo);
    }
    let t_lo = sphere.tails(lo);
    let t_hi = sphere.tails(hi);
    if hi <= FRAC_PI_2 {
        if t_hi.lower < log(0.25) {
            ln_sub(t_hi.lower, t_lo.lower)
        } else {
            ln_sub(t_lo.equatorial, t_hi.equatorial)
        }
    } else {
        ln_add(t_lo.equatorial, t_hi.equatorial)
    }
}

/// Angle of the cap with normalised measure `p`; inverse of [`cap_fraction`].
pub fn cap_angle(sphere: &Sphere, p: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::Domain {
            what: "cap probability",
            value: p,
        });
    }
    if p == 0.0 {
        return Ok(0.0);
    }
    if p == 1.0 {
        return Ok(PI);
    }
    if p <= 0.5 {
        Ok(cap_angle_ln(sphere, log(p)))
    } else {
        Ok(PI - cap_angle_ln(sphere, log(1.0 - p)))
    }
}

/// Cap angle from `ln p`, for `p <= 1/2`; the result lies in `[0, pi/2]`.
///
/// Bracketed bisection on `[0, pi/2]`, run until the bracket cannot shrink.
pub fn cap_angle_ln(sphere: &Sphere, ln_p: f64) -> f64 {
    if ln_p == f64::NEG_INFINITY {
        return 0.0;
    }
    if ln_p >= -LN_2 {
        return FRAC_PI_2;
    }
    let (mut lo, mut hi) = (0.0_f64, FRAC_PI_2);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if sphere.tails(mid).lower < ln_p {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Cap angle with normalised measure `exp(ln_p)`, for any `ln_p <= 0`.
pub fn cap_angle_from_ln(sphere: &Sphere, ln_p: f64) -> f64 {
    if ln_p <= -LN_2 {
        cap_angle_ln(sphere, ln_p)
    } else if ln_p >= 0.0 {
        PI
    } else {
        PI - cap_angle_ln(sphere, ln1mexp(ln_p))
    }
}

/// Cap angle whose complement has measure `exp(ln_q)`, for `q <= 1/2`.
pub fn cap_angle_upper_ln(sphere: &Sphere, ln_q: f64) -> f64 {
    PI - cap_angle_ln(sphere, ln_q)
}

/// Log of the latitude measure density `A_{m-2}(R sin phi) R`, where
/// `A_k(r)` is the surface measure of the `k`-sphere of radius `r`.
pub fn nu_log_weight(sphere: &Sphere, phi: f64) -> Result<LogMeasure> {
    check_angle("latitude", phi)?;
    let m = sphere.dim as f64;
    let ln_r = log(sphere.radius);
    // ln A_{m-2}(1) = ln 2 + ((m-1)/2) ln pi - ln Gamma((m-1)/2)
    let ln_slice_unit = LN_2 + 0.5 * (m - 1.0) * LN_PI - lgamma(0.5 * (m - 1.0));
    if sphere.dim == 2 {
        return Ok(LogMeasure(ln_slice_unit + ln_r));
    }
    if phi == 0.0 || phi == PI {
        return Ok(LogMeasure::ZERO);
    }
    Ok(LogMeasure(ln_slice_unit + (m - 2.0) * (ln_r + log(sin(phi))) + ln_r))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * b.abs().max(1e-300)
    }

    #[test]
    fn sphere_rejects_bad_parameters() {
        assert_eq!(Sphere::new(1, 1.0), Err(Error::InvalidDimension(1)));
        assert!(matches!(Sphere::new(3, 0.0), Err(Error::InvalidRadius(_))));
        assert!(matches!(Sphere::new(3, f64::NAN), Err(Error::InvalidRadius(_))));
    }

    #[test]
    fn sphere_area_known_values() {
        let s2 = Sphere::unit(3).unwrap();
        assert!(close(log_sphere_area(&s2).value(), 4.0 * PI, 1e-14));
        let circle = Sphere::unit(2).unwrap();
        assert!(close(log_sphere_area(&circle).value(), 2.0 * PI, 1e-14));
        let big = Sphere::new(3, 2.0).unwrap();
        assert!(close(log_sphere_area(&big).value(), 16.0 * PI, 1e-14));
    }

    #[test]
    fn incomplete_beta_trivial_cases() {
        assert!(close(reg_inc_beta(0.3, 1.0, 1.0).unwrap(), 0.3, 1e-14));
        assert!(close(reg_inc_beta(0.5, 0.5, 0.5).unwrap(), 0.5, 1e-14));
        assert_eq!(reg_inc_beta(0.0, 2.0, 3.0).unwrap(), 0.0);
        assert_eq!(reg_inc_beta(1.0, 2.0, 3.0).unwrap(), 1.0);
        // I_x(a, 1) = x^a
        assert!(close(reg_inc_beta(0.4, 3.5, 1.0).unwrap(), libm::pow(0.4, 3.5), 1e-13));
    }

    #[test]
    fn incomplete_beta_domain_errors() {
        assert!(reg_inc_beta(-0.1, 1.0, 1.0).is_err());
        assert!(reg_inc_beta(1.1, 1.0, 1.0).is_err());
        assert!(reg_inc_beta(0.5, 0.0, 1.0).is_err());
        assert!(reg_inc_beta(0.5, 1.0, -2.0).is_err());
    }

    #[test]
    fn cap_fraction_closed_forms() {
        for m in [2, 3, 7, 64, 1000] {
            let s = Sphere::unit(m).unwrap();
            assert!((cap_fraction(&s, FRAC_PI_2).unwrap() - 0.5).abs() < 1e-15);
            assert_eq!(cap_fraction(&s, 0.0).unwrap(), 0.0);
            assert_eq!(cap_fraction(&s, PI).unwrap(), 1.0);
        }
        let s2 = Sphere::unit(3).unwrap();
        assert!(close(cap_fraction(&s2, PI / 3.0).unwrap(), 0.25, 1e-14));
        // circle: arc fraction
        let c = Sphere::unit(2).unwrap();
        assert!(close(cap_fraction(&c, 1.0).unwrap(), 1.0 / PI, 1e-14));
        assert!(cap_fraction(&c, -0.1).is_err());
        assert!(cap_fraction(&c, 3.5).is_err());
    }

    #[test]
    fn cap_fraction_radius_independent() {
        let a = Sphere::new(10, 1.0).unwrap();
        let b = Sphere::new(10, 7.5).unwrap();
        assert_eq!(cap_fraction(&a, 0.8).unwrap(), cap_fraction(&b, 0.8).unwrap());
    }

    #[test]
    fn tails_from_cos_match_tails() {
        let s = Sphere::unit(40).unwrap();
        for theta in [0.2, 1.0, FRAC_PI_2, 2.0, 3.0] {
            let a = s.tails(theta);
            let b = s.tails_from_cos(cos(theta));
            assert!((a.lower - b.lower).abs() < 1e-10 * a.lower.abs().max(1.0));
            assert!((a.upper - b.upper).abs() < 1e-10 * a.upper.abs().max(1.0));
        }
    }

    #[test]
    fn cap_angle_boundaries_and_hemisphere() {
        let s = Sphere::unit(17).unwrap();
        assert_eq!(cap_angle(&s, 0.0).unwrap(), 0.0);
        assert_eq!(cap_angle(&s, 1.0).unwrap(), PI);
        assert!((cap_angle(&s, 0.5).unwrap() - FRAC_PI_2).abs() < 1e-15);
        assert!(cap_angle(&s, 1.5).is_err());
    }

    #[test]
    fn band_fraction_matches_cap_differences() {
        let s = Sphere::unit(12).unwrap();
        let f = |t: f64| cap_fraction(&s, t).unwrap();
        for (lo, hi) in [(0.2, 0.9), (0.9, 1.3), (1.2, 2.0), (1.7, 2.9), (0.0, 2.5)] {
            let got = exp(ln_band_fraction(&s, lo, hi).unwrap());
            assert!(close(got, f(hi) - f(lo), 1e-12), "{lo} {hi}");
        }
        assert_eq!(ln_band_fraction(&s, 1.0, 1.0).unwrap(), f64::NEG_INFINITY);
        assert!(ln_band_fraction(&s, 1.2, 1.0).is_err());
    }

    #[test]
    fn nu_weight_endpoints_and_equator() {
        let s2 = Sphere::unit(3).unwrap();
        assert!(close(nu_log_weight(&s2, FRAC_PI_2).unwrap().ln(), log(2.0 * PI), 1e-14));
        assert!(nu_log_weight(&s2, 0.0).unwrap().is_zero());
        assert!(nu_log_weight(&s2, PI).unwrap().is_zero());
        let c = Sphere::new(2, 3.0).unwrap();
        assert!(close(nu_log_weight(&c, 0.0).unwrap().value(), 6.0, 1e-14));
        let s = Sphere::unit(64).unwrap();
        let ratio = nu_log_weight(&s, 0.1).unwrap().ln() - nu_log_weight(&s, FRAC_PI_2).unwrap().ln();
        assert!((ratio - 62.0 * log(sin(0.1))).abs() < 1e-11);
    }

    #[test]
    fn log_domain_stays_finite_at_huge_dimension() {
        let s = Sphere::unit(10_000).unwrap();
        for theta in [1e-6, 0.5, 1.5, PI - 1e-6] {
            let t = s.tails(theta);
            assert!(t.lower.is_finite() && t.upper.is_finite(), "{theta}: {t:?}");
        }
        assert!(s.log_area().ln().is_finite());
    }
}
