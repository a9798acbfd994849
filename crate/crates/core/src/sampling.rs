//! Reproducible uniform sampling on the sphere and on caps.
//!
//! Every draw comes from a [`RandomStream`], a ChaCha8 generator keyed by a
//! seed and selected by a stream id. Normal deviates are produced by inverting
//! the normal CDF with Wichura's rational approximation, so each deviate
//! consumes exactly one 64-bit word and the output is bitwise reproducible.

use alloc::vec;
use alloc::vec::Vec;

use libm::{cos, exp, log, sin, sqrt};
use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

use crate::geometry::{CapSpec, Pole, SpherePoint};
use crate::specfun::{cap_angle_from_ln, Sphere};
use crate::{Error, Result};

/// An independent, reproducible source of random numbers.
#[derive(Debug, Clone)]
pub struct RandomStream {
    seed: u64,
    stream_id: u64,
    rng: ChaCha8Rng,
}

impl RandomStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream_id);
        RandomStream { seed, stream_id, rng }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream_id(&self) -> u64 {
        self.stream_id
    }

    pub fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    /// Uniform on the open interval `(0, 1)`: midpoints of a 2^-53 lattice.
    pub fn next_open01(&mut self) -> f64 {
        ((self.next_u64() >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64)
    }

    pub fn standard_normal(&mut self) -> f64 {
        normal_quantile(self.next_open01())
    }

    pub fn fill_normal(&mut self, out: &mut [f64]) {
        for x in out {
            *x = self.standard_normal();
        }
    }
}

/// Inverse of the standard normal CDF (Wichura, algorithm AS241, PPND16),
/// relative accuracy about 1e-16. `p` must lie in `(0, 1)`.
pub fn normal_quantile(p: f64) -> f64 {
    const A: [f64; 8] = [
        3.387_132_872_796_366_608,
        133.141_667_891_784_377_45,
        1_971.590_950_306_551_442_7,
        13_731.693_765_509_461_125,
        45_921.953_931_549_871_457,
        67_265.770_927_008_700_853,
        33_430.575_583_588_128_105,
        2_509.080_928_730_122_672_7,
    ];
    const B: [f64; 8] = [
        1.0,
        42.313_330_701_600_911_252,
        687.187_007_492_057_908_3,
        5_394.196_021_424_751_107_7,
        21_213.794_301_586_595_867,
        39_307.895_800_092_710_61,
        28_729.085_735_721_942_674,
        5_226.495_278_852_854_561,
    ];
    const C: [f64; 8] = [
        1.423_437_110_749_683_577_34,
        4.630_337_846_156_545_295_9,
        5.769_497_221_460_691_405_5,
        3.647_848_324_763_204_605_04,
        1.270_458_252_452_368_382_58,
        0.241_780_725_177_450_611_77,
        0.022_723_844_989_269_184_583_3,
        7.745_450_142_783_414_076_4e-4,
    ];
    const D: [f64; 8] = [
        1.0,
        2.053_191_626_637_758_821_87,
        1.676_384_830_183_803_849_4,
        0.689_767_334_985_100_004_55,
        0.148_103_976_427_480_074_59,
        0.015_198_666_563_616_457_196_6,
        5.475_938_084_995_344_946e-4,
        1.050_750_071_644_416_843_24e-9,
    ];
    const E: [f64; 8] = [
        6.657_904_643_501_103_777_2,
        5.463_784_911_164_114_369_9,
        1.784_826_539_917_291_335_8,
        0.296_560_571_828_504_891_23,
        0.026_532_189_526_576_123_093,
        0.001_242_660_947_388_078_438_6,
        2.711_555_568_743_487_578_15e-5,
        2.010_334_399_292_288_132_65e-7,
    ];
    const F: [f64; 8] = [
        1.0,
        0.599_832_206_555_887_937_69,
        0.136_929_880_922_735_805_31,
        0.014_875_361_290_850_614_852_5,
        7.868_691_311_456_132_591e-4,
        1.846_318_317_510_054_681_8e-5,
        1.421_511_758_316_445_888_7e-7,
        2.044_263_103_389_939_785_64e-15,
    ];
    fn poly(c: &[f64; 8], x: f64) -> f64 {
        c.iter().rev().fold(0.0, |acc, &k| acc * x + k)
    }

    let q = p - 0.5;
    if q.abs() <= 0.425 {
        let r = 0.180_625 - q * q;
        return q * poly(&A, r) / poly(&B, r);
    }
    let tail = if q < 0.0 { p } else { 1.0 - p };
    let mut r = sqrt(-log(tail));
    let x = if r <= 5.0 {
        r -= 1.6;
        poly(&C, r) / poly(&D, r)
    } else {
        r -= 5.0;
        poly(&E, r) / poly(&F, r)
    };
    if q < 0.0 {
        -x
    } else {
        x
    }
}

/// Haar-uniform point: a normalised Gaussian vector scaled to radius `R`.
pub fn sample_sphere(sphere: &Sphere, stream: &mut RandomStream) -> SpherePoint {
    let mut v = vec![0.0; sphere.dim()];
    stream.fill_normal(&mut v);
    let scale = sphere.radius() / sqrt(v.iter().map(|x| x * x).sum::<f64>());
    for x in &mut v {
        *x *= scale;
    }
    SpherePoint::from_raw(*sphere, v)
}

/// Uniform point of `Cap(pole, theta)`.
///
/// The latitude is drawn by inverting the cap's latitude CDF with bisection;
/// use [`CapSampler`] when drawing many points from the same cap.
pub fn sample_cap(sphere: &Sphere, cap: &CapSpec, stream: &mut RandomStream) -> Result<SpherePoint> {
    check_cap(sphere, cap)?;
    let ln_total = sphere.tails(cap.theta).lower;
    let phi = cap_angle_from_ln(sphere, log(stream.next_open01()) + ln_total).min(cap.theta);
    Ok(place_at_latitude(sphere, &cap.pole, phi, stream))
}

fn check_cap(sphere: &Sphere, cap: &CapSpec) -> Result<()> {
    if !(0.0..=core::f64::consts::PI).contains(&cap.theta) {
        return Err(Error::Domain {
            what: "cap angle",
            value: cap.theta,
        });
    }
    if cap.theta == 0.0 {
        return Err(Error::ZeroCapAngle);
    }
    cap.pole.check(sphere.dim())
}

/// Point at angle `phi` from `pole` in a uniformly random direction.
fn place_at_latitude(sphere: &Sphere, pole: &Pole, phi: f64, stream: &mut RandomStream) -> SpherePoint {
    let m = sphere.dim();
    let mut x = vec![0.0; m];
    stream.fill_normal(&mut x[1..]);
    let norm = sqrt(x[1..].iter().map(|v| v * v).sum::<f64>());
    let (s, c) = (sin(phi), cos(phi));
    for v in &mut x[1..] {
        *v *= s / norm;
    }
    x[0] = c;
    rotate_from_e1(&mut x, pole);
    let r = sphere.radius();
    for v in &mut x {
        *v *= r;
    }
    SpherePoint::from_raw(*sphere, x)
}

/// Applies an orthogonal map taking `e1` to `pole`.
///
/// Axis poles use a coordinate swap and sign flip. General poles use the
/// Householder reflection through the bisector of `e1` and `±pole`, whichever
/// is better conditioned.
fn rotate_from_e1(x: &mut [f64], pole: &Pole) {
    match pole {
        Pole::Axis { index, negative } => {
            x.swap(0, *index);
            if *negative {
                x[*index] = -x[*index];
            }
        }
        Pole::Direction(p) => {
            let flip = p[0] >= 0.0;
            // v = e1 + p (then negate the image) or v = e1 - p.
            let sign = if flip { 1.0 } else { -1.0 };
            let vv = 2.0 * (1.0 + sign * p[0]);
            let vx = x[0] + sign * x.iter().zip(p).map(|(xi, pi)| xi * pi).sum::<f64>();
            let k = 2.0 * vx / vv;
            for (i, (xi, pi)) in x.iter_mut().zip(p).enumerate() {
                let vi = sign * pi + if i == 0 { 1.0 } else { 0.0 };
                *xi -= k * vi;
                if flip {
                    *xi = -*xi;
                }
            }
        }
    }
}

const TABLE_SIZE: usize = 256;

/// Fast repeated sampling from caps of one fixed angle.
///
/// A table of latitudes at equally spaced cap probabilities brackets every
/// inverse-CDF solve; inside a bracket a safeguarded Newton iteration on
/// `ln F(phi) - ln p` converges in a few steps.
#[derive(Debug, Clone)]
pub struct CapSampler {
    sphere: Sphere,
    theta: f64,
    ln_total: f64,
    table: Vec<f64>,
}

impl CapSampler {
    pub fn new(sphere: Sphere, theta: f64) -> Result<Self> {
        if !(0.0..=core::f64::consts::PI).contains(&theta) {
            return Err(Error::Domain {
                what: "cap angle",
                value: theta,
            });
        }
        if theta == 0.0 {
            return Err(Error::ZeroCapAngle);
        }
        let ln_total = sphere.tails(theta).lower;
        let mut table = Vec::with_capacity(TABLE_SIZE + 1);
        table.push(0.0);
        for k in 1..TABLE_SIZE {
            let ln_p = log(k as f64 / TABLE_SIZE as f64) + ln_total;
            table.push(cap_angle_from_ln(&sphere, ln_p).min(theta));
        }
        table.push(theta);
        Ok(CapSampler {
            sphere,
            theta,
            ln_total,
            table,
        })
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn sphere(&self) -> &Sphere {
        &self.sphere
    }

    /// Latitude (angle from the pole) of a uniform point of the cap.
    pub fn sample_latitude(&self, stream: &mut RandomStream) -> f64 {
        let u = stream.next_open01();
        let k = ((u * TABLE_SIZE as f64) as usize).min(TABLE_SIZE - 1);
        self.solve(log(u) + self.ln_total, self.table[k], self.table[k + 1])
    }

    pub fn sample(&self, pole: &Pole, stream: &mut RandomStream) -> Result<SpherePoint> {
        pole.check(self.sphere.dim())?;
        let phi = self.sample_latitude(stream);
        Ok(place_at_latitude(&self.sphere, pole, phi, stream))
    }

    fn solve(&self, ln_p: f64, mut lo: f64, mut hi: f64) -> f64 {
        let mut x = 0.5 * (lo + hi);
        for _ in 0..100 {
            let lf = self.sphere.tails(x).lower;
            let g = lf - ln_p;
            if g == 0.0 {
                return x;
            }
            if g < 0.0 {
                lo = x;
            } else {
                hi = x;
            }
            let slope = exp(self.sphere.ln_latitude_density(x) - lf);
            let mut next = x - g / slope;
            if !(next > lo && next < hi) {
                next = 0.5 * (lo + hi);
            }
            if (next - x).abs() <= 2.0 * f64::EPSILON * x || hi - lo <= 2.0 * f64::EPSILON * hi {
                return next;
            }
            x = next;
        }
        x
    }
}
