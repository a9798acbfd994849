//! Reference computations used only by tests. They share no code with the
//! library: plain adaptive Simpson quadrature, power series, and sorting.
#![allow(dead_code)]

use std::f64::consts::PI;

/// Adaptive Simpson on `[a, b]` to absolute tolerance `tol`.
pub fn simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
    simpson_with_noise(f, a, b, tol, 8.0 * f64::EPSILON)
}

/// As [`simpson`], but panels also stop refining once the Richardson
/// correction is below `noise` relative to the panel value (for integrands
/// that are only known to that relative accuracy).
pub fn simpson_with_noise<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64, noise: f64) -> f64 {
    if b <= a {
        return 0.0;
    }
    let (fa, fb) = (f(a), f(b));
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    simpson_rec(f, a, b, fa, fm, fb, whole, tol, noise, 60)
}

#[allow(clippy::too_many_arguments)]
fn simpson_rec<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    noise: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
    let (flm, frm) = (f(lm), f(rm));
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    // The last clause stops refinement once rounding noise dominates.
    if depth == 0 || delta.abs() <= 15.0 * tol || delta.abs() <= noise * (left.abs() + right.abs()) {
        return left + right + delta / 15.0;
    }
    simpson_rec(f, a, m, fa, flm, fm, left, 0.5 * tol, noise, depth - 1)
        + simpson_rec(f, m, b, fm, frm, fb, right, 0.5 * tol, noise, depth - 1)
}

/// `ln int_a^b exp(g)` with the integrand rescaled by its sampled maximum.
pub fn ln_integral<G: Fn(f64) -> f64>(g: &G, a: f64, b: f64, rel_tol: f64) -> f64 {
    let probes = 4001;
    let step = (b - a) / (probes - 1) as f64;
    let values: Vec<f64> = (0..probes).map(|i| g(a + step * i as f64)).collect();
    let shift = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let rough: f64 = values.iter().map(|v| (v - shift).exp()).sum::<f64>() * step;
    let h = |x: f64| (g(x) - shift).exp();
    // sin^k and friends carry relative noise of order k * eps.
    shift + simpson_with_noise(&h, a, b, rel_tol * rough, rel_tol).ln()
}

/// `ln int_a^b sin^k`.
pub fn ln_sin_power(k: f64, a: f64, b: f64, rel_tol: f64) -> f64 {
    ln_integral(&|x: f64| if k == 0.0 { 0.0 } else { k * x.sin().ln() }, a, b, rel_tol)
}

/// Cap fraction on `S^{m-1}` by direct quadrature of the latitude density.
pub fn cap_fraction(m: usize, theta: f64) -> f64 {
    if theta <= 0.0 {
        return 0.0;
    }
    let k = m as f64 - 2.0;
    (ln_sin_power(k, 0.0, theta, 1e-12) - ln_sin_power(k, 0.0, PI, 1e-12)).exp()
}

/// Surface area of the unit `S^{m-1}` by the recursion `A_m = A_{m-1} * int sin^{m-2}`.
pub fn ln_unit_sphere_area(m: usize) -> f64 {
    // A_1 (circle) = 2 pi.
    let mut ln_a = (2.0 * PI).ln();
    for d in 3..=m {
        ln_a += ln_sin_power(d as f64 - 2.0, 0.0, PI, 1e-14);
    }
    ln_a
}

/// Regularised incomplete beta by its power series (needs `x < 1`).
pub fn inc_beta_series(x: f64, a: f64, b: f64) -> f64 {
    // I_x(a,b) = x^a / B(a,b) * sum_n (1-b)_n / n! * x^n / (a + n)
    let mut sum = 0.0;
    let mut coef = 1.0;
    for n in 0..100_000 {
        let term = coef * x.powi(n) / (a + n as f64);
        sum += term;
        if term.abs() < 1e-18 * sum.abs() {
            break;
        }
        coef *= (n as f64 + 1.0 - b) / (n as f64 + 1.0);
    }
    let beta = libm::tgamma(a) * libm::tgamma(b) / libm::tgamma(a + b);
    x.powf(a) / beta * sum
}

/// Fraction of the latitude-`phi` slice within angle `omega` of a point at
/// angle `alpha` from the pole, by quadrature on the slice sphere.
pub fn slice_cover(m: usize, omega: f64, phi: f64, alpha: f64) -> f64 {
    let (sp, sa) = (phi.sin(), alpha.sin());
    let num = omega.cos() - phi.cos() * alpha.cos();
    if sp * sa <= 0.0 {
        return if num <= 0.0 { 1.0 } else { 0.0 };
    }
    let c = num / (sp * sa);
    if c >= 1.0 {
        return 0.0;
    }
    if c <= -1.0 {
        return 1.0;
    }
    if m == 2 {
        return 0.5;
    }
    cap_fraction(m - 1, c.acos())
}

/// `P(Cap(theta) ∩ Cap'(omega))` for poles at angle `alpha`, as a plain
/// double integral over latitude and slice, to relative tolerance `rel_tol`.
pub fn intersection_fraction(m: usize, theta: f64, omega: f64, alpha: f64, rel_tol: f64) -> f64 {
    let k = m as f64 - 2.0;
    let ln_norm = ln_sin_power(k, 0.0, PI, 1e-14);
    let density = |phi: f64| {
        if k == 0.0 {
            1.0 / PI
        } else {
            (k * phi.sin().ln() - ln_norm).exp()
        }
    };
    let f = |phi: f64| density(phi) * slice_cover(m, omega, phi, alpha);
    let mut cuts = vec![0.0, theta];
    for c in [(alpha - omega).abs(), alpha + omega, 2.0 * PI - alpha - omega] {
        if c > 0.0 && c < theta {
            cuts.push(c);
        }
    }
    cuts.sort_by(f64::total_cmp);
    let pass = |tol: f64| -> f64 {
        cuts.windows(2)
            .map(|w| simpson_with_noise(&f, w[0], w[1], tol, 1e-13))
            .sum()
    };
    let rough = pass(1e-3 * cap_fraction(m, theta.min(omega)));
    if rough == 0.0 {
        return 0.0;
    }
    pass(rel_tol * rough)
}

/// Kolmogorov-Smirnov statistic of `samples` against `cdf`.
pub fn ks_statistic<F: Fn(f64) -> f64>(samples: &mut [f64], cdf: F) -> f64 {
    samples.sort_by(f64::total_cmp);
    let n = samples.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &x) in samples.iter().enumerate() {
        let c = cdf(x);
        d = d.max((i as f64 + 1.0) / n - c).max(c - i as f64 / n);
    }
    d
}

/// Asymptotic one-sample KS critical value at the 1% level.
pub fn ks_critical_1pct(n: usize) -> f64 {
    1.627_6 / (n as f64).sqrt()
}

/// Two-sample KS statistic.
pub fn ks_two_sample(a: &mut [f64], b: &mut [f64]) -> f64 {
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j) = (0, 0);
    let mut d: f64 = 0.0;
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    d
}

/// Two-sample KS critical value at the 1% level.
pub fn ks_two_sample_critical_1pct(na: usize, nb: usize) -> f64 {
    let (na, nb) = (na as f64, nb as f64);
    1.627_6 * ((na + nb) / (na * nb)).sqrt()
}
