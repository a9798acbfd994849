use std::f64::consts::{FRAC_PI_2, PI};

use isocap::config::{ConcentrationConfig, Theorem1Config};
use isocap::descriptor::SetDescriptor;
use isocap::experiments::theorem1::Theorem1Setup;
use isocap::experiments::{concentration, theorem1};

#[path = "../../core/tests/support/oracle.rs"]
mod oracle;

fn config(m: usize, set: &str, n_outer: u64, n_inner: u64) -> Theorem1Config {
    Theorem1Config {
        m,
        radius: 1.0,
        set: SetDescriptor::parse(set).unwrap(),
        omega: 0.9,
        eps: 0.1,
        n_outer,
        n_inner,
        samples: 100_000,
        seed: 21,
    }
}

fn ln_unit_area(m: usize) -> f64 {
    oracle::ln_unit_sphere_area(m)
}

#[test]
fn band_inner_estimates_match_the_exact_overlap() {
    let m = 16;
    let kappa = 1.0;
    let cfg = config(
        m,
        r#"{"shape":"band","pole_axis":0,"theta1":0.9,"theta2":1.5}"#,
        100,
        20_000,
    );
    let setup = Theorem1Setup::new(&cfg).unwrap();
    assert_eq!(setup.inner_estimator(), "conditional");
    let mut checked = 0;
    for i in 0..25 {
        let y = setup.outer_sample(cfg.seed, i, cfg.n_inner).unwrap();
        let exact_frac = oracle::intersection_fraction(m, 1.5, kappa, y.alpha, 1e-9)
            - oracle::intersection_fraction(m, 0.9, kappa, y.alpha, 1e-9);
        if exact_frac <= 1e-14 {
            assert_eq!(y.ln_estimate, f64::NEG_INFINITY, "alpha {}", y.alpha);
            continue;
        }
        let exact = exact_frac.ln() + ln_unit_area(m);
        let ratio = (y.ln_estimate - exact).exp();
        assert!(
            (ratio - 1.0).abs() <= 4.0 * y.inner_rel_std_error + 1e-6,
            "y {i} alpha {}: ratio {ratio}, rel se {}",
            y.alpha,
            y.inner_rel_std_error
        );
        checked += 1;
    }
    assert!(checked >= 15);
}

#[test]
fn union_inner_estimates_match_the_exact_overlap() {
    let m = 12;
    let kappa = 1.0;
    let theta = 0.8;
    let cfg = config(
        m,
        r#"[{"shape":"cap","pole_axis":0,"theta":0.8},{"shape":"cap","pole_axis":0,"negative":true,"theta":0.8}]"#,
        100,
        20_000,
    );
    let setup = Theorem1Setup::new(&cfg).unwrap();
    for i in 0..15 {
        let y = setup.outer_sample(cfg.seed, i, cfg.n_inner).unwrap();
        let exact_frac = oracle::intersection_fraction(m, theta, kappa, y.alpha, 1e-9)
            + oracle::intersection_fraction(m, theta, kappa, PI - y.alpha, 1e-9);
        if exact_frac <= 1e-14 {
            continue;
        }
        let ratio = (y.ln_estimate - exact_frac.ln() - ln_unit_area(m)).exp();
        assert!(
            (ratio - 1.0).abs() <= 4.0 * y.inner_rel_std_error + 1e-6,
            "y {i}: {ratio}"
        );
    }
}

#[test]
fn cap_success_rate_matches_the_critical_angle() {
    // For a cap the estimate is a decreasing function of alpha, so success
    // means alpha < alpha*, where mu(Cap(theta) ∩ Cap(alpha*, omega + eps))
    // = (1 - eps) V; its probability is the cap fraction at alpha*.
    let m = 16;
    let (theta, omega, eps) = (1.2, 0.9, 0.1);
    let v = oracle::intersection_fraction(m, theta, omega, FRAC_PI_2, 1e-10);
    let critical = |level: f64| {
        let (mut lo, mut hi) = (0.0, PI);
        // The angle only needs to be far more accurate than the binomial error.
        for _ in 0..30 {
            let mid = 0.5 * (lo + hi);
            if oracle::intersection_fraction(m, theta, omega + eps, mid, 1e-7) > level {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    };

    let report = theorem1::run(&config(m, r#"{"shape":"cap","pole_axis":3,"theta":1.2}"#, 4000, 5000)).unwrap();
    let n = report.config.n_outer as f64;
    let within_ci = |count: usize, p: f64| {
        let rate = count as f64 / n;
        let se = (p * (1.0 - p) / n).sqrt();
        assert!((rate - p).abs() <= 4.0 * se, "rate {rate}, expected {p} +- {se}");
    };

    let p = oracle::cap_fraction(m, critical((1.0 - eps) * v));
    within_ci(report.successes as usize, p);

    // At the level V itself the critical angle is pi/2 + eps' for some
    // eps' > 0, and the rate is bounded below by the concentration
    // probability of the band [pi/2 - eps', pi/2 + eps'].
    let alpha_v = critical(v);
    let eps_prime = alpha_v - FRAC_PI_2;
    assert!(eps_prime > 0.0);
    let ln_v = v.ln() + ln_unit_area(m);
    let above_v = report.per_y.iter().filter(|y| y.ln_estimate >= ln_v).count();
    let p_v = oracle::cap_fraction(m, alpha_v);
    within_ci(above_v, p_v);
    assert!(p_v >= 1.0 - 2.0 * oracle::cap_fraction(m, FRAC_PI_2 - eps_prime));
}

#[test]
fn complement_of_cap_matches_the_cap_in_distribution() {
    let m = 32;
    let cap = theorem1::run(&config(m, r#"{"shape":"cap","pole_axis":0,"theta":1.2}"#, 1500, 2000)).unwrap();
    let comp = theorem1::run(&config(
        m,
        &format!(
            r#"{{"complement":{{"shape":"cap","pole_axis":1,"theta":{}}}}}"#,
            PI - 1.2
        ),
        1500,
        2000,
    ))
    .unwrap();
    assert!((cap.setup.effective_angle - comp.setup.effective_angle).abs() < 1e-9);
    let mut a: Vec<f64> = cap.per_y.iter().map(|p| p.ln_estimate).collect();
    let mut b: Vec<f64> = comp.per_y.iter().map(|p| p.ln_estimate).collect();
    let d = oracle::ks_two_sample(&mut a, &mut b);
    assert!(d < oracle::ks_two_sample_critical_1pct(a.len(), b.len()), "KS {d}");
}

#[test]
fn total_mass_at_small_dimension() {
    for set in [
        r#"{"shape":"cap","pole_axis":0,"theta":1.0}"#,
        r#"{"shape":"band","pole_axis":0,"theta1":0.7,"theta2":1.6}"#,
        r#"[{"shape":"cap","pole_axis":0,"theta":0.7},{"shape":"cap","pole_axis":1,"theta":0.7}]"#,
    ] {
        let r = theorem1::run(&config(6, set, 2000, 1000)).unwrap();
        assert!(
            r.total_mass_ok,
            "{set}: ratio {} +- {}",
            r.total_mass_ratio, r.total_mass_std_error
        );
    }
}

#[test]
fn concentration_matches_quadrature_and_grows_with_m() {
    let ms = vec![3, 8, 64, 512];
    let r = concentration::run(&ConcentrationConfig {
        ms: ms.clone(),
        radius: 1.0,
        eps: 0.1,
        samples: 0,
        seed: 0,
    })
    .unwrap();
    assert!(r.monotone_in_m);
    for (row, &m) in r.rows.iter().zip(&ms) {
        let expected = 1.0 - 2.0 * oracle::cap_fraction(m, FRAC_PI_2 - 0.1);
        assert!(
            (row.exact - expected).abs() <= 1e-10,
            "m {m}: {} vs {expected}",
            row.exact
        );
    }
}
