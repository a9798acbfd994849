//! Gaussian quadrature rules and a log-domain adaptive integrator.

use alloc::vec;
use alloc::vec::Vec;

use libm::{hypot, log, sqrt};

use crate::numeric::{ln_add, ln_sub, log_sum_exp};

/// Nodes and weights of a Gaussian rule on `[-1, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussRule {
    /// Gauss-Legendre rule; weights sum to 2.
    pub fn legendre(n: usize) -> Self {
        let mut rule = GaussRule::jacobi_symmetric(n, 0.0);
        for w in &mut rule.weights {
            *w *= 2.0;
        }
        rule
    }

    /// Gauss rule for the weight `(1 - t^2)^a` on `[-1, 1]`, `a > -1`, with the
    /// weights normalised to sum to one (expectations, not integrals).
    ///
    /// Golub-Welsch: the nodes are the eigenvalues of the Jacobi matrix of the
    /// Gegenbauer recurrence, the weights the squared first eigenvector entries.
    pub fn jacobi_symmetric(n: usize, a: f64) -> Self {
        assert!(n >= 1, "rule needs at least one node");
        assert!(a > -1.0, "weight exponent must exceed -1");
        let mut diag = vec![0.0; n];
        let mut off = vec![0.0; n];
        for k in 1..n {
            let kf = k as f64;
            let beta = if k == 1 {
                1.0 / (3.0 + 2.0 * a)
            } else {
                kf * (kf + 2.0 * a) / ((2.0 * kf + 2.0 * a + 1.0) * (2.0 * kf + 2.0 * a - 1.0))
            };
            off[k - 1] = sqrt(beta);
        }
        let mut first = vec![0.0; n];
        first[0] = 1.0;
        tridiagonal_ql(&mut diag, &mut off, &mut first);

        let mut pairs: Vec<(f64, f64)> = diag.into_iter().zip(first).map(|(x, z)| (x, z * z)).collect();
        pairs.sort_by(|l, r| l.0.total_cmp(&r.0));
        let total: f64 = pairs.iter().map(|p| p.1).sum();
        GaussRule {
            nodes: pairs.iter().map(|p| p.0).collect(),
            weights: pairs.iter().map(|p| p.1 / total).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

/// Implicit QL on a symmetric tridiagonal matrix. `diag` becomes the
/// eigenvalues; `first` (initially `e_1`) becomes the first row of the
/// eigenvector matrix. `off[i]` couples rows `i` and `i + 1`.
fn tridiagonal_ql(diag: &mut [f64], off: &mut [f64], first: &mut [f64]) {
    let n = diag.len();
    if n < 2 {
        return;
    }
    off[n - 1] = 0.0;
    for l in 0..n {
        let mut iterations = 0;
        loop {
            let mut mm = l;
            while mm < n - 1 {
                let dd = diag[mm].abs() + diag[mm + 1].abs();
                if off[mm].abs() <= f64::EPSILON * dd {
                    break;
                }
                mm += 1;
            }
            if mm == l {
                break;
            }
            iterations += 1;
            if iterations > 100 {
                break;
            }
            let mut g = (diag[l + 1] - diag[l]) / (2.0 * off[l]);
            let mut r = hypot(g, 1.0);
            g = diag[mm] - diag[l] + off[l] / (g + if g >= 0.0 { r } else { -r });
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut deflated = false;
            let mut i = mm;
            while i > l {
                i -= 1;
                let f = s * off[i];
                let b = c * off[i];
                r = hypot(f, g);
                off[i + 1] = r;
                if r == 0.0 {
                    diag[i + 1] -= p;
                    off[mm] = 0.0;
                    deflated = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = diag[i + 1] - p;
                r = (diag[i] - g) * s + 2.0 * c * b;
                p = s * r;
                diag[i + 1] = g + p;
                g = c * r - b;
                let z = first[i + 1];
                first[i + 1] = s * first[i] + c * z;
                first[i] = c * first[i] - s * z;
            }
            if deflated {
                continue;
            }
            diag[l] -= p;
            off[l] = g;
            off[mm] = 0.0;
        }
    }
}

const PANEL_ORDER: usize = 20;
const MAX_DEPTH: u32 = 52;
const MAX_PANELS: usize = 200_000;

/// `ln int f` over `[breakpoints[0], breakpoints[last]]`, given `ln f`.
///
/// Each panel between consecutive breakpoints is refined by bisection until
/// the 20-point Gauss-Legendre estimate on the panel agrees with the sum over
/// its halves to `rel_tol` of the (rough) total, apportioned by width.
/// Accumulation is in log space so integrands far below `f64::MIN_POSITIVE`
/// are handled.
pub fn integrate_ln<F: Fn(f64) -> f64>(ln_f: F, breakpoints: &[f64], rel_tol: f64) -> f64 {
    let rule = GaussRule::legendre(PANEL_ORDER);
    integrate_ln_with(&rule, ln_f, breakpoints, rel_tol)
}

pub(crate) fn integrate_ln_with<F: Fn(f64) -> f64>(
    rule: &GaussRule,
    ln_f: F,
    breakpoints: &[f64],
    rel_tol: f64,
) -> f64 {
    if breakpoints.len() < 2 {
        return f64::NEG_INFINITY;
    }
    let panel = |a: f64, b: f64| -> f64 {
        let half = 0.5 * (b - a);
        if half <= 0.0 {
            return f64::NEG_INFINITY;
        }
        let mid = 0.5 * (a + b);
        let mut terms = [0.0; 64];
        let terms = &mut terms[..rule.len()];
        for (t, (x, w)) in terms.iter_mut().zip(rule.nodes.iter().zip(&rule.weights)) {
            *t = log(*w) + ln_f(mid + half * x);
        }
        log(half) + log_sum_exp(terms)
    };

    let width = breakpoints[breakpoints.len() - 1] - breakpoints[0];
    if !(width > 0.0) {
        return f64::NEG_INFINITY;
    }
    let mut stack: Vec<(f64, f64, f64, u32)> = Vec::new();
    let mut rough = f64::NEG_INFINITY;
    for pair in breakpoints.windows(2).rev() {
        let whole = panel(pair[0], pair[1]);
        rough = ln_add(rough, whole);
        stack.push((pair[0], pair[1], whole, 0));
    }
    if rough == f64::NEG_INFINITY {
        return rough;
    }
    let ln_tol = log(rel_tol) + rough;
    let ln_floor = ln_tol + log(1e-3);

    let mut accepted: Vec<f64> = Vec::new();
    let mut visited = 0usize;
    while let Some((a, b, whole, depth)) = stack.pop() {
        visited += 1;
        let mid = 0.5 * (a + b);
        let left = panel(a, mid);
        let right = panel(mid, b);
        let halves = ln_add(left, right);
        let err = if whole >= halves {
            ln_sub(whole, halves)
        } else {
            ln_sub(halves, whole)
        };
        let share = log((b - a) / width);
        if err <= ln_tol + share || err <= ln_floor || depth >= MAX_DEPTH || visited + stack.len() >= MAX_PANELS {
            accepted.push(halves);
        } else {
            stack.push((mid, b, right, depth + 1));
            stack.push((a, mid, left, depth + 1));
        }
    }
    log_sum_exp(&accepted)
}

#[cfg(test)]
mod tests {
    use super::*;
    use core::f64::consts::PI;
    use libm::{exp, sin};

    #[test]
    fn legendre_rule_integrates_polynomials_exactly() {
        let rule = GaussRule::legendre(10);
        let sum: f64 = rule.weights.iter().sum();
        assert!((sum - 2.0).abs() < 1e-14);
        // int x^18 over [-1,1] = 2/19
        let q: f64 = rule
            .nodes
            .iter()
            .zip(&rule.weights)
            .map(|(x, w)| w * libm::pow(*x, 18.0))
            .sum();
        assert!((q - 2.0 / 19.0).abs() < 1e-14);
    }

    #[test]
    fn legendre_nodes_match_two_point_rule() {
        let rule = GaussRule::legendre(2);
        let x = 1.0 / sqrt(3.0);
        assert!((rule.nodes[0] + x).abs() < 1e-15 && (rule.nodes[1] - x).abs() < 1e-15);
        assert!((rule.weights[0] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn chebyshev_case_gives_equal_weights() {
        let n = 16;
        let rule = GaussRule::jacobi_symmetric(n, -0.5);
        for (i, (x, w)) in rule.nodes.iter().zip(&rule.weights).enumerate() {
            let expected = -libm::cos((2 * i + 1) as f64 * PI / (2 * n) as f64);
            assert!((x - expected).abs() < 1e-13, "node {i}");
            assert!((w - 1.0 / n as f64).abs() < 1e-13);
        }
    }

    #[test]
    fn jacobi_rule_reproduces_moments() {
        // E[t^2] under (1 - t^2)^a on [-1, 1] is 1 / (2a + 3).
        for a in [0.5, 2.0, 30.0] {
            let rule = GaussRule::jacobi_symmetric(32, a);
            let m2: f64 = rule.nodes.iter().zip(&rule.weights).map(|(x, w)| w * x * x).sum();
            assert!((m2 - 1.0 / (2.0 * a + 3.0)).abs() < 1e-13, "a = {a}");
        }
    }

    #[test]
    fn adaptive_integral_of_sine_power() {
        // int_0^pi sin^2 = pi/2
        let got = integrate_ln(|x| 2.0 * log(sin(x)), &[0.0, PI], 1e-13);
        assert!((exp(got) - PI / 2.0).abs() < 1e-13);
    }

    #[test]
    fn adaptive_integral_handles_sqrt_endpoint() {
        // int_0^1 sqrt(x) = 2/3
        let got = integrate_ln(|x| 0.5 * log(x), &[0.0, 1.0], 1e-12);
        assert!((exp(got) - 2.0 / 3.0).abs() < 1e-11);
    }

    #[test]
    fn adaptive_integral_underflowing_integrand() {
        // int_0^1 exp(-2000) dx in log space
        let got = integrate_ln(|_| -2000.0, &[0.0, 0.5, 1.0], 1e-12);
        assert!((got + 2000.0).abs() < 1e-12);
    }
}
