//! Small numeric helpers shared by the other modules.

use libm::{exp, expm1, log, log1p};

const PAIRWISE_BLOCK: usize = 8;

/// Pairwise (cascade) summation with a fixed split, so the result depends only
/// on the order of `values`.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    if values.len() <= PAIRWISE_BLOCK {
        return values.iter().fold(0.0, |acc, v| acc + v);
    }
    let mid = values.len() / 2;
    pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
}

/// Pairwise sum of `f(i)` for `i` in `0..n`, without materialising the terms.
pub fn pairwise_sum_by<F: Fn(usize) -> f64>(start: usize, end: usize, f: &F) -> f64 {
    if end - start <= PAIRWISE_BLOCK {
        return (start..end).fold(0.0, |acc, i| acc + f(i));
    }
    let mid = start + (end - start) / 2;
    pairwise_sum_by(start, mid, f) + pairwise_sum_by(mid, end, f)
}

/// `ln(exp(a) + exp(b))`.
pub fn ln_add(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    hi + log1p(exp(lo - hi))
}

/// `ln(sum exp(x_i))`, accumulated left to right against the running maximum.
pub fn log_sum_exp(values: &[f64]) -> f64 {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY || !max.is_finite() {
        return max;
    }
    let shifted = values.iter().fold(0.0, |acc, v| acc + exp(v - max));
    max + log(shifted)
}

/// `ln(1 - exp(x))` for `x <= 0`, accurate across the whole range.
pub fn ln1mexp(x: f64) -> f64 {
    if x > 0.0 {
        return f64::NAN;
    }
    if x == 0.0 {
        return f64::NEG_INFINITY;
    }
    if x > -core::f64::consts::LN_2 {
        log(-expm1(x))
    } else {
        log1p(-exp(x))
    }
}

/// `ln(exp(a) - exp(b))` for `a >= b`; returns `-inf` when they are equal.
pub fn ln_sub(a: f64, b: f64) -> f64 {
    if b == f64::NEG_INFINITY {
        return a;
    }
    if b >= a {
        return f64::NEG_INFINITY;
    }
    a + ln1mexp(b - a)
}
