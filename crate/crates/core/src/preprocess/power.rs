//! Yeo-Johnson power transform with maximum-likelihood fitting of λ.

use alloc::format;
#[allow(unused_imports)]
use num_traits::Float as _;

use crate::error::{Error, Result};

pub const LAMBDA_MIN: f64 = -5.0;
pub const LAMBDA_MAX: f64 = 5.0;
const GRID_STEP: f64 = 0.25;
const TOLERANCE: f64 = 1e-4;

/// Yeo-Johnson transform of a single value.
pub fn apply_yeo_johnson(x: f64, lambda: f64) -> f64 {
    if x >= 0.0 {
        if lambda == 0.0 {
            x.ln_1p()
        } else {
            (lambda * x.ln_1p()).exp_m1() / lambda
        }
    } else {
        let mu = 2.0 - lambda;
        if mu == 0.0 {
            -(-x).ln_1p()
        } else {
            -(mu * (-x).ln_1p()).exp_m1() / mu
        }
    }
}

/// Profile log-likelihood of λ under a normal model for the transformed
/// values, with the variance at its maximum-likelihood estimate.
pub fn log_likelihood(xs: &[f64], lambda: f64) -> f64 {
    let n = xs.len() as f64;
    let mut sum = 0.0;
    let mut sum_sq = 0.0;
    let mut jacobian = 0.0;
    for &x in xs {
        let y = apply_yeo_johnson(x, lambda);
        sum += y;
        jacobian += x.signum() * x.abs().ln_1p();
    }
    let mean = sum / n;
    for &x in xs {
        let d = apply_yeo_johnson(x, lambda) - mean;
        sum_sq += d * d;
    }
    let var = sum_sq / n;
    if !(var > 0.0) || !var.is_finite() {
        return f64::NEG_INFINITY;
    }
    -0.5 * n * var.ln() + (lambda - 1.0) * jacobian
}

/// Maximum-likelihood λ on `[-5, 5]`.
///
/// A coarse scan brackets the best grid cell, then golden-section search
/// refines it to a bracket width of 1e-4.
pub fn fit_yeo_johnson(xs: &[f64]) -> Result<f64> {
    let first = xs.iter().copied().find(|x| x.is_finite());
    let distinct = match first {
        Some(f) => xs.iter().any(|&x| x != f),
        None => false,
    };
    if !distinct || xs.iter().any(|x| !x.is_finite()) {
        return Err(Error::DegenerateColumn(format!("{} values", xs.len())));
    }

    let steps = ((LAMBDA_MAX - LAMBDA_MIN) / GRID_STEP).round() as usize;
    let mut best = (LAMBDA_MIN, f64::NEG_INFINITY);
    for s in 0..=steps {
        let lambda = LAMBDA_MIN + s as f64 * GRID_STEP;
        let ll = log_likelihood(xs, lambda);
        if ll > best.1 {
            best = (lambda, ll);
        }
    }
    if best.1 == f64::NEG_INFINITY {
        return Err(Error::DegenerateColumn(format!("{} values", xs.len())));
    }

    let mut lo = (best.0 - GRID_STEP).max(LAMBDA_MIN);
    let mut hi = (best.0 + GRID_STEP).min(LAMBDA_MAX);
    let ratio = 0.5 * (5f64.sqrt() - 1.0);
    let mut a = hi - ratio * (hi - lo);
    let mut b = lo + ratio * (hi - lo);
    let mut fa = log_likelihood(xs, a);
    let mut fb = log_likelihood(xs, b);
    while hi - lo > TOLERANCE {
        if fa >= fb {
            hi = b;
            b = a;
            fb = fa;
            a = hi - ratio * (hi - lo);
            fa = log_likelihood(xs, a);
        } else {
            lo = a;
            a = b;
            fa = fb;
            b = lo + ratio * (hi - lo);
            fb = log_likelihood(xs, b);
        }
    }
    let refined = 0.5 * (lo + hi);
    // the bracket can only improve on the grid point
    if log_likelihood(xs, refined) >= best.1 {
        Ok(refined)
    } else {
        Ok(best.0)
    }
}
