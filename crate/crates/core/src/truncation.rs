//! Certified truncation radii for the theta series.
//!
//! Write a lattice term as `exp(-π‖v‖²)` with `v = U(n + c)`, `Y = UᵀU`.
//! Distinct lattice points satisfy `‖v − v′‖ ≥ √λ_min`, so balls of radius
//! `r = √λ_min / 2` around them are disjoint. Jensen's inequality on each ball
//! gives `exp(-π‖v‖²) ≤ exp(π g r² / (g+2)) · avg_ball exp(-π‖w‖²)`, and the
//! tail beyond radius `R` is bounded by a one-dimensional Gaussian moment
//! integral over `‖w‖ ≥ R − r`, evaluated in closed form through `erfc`.

use nalgebra::DVector;
use libm::erfc;
use std::f64::consts::PI;

use crate::error::{check_dim, check_tolerance, Result};
use crate::period_matrix::PeriodMatrix;

/// Radii are returned on this grid, which makes the search exact and
/// `truncation_radius` monotone in `eps`.
const RADIUS_STEP: f64 = 1.0 / 1024.0;

/// Upper bound on the absolute tail of the `order`-th derivative series
/// beyond ellipsoid radius `radius`.
pub fn tail_bound(pm: &PeriodMatrix, y_shift: &DVector<f64>, order: u32, radius: f64) -> f64 {
    let g = pm.genus();
    let scale_exp = PI * pm.quad_inverse(y_shift);
    let kappa = (pm.im_inverse() * y_shift).norm();
    unscaled_tail(g, pm.lambda_min(), kappa, order, radius) * scale_exp.exp()
}

fn unscaled_tail(g: usize, lambda_min: f64, kappa: f64, order: u32, radius: f64) -> f64 {
    let gf = g as f64;
    let sqrt_lambda = lambda_min.sqrt();
    let r = 0.5 * sqrt_lambda;
    let a = (radius - r).max(0.0);
    // polynomial (2π)^d (t p + q)^d · t^{g-1} with p = 1/√λ, q = r/√λ + κ
    let p = 1.0 / sqrt_lambda;
    let q = r / sqrt_lambda + kappa;
    let d = order as usize;
    let moments = gaussian_moments(a, g - 1 + d);
    let mut integral = 0.0;
    for k in 0..=d {
        let coeff = binomial(d, k) * p.powi(k as i32) * q.powi((d - k) as i32);
        integral += coeff * moments[g - 1 + k];
    }
    let prefactor = (PI * gf * r * r / (gf + 2.0)).exp() * gf / r.powi(g as i32);
    (2.0 * PI).powi(order as i32) * prefactor * integral
}

/// `I_m = ∫_a^∞ t^m exp(-π t²) dt` for `m = 0..=max_m`, `a ≥ 0`.
fn gaussian_moments(a: f64, max_m: usize) -> Vec<f64> {
    let e = (-PI * a * a).exp();
    let mut out = vec![0.0; max_m + 1];
    out[0] = 0.5 * erfc(PI.sqrt() * a);
    if max_m >= 1 {
        out[1] = e / (2.0 * PI);
    }
    for m in 2..=max_m {
        out[m] = (a.powi((m - 1) as i32) * e + (m - 1) as f64 * out[m - 2]) / (2.0 * PI);
    }
    out
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Smallest radius (on a fixed grid) whose certified tail bound for the
/// `order`-th derivative is at most `eps`.
pub fn truncation_radius(
    pm: &PeriodMatrix,
    y_shift: &DVector<f64>,
    eps: f64,
    order: u32,
) -> Result<f64> {
    check_tolerance(eps)?;
    check_dim(pm.genus(), y_shift.len())?;
    let ok = |k: u64| tail_bound(pm, y_shift, order, k as f64 * RADIUS_STEP) <= eps;
    let mut hi: u64 = 1024;
    while !ok(hi) {
        hi *= 2;
    }
    let mut lo: u64 = 0;
    if ok(lo) {
        return Ok(0.0);
    }
    // invariant: !ok(lo), ok(hi)
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if ok(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi as f64 * RADIUS_STEP)
}
