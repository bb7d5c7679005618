//! Quadrature rules for period and path integrals.

use std::f64::consts::PI;
use std::sync::OnceLock;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Gauss–Legendre nodes and weights on `[-1, 1]` by Newton iteration on `P_n`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

const PANEL_NODES: usize = 20;

fn panel_rule() -> &'static (Vec<f64>, Vec<f64>) {
    static RULE: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    RULE.get_or_init(|| gauss_legendre(PANEL_NODES))
}

fn panel(f: &dyn Fn(f64) -> Vec<Complex64>, a: f64, b: f64, dim: usize) -> Vec<Complex64> {
    let (nodes, weights) = panel_rule();
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut acc = vec![Complex64::new(0.0, 0.0); dim];
    for (x, w) in nodes.iter().zip(weights) {
        let v = f(mid + half * x);
        for (s, vi) in acc.iter_mut().zip(v) {
            *s += vi * (w * half);
        }
    }
    acc
}

/// Adaptive panel Gauss–Legendre for a vector-valued complex integrand on
/// `[a, b]`: a panel is accepted once splitting it changes its integral by at
/// most its share of `tol`.
pub fn adaptive_gauss_legendre(
    f: &dyn Fn(f64) -> Vec<Complex64>,
    a: f64,
    b: f64,
    dim: usize,
    tol: f64,
) -> Result<Vec<Complex64>> {
    const MAX_DEPTH: u32 = 40;
    let whole = panel(f, a, b, dim);
    let mut out = vec![Complex64::new(0.0, 0.0); dim];
    let mut stack = vec![(a, b, whole, tol, 0u32)];
    while let Some((lo, hi, coarse, t, depth)) = stack.pop() {
        let mid = 0.5 * (lo + hi);
        let left = panel(f, lo, mid, dim);
        let right = panel(f, mid, hi, dim);
        let diff = coarse
            .iter()
            .zip(left.iter().zip(&right))
            .map(|(c, (l, r))| (c - l - r).norm())
            .fold(0.0, f64::max);
        let size = left
            .iter()
            .zip(&right)
            .map(|(l, r)| (l + r).norm())
            .fold(0.0, f64::max);
        // below this the panel difference is rounding noise
        let floor = 64.0 * f64::EPSILON * size;
        if diff <= t.max(floor) {
            for (o, (l, r)) in out.iter_mut().zip(left.iter().zip(&right)) {
                *o += l + r;
            }
        } else if depth >= MAX_DEPTH {
            return Err(Error::Quadrature(format!(
                "adaptive Gauss-Legendre stalled on [{lo}, {hi}] (difference {diff:e})"
            )));
        } else {
            stack.push((lo, mid, left, 0.5 * t, depth + 1));
            stack.push((mid, hi, right, 0.5 * t, depth + 1));
        }
    }
    Ok(out)
}

/// `∫_0^π f(cos t) dt` by the `n`-point midpoint rule (Gauss–Chebyshev).
pub fn chebyshev(f: &dyn Fn(f64) -> Vec<f64>, n: usize, dim: usize) -> Vec<f64> {
    let mut acc = vec![0.0; dim];
    let h = PI / n as f64;
    for k in 0..n {
        let c = ((k as f64 + 0.5) * h).cos();
        for (s, v) in acc.iter_mut().zip(f(c)) {
            *s += v;
        }
    }
    acc.iter_mut().for_each(|s| *s *= h);
    acc
}

/// Doubles the Gauss–Chebyshev node count until successive results agree to
/// `tol`; returns the finer result and its node count.
pub fn chebyshev_converged(
    f: &dyn Fn(f64) -> Vec<f64>,
    dim: usize,
    tol: f64,
) -> Result<(Vec<f64>, usize)> {
    const MAX_NODES: usize = 1 << 22;
    let mut n = 32;
    let mut prev = chebyshev(f, n, dim);
    loop {
        n *= 2;
        let next = chebyshev(f, n, dim);
        let diff = prev
            .iter()
            .zip(&next)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        if diff <= tol {
            return Ok((next, n));
        }
        if n >= MAX_NODES {
            return Err(Error::Quadrature(format!(
                "Gauss-Chebyshev not converged with {n} nodes (difference {diff:e})"
            )));
        }
        prev = next;
    }
}
