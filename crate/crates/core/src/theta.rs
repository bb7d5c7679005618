//! Riemann theta functions with characteristics and their z-derivatives.
//!
//! `θ[α](z) = Σ_n exp(πi ᵗ(n+α′) τ (n+α′) + 2πi ᵗ(n+α′)(z+α″))`, summed over
//! the lattice points of an ellipsoid centred where the terms peak. The value,
//! gradient and Hessian share one enumeration.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::characteristic::Characteristic;
use crate::error::{check_dim, check_tolerance, Result};
use crate::numfmt::sci;
use crate::period_matrix::PeriodMatrix;
use crate::truncation::{tail_bound, truncation_radius};

/// A computed series value with its certified absolute truncation error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThetaValue {
    #[serde(with = "sci")]
    pub re: f64,
    #[serde(with = "sci")]
    pub im: f64,
    #[serde(rename = "err", with = "sci")]
    pub error_bound: f64,
}

impl ThetaValue {
    pub fn new(value: Complex64, error_bound: f64) -> Self {
        Self {
            re: value.re,
            im: value.im,
            error_bound,
        }
    }

    pub fn value(&self) -> Complex64 {
        Complex64::new(self.re, self.im)
    }
}

/// Value, gradient and Hessian of `θ[α]` at one point.
#[derive(Debug, Clone)]
pub struct ThetaJet {
    pub value: Complex64,
    pub grad: DVector<Complex64>,
    pub hess: DMatrix<Complex64>,
    /// Certified truncation error for orders 0, 1 and 2.
    pub error_bounds: [f64; 3],
    pub radius: f64,
    pub points: usize,
}

impl ThetaJet {
    pub fn value(&self) -> ThetaValue {
        ThetaValue::new(self.value, self.error_bounds[0])
    }

    pub fn grad_values(&self) -> Vec<ThetaValue> {
        self.grad
            .iter()
            .map(|&v| ThetaValue::new(v, self.error_bounds[1]))
            .collect()
    }

    pub fn hess_values(&self) -> Vec<Vec<ThetaValue>> {
        let g = self.grad.len();
        (0..g)
            .map(|j| {
                (0..g)
                    .map(|k| ThetaValue::new(self.hess[(j, k)], self.error_bounds[2]))
                    .collect()
            })
            .collect()
    }
}

/// Visits every `n ∈ Zᵍ` with `‖U(n + c)‖ ≤ radius` (`U` upper triangular).
pub(crate) fn for_each_ellipsoid_point(
    upper: &DMatrix<f64>,
    center: &[f64],
    radius: f64,
    mut visit: impl FnMut(&[i64]),
) {
    let g = center.len();
    let mut n = vec![0i64; g];
    let r2 = radius * radius;
    fn recurse(
        i: usize,
        upper: &DMatrix<f64>,
        center: &[f64],
        remaining: f64,
        n: &mut [i64],
        visit: &mut dyn FnMut(&[i64]),
    ) {
        let g = center.len();
        let uii = upper[(i, i)];
        let shift: f64 = ((i + 1)..g)
            .map(|j| upper[(i, j)] * (n[j] as f64 + center[j]))
            .sum::<f64>()
            / uii;
        let mid = -center[i] - shift;
        let half = remaining.max(0.0).sqrt() / uii;
        let lo = (mid - half).ceil() as i64;
        let hi = (mid + half).floor() as i64;
        for k in lo..=hi {
            n[i] = k;
            let comp = uii * (k as f64 - mid);
            let rest = remaining - comp * comp;
            if rest < 0.0 {
                continue;
            }
            if i == 0 {
                visit(n);
            } else {
                recurse(i - 1, upper, center, rest, n, visit);
            }
        }
    }
    recurse(g - 1, upper, center, r2, &mut n, &mut visit);
}

fn imag_part(z: &DVector<Complex64>) -> DVector<f64> {
    z.map(|c| c.im)
}

/// Sums the series (and term-wise derivatives up to `max_order`) over the
/// ellipsoid of the given radius.
pub fn jet_with_radius(
    pm: &PeriodMatrix,
    ch: &Characteristic,
    z: &DVector<Complex64>,
    radius: f64,
    max_order: u32,
) -> Result<ThetaJet> {
    let g = pm.genus();
    check_dim(g, ch.genus())?;
    check_dim(g, z.len())?;
    let top = ch.top_values();
    let bottom = ch.bottom_values();
    let y = imag_part(z);
    let yinv_y = pm.im_inverse() * &y;
    let center: Vec<f64> = (0..g).map(|i| top[i] + yinv_y[i]).collect();
    let shifted: Vec<Complex64> = (0..g).map(|i| z[i] + bottom[i]).collect();
    let tau = pm.tau();

    let mut value = Complex64::new(0.0, 0.0);
    let mut grad = DVector::from_element(g, Complex64::new(0.0, 0.0));
    let mut hess = DMatrix::from_element(g, g, Complex64::new(0.0, 0.0));
    let mut points = 0usize;
    let mut w = vec![0.0; g];
    let two_pi_i = Complex64::new(0.0, 2.0 * PI);
    for_each_ellipsoid_point(pm.cholesky_upper(), &center, radius, |n| {
        points += 1;
        for i in 0..g {
            w[i] = n[i] as f64 + top[i];
        }
        let mut quad = Complex64::new(0.0, 0.0);
        let mut lin = Complex64::new(0.0, 0.0);
        for i in 0..g {
            let mut row = Complex64::new(0.0, 0.0);
            for j in 0..g {
                row += tau[(i, j)] * w[j];
            }
            quad += row * w[i];
            lin += shifted[i] * w[i];
        }
        let term = (Complex64::new(0.0, PI) * quad + two_pi_i * lin).exp();
        value += term;
        if max_order >= 1 {
            for i in 0..g {
                grad[i] += two_pi_i * w[i] * term;
            }
        }
        if max_order >= 2 {
            let factor = two_pi_i * two_pi_i * term;
            for j in 0..g {
                for k in j..g {
                    hess[(j, k)] += factor * (w[j] * w[k]);
                }
            }
        }
    });
    for j in 0..g {
        for k in 0..j {
            hess[(j, k)] = hess[(k, j)];
        }
    }
    let mut error_bounds = [0.0; 3];
    for (order, slot) in error_bounds.iter_mut().enumerate().take(max_order as usize + 1) {
        *slot = tail_bound(pm, &y, order as u32, radius);
    }
    Ok(ThetaJet {
        value,
        grad,
        hess,
        error_bounds,
        radius,
        points,
    })
}

/// Value and derivatives up to `max_order`, each within `eps` of the exact
/// series.
pub fn theta_jet(
    pm: &PeriodMatrix,
    ch: &Characteristic,
    z: &DVector<Complex64>,
    eps: f64,
    max_order: u32,
) -> Result<ThetaJet> {
    check_tolerance(eps)?;
    check_dim(pm.genus(), z.len())?;
    let y = imag_part(z);
    let mut radius: f64 = 0.0;
    for order in 0..=max_order {
        radius = radius.max(truncation_radius(pm, &y, eps, order)?);
    }
    jet_with_radius(pm, ch, z, radius, max_order)
}

pub fn theta(
    pm: &PeriodMatrix,
    ch: &Characteristic,
    z: &DVector<Complex64>,
    eps: f64,
) -> Result<ThetaValue> {
    Ok(theta_jet(pm, ch, z, eps, 0)?.value())
}

/// `∂θ[α]/∂z_j` for every `j`.
pub fn theta_grad(
    pm: &PeriodMatrix,
    ch: &Characteristic,
    z: &DVector<Complex64>,
    eps: f64,
) -> Result<Vec<ThetaValue>> {
    Ok(theta_jet(pm, ch, z, eps, 1)?.grad_values())
}

/// `∂²θ[α]/∂z_j∂z_k`; exactly symmetric.
pub fn theta_hess(
    pm: &PeriodMatrix,
    ch: &Characteristic,
    z: &DVector<Complex64>,
    eps: f64,
) -> Result<Vec<Vec<ThetaValue>>> {
    Ok(theta_jet(pm, ch, z, eps, 2)?.hess_values())
}

/// Riemann theta `θ = θ[0]` value, gradient and Hessian in one pass.
pub fn riemann_jet(pm: &PeriodMatrix, z: &DVector<Complex64>, eps: f64, max_order: u32) -> Result<ThetaJet> {
    theta_jet(pm, &Characteristic::zero(pm.genus()), z, eps, max_order)
}
