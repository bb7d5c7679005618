//! Modular-invariant norms `‖θ‖`, `‖J‖`, `‖η‖`.

use nalgebra::DVector;
use num_complex::Complex64;
use std::f64::consts::PI;

use crate::determinants::{eta_det, jacobian_points};
use crate::error::{check_dim, Result};
use crate::period_matrix::PeriodMatrix;
use crate::theta::riemann_jet;

fn im(z: &DVector<Complex64>) -> DVector<f64> {
    z.map(|c| c.im)
}

/// `det(Y)^{1/4} exp(-π ᵗy Y⁻¹ y) |θ(z)|`.
pub fn norm_theta(pm: &PeriodMatrix, z: &DVector<Complex64>, eps: f64) -> Result<f64> {
    check_dim(pm.genus(), z.len())?;
    let value = riemann_jet(pm, z, eps, 0)?.value;
    Ok(theta_prefactor(pm, z) * value.norm())
}

pub(crate) fn theta_prefactor(pm: &PeriodMatrix, z: &DVector<Complex64>) -> f64 {
    pm.det_im().powf(0.25) * (-PI * pm.quad_inverse(&im(z))).exp()
}

/// `det(Y)^{(g+2)/4} exp(-π Σ_k ᵗy_k Y⁻¹ y_k) |J(w_1, …, w_g)|`.
pub fn norm_j(pm: &PeriodMatrix, ws: &[DVector<Complex64>], eps: f64) -> Result<f64> {
    let j = jacobian_points(pm, ws, eps)?;
    Ok(j_prefactor(pm, ws) * j.norm())
}

pub(crate) fn j_prefactor(pm: &PeriodMatrix, ws: &[DVector<Complex64>]) -> f64 {
    let g = pm.genus() as f64;
    let quad: f64 = ws.iter().map(|w| pm.quad_inverse(&im(w))).sum();
    pm.det_im().powf((g + 2.0) / 4.0) * (-PI * quad).exp()
}

/// `det(Y)^{(g+5)/4} exp(-π(g+1) ᵗy Y⁻¹ y) |η(z)|`.
pub fn norm_eta(pm: &PeriodMatrix, z: &DVector<Complex64>, eps: f64) -> Result<f64> {
    let eta = eta_det(pm, z, eps)?;
    Ok(eta_prefactor(pm, z) * eta.norm())
}

pub(crate) fn eta_prefactor(pm: &PeriodMatrix, z: &DVector<Complex64>) -> f64 {
    let g = pm.genus() as f64;
    pm.det_im().powf((g + 5.0) / 4.0) * (-PI * (g + 1.0) * pm.quad_inverse(&im(z))).exp()
}
