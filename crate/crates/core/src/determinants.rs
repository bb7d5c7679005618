//! Determinant forms built from theta derivatives: `J` on points, `J` on
//! odd characteristics (Jacobian nullwerte) and the bordered Hessian `η`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::characteristic::Characteristic;
use crate::error::{check_dim, Error, Result};
use crate::period_matrix::PeriodMatrix;
use crate::theta::{riemann_jet, theta_jet};

/// Determinant by LU with partial pivoting on a copy.
pub fn det(m: &DMatrix<Complex64>) -> Complex64 {
    m.clone().lu().determinant()
}

fn check_vectors(g: usize, ws: &[DVector<Complex64>]) -> Result<()> {
    check_dim(g, ws.len())?;
    ws.iter().try_for_each(|w| check_dim(g, w.len()))
}

/// Matrix with entry `(j, k) = θ_j(w_k)`.
pub fn gradient_matrix(pm: &PeriodMatrix, ws: &[DVector<Complex64>], eps: f64) -> Result<DMatrix<Complex64>> {
    let g = pm.genus();
    check_vectors(g, ws)?;
    let mut m = DMatrix::from_element(g, g, Complex64::new(0.0, 0.0));
    for (k, w) in ws.iter().enumerate() {
        let jet = riemann_jet(pm, w, eps, 1)?;
        m.set_column(k, &jet.grad);
    }
    Ok(m)
}

/// Determinant that is exactly alternating under column permutations: the
/// columns are put into a canonical order before factorising and the sign of
/// that reordering is applied afterwards.
pub fn alternating_det(m: &DMatrix<Complex64>) -> Complex64 {
    let n = m.ncols();
    let mut order: Vec<usize> = (0..n).collect();
    let key = |c: usize| -> Vec<(f64, f64)> { m.column(c).iter().map(|z| (z.re, z.im)).collect() };
    order.sort_by(|&a, &b| {
        key(a)
            .iter()
            .zip(key(b).iter())
            .map(|(x, y)| x.0.total_cmp(&y.0).then(x.1.total_cmp(&y.1)))
            .find(|o| o.is_ne())
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let sorted = DMatrix::from_fn(m.nrows(), n, |i, j| m[(i, order[j])]);
    // parity of the sorting permutation via cycle count
    let mut seen = vec![false; n];
    let mut transpositions = 0;
    for start in 0..n {
        let mut len = 0;
        let mut i = start;
        while !seen[i] {
            seen[i] = true;
            i = order[i];
            len += 1;
        }
        if len > 0 {
            transpositions += len - 1;
        }
    }
    let d = det(&sorted);
    if transpositions % 2 == 0 {
        d
    } else {
        -d
    }
}

/// `J(w_1, …, w_g) = det(θ_j(w_k))`.
pub fn jacobian_points(pm: &PeriodMatrix, ws: &[DVector<Complex64>], eps: f64) -> Result<Complex64> {
    Ok(alternating_det(&gradient_matrix(pm, ws, eps)?))
}

/// `det(∂θ[α_k]/∂z_j (0))` for the given (not necessarily canonical)
/// characteristics.
pub fn jacobian_nullwerte(pm: &PeriodMatrix, chars: &[Characteristic], eps: f64) -> Result<Complex64> {
    let g = pm.genus();
    check_dim(g, chars.len())?;
    let zero = DVector::from_element(g, Complex64::new(0.0, 0.0));
    let mut m = DMatrix::from_element(g, g, Complex64::new(0.0, 0.0));
    for (k, ch) in chars.iter().enumerate() {
        let jet = theta_jet(pm, ch, &zero, eps, 1)?;
        m.set_column(k, &jet.grad);
    }
    Ok(alternating_det(&m))
}

/// Bordered matrix `[[θ_jk, θ_j], [θ_k, 0]]` at `z`.
pub fn bordered_hessian(pm: &PeriodMatrix, z: &DVector<Complex64>, eps: f64) -> Result<DMatrix<Complex64>> {
    let g = pm.genus();
    check_dim(g, z.len())?;
    let jet = riemann_jet(pm, z, eps, 2)?;
    let mut m = DMatrix::from_element(g + 1, g + 1, Complex64::new(0.0, 0.0));
    m.view_mut((0, 0), (g, g)).copy_from(&jet.hess);
    for j in 0..g {
        m[(j, g)] = jet.grad[j];
        m[(g, j)] = jet.grad[j];
    }
    Ok(m)
}

/// `η(z) = det [[θ_jk(z), θ_j(z)], [θ_k(z), 0]]`.
pub fn eta_det(pm: &PeriodMatrix, z: &DVector<Complex64>, eps: f64) -> Result<Complex64> {
    let m = bordered_hessian(pm, z, eps)?;
    let d = det(&m);
    if !(d.re.is_finite() && d.im.is_finite()) {
        return Err(Error::NumericFailure("η determinant is not finite".into()));
    }
    Ok(d)
}
