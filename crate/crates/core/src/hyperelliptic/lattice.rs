use std::f64::consts::PI;

use nalgebra::DVector;
use num_complex::Complex64;

use crate::characteristic::Characteristic;
use crate::period_matrix::PeriodMatrix;

/// Splits `z = z_0 + τm + n` with `Y⁻¹ Im z_0` and `Re z_0` rounded into
/// `[-1/2, 1/2]` componentwise (the real part only up to the `Re τ` shear).
pub fn lattice_reduce(
    pm: &PeriodMatrix,
    z: &DVector<Complex64>,
) -> (DVector<Complex64>, Vec<i64>, Vec<i64>) {
    let g = pm.genus();
    let im = DVector::from_iterator(g, z.iter().map(|c| c.im));
    let p = pm.im_inverse() * im;
    let m: Vec<i64> = p.iter().map(|v| v.round() as i64).collect();
    let mf = DVector::from_iterator(g, m.iter().map(|&v| Complex64::new(v as f64, 0.0)));
    let shifted = z - pm.tau() * mf;
    let n: Vec<i64> = shifted.iter().map(|c| c.re.round() as i64).collect();
    let z0 = DVector::from_iterator(
        g,
        shifted.iter().zip(&n).map(|(c, &k)| c - k as f64),
    );
    (z0, m, n)
}

/// Real coordinates `(p, q)` with `z = τp + q`.
pub fn lattice_coordinates(pm: &PeriodMatrix, z: &DVector<Complex64>) -> (DVector<f64>, DVector<f64>) {
    let g = pm.genus();
    let im = DVector::from_iterator(g, z.iter().map(|c| c.im));
    let p = pm.im_inverse() * im;
    let re_tau = pm.tau().map(|c| c.re);
    let q = DVector::from_iterator(g, z.iter().map(|c| c.re)) - re_tau * &p;
    (p, q)
}

/// Distance of `z` from `Z^g + τZ^g` in lattice coordinates (sup norm).
pub fn lattice_residual(pm: &PeriodMatrix, z: &DVector<Complex64>) -> f64 {
    let (p, q) = lattice_coordinates(pm, z);
    p.iter()
        .chain(q.iter())
        .map(|v| (v - v.round()).abs())
        .fold(0.0, f64::max)
}

/// `θ[α](z_0 + τm + n) = factor · θ[α](z_0)`.
pub fn quasi_periodicity_factor(
    pm: &PeriodMatrix,
    ch: &Characteristic,
    z0: &DVector<Complex64>,
    m: &[i64],
    n: &[i64],
) -> Complex64 {
    let g = pm.genus();
    let mf = DVector::from_iterator(g, m.iter().map(|&v| Complex64::new(v as f64, 0.0)));
    let mtm = (mf.transpose() * pm.tau() * &mf)[(0, 0)];
    let mz: Complex64 = mf.iter().zip(z0.iter()).map(|(a, b)| a * b).sum();
    let top = ch.top_values();
    let bottom = ch.bottom_values();
    let phase: f64 = (0..g)
        .map(|i| top[i] * n[i] as f64 - bottom[i] * m[i] as f64)
        .sum();
    let i = Complex64::new(0.0, 1.0);
    (i * PI * (2.0 * phase) - i * PI * mtm - i * (2.0 * PI) * mz).exp()
}
