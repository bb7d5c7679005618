use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use super::curve::HyperellipticCurve;
use super::lattice::{lattice_reduce, lattice_residual};
use super::quadrature::chebyshev_converged;
use crate::charsys::{characteristic_of_set, IndexSet};
use crate::error::{check_tolerance, Error, Result};
use crate::period_matrix::{symmetry_residual, PeriodMatrix, SYMMETRY_TOLERANCE};

/// Agreement required between the calibration windows.
pub const CALIBRATION_TOLERANCE: f64 = 1e-8;

/// Periods of `x^{j−1} dx / y` and the normalised data derived from them.
///
/// `a_periods[(k, j)] = ∮_{A_k} x^j dx/y` (row = cycle, column = monomial
/// differential); likewise `b_periods`. The normalised differentials are
/// `v_i = Σ_j basis_change[(i, j)] x^j dx/y`, so
/// `a_periods · basis_changeᵀ = I` and `τ = basis_change · b_periodsᵀ`.
#[derive(Debug, Clone)]
pub struct PeriodData {
    pub a_periods: DMatrix<Complex64>,
    pub b_periods: DMatrix<Complex64>,
    pub tau: PeriodMatrix,
    pub basis_change: DMatrix<Complex64>,
    /// Shift with `φ(D) = Σ w·AJ(P) + delta`, base point `W_{2g+2}`; lattice-reduced.
    pub delta: DVector<Complex64>,
    pub eps: f64,
}

impl PeriodData {
    pub fn genus(&self) -> usize {
        self.tau.genus()
    }

    /// Rebuilds the derived fields from `τ`, the A-periods and `delta`.
    pub fn from_parts(
        tau: PeriodMatrix,
        a_periods: DMatrix<Complex64>,
        delta: DVector<Complex64>,
        eps: f64,
    ) -> Result<Self> {
        let g = tau.genus();
        if a_periods.nrows() != g || a_periods.ncols() != g || delta.len() != g {
            return Err(Error::DimensionMismatch {
                expected: g,
                found: a_periods.nrows(),
            });
        }
        let a_mat = a_periods.transpose();
        let basis_change = a_mat
            .clone()
            .try_inverse()
            .ok_or_else(|| Error::NumericFailure("singular A-period matrix".into()))?;
        let b_periods = (a_mat * tau.tau()).transpose();
        Ok(Self {
            a_periods,
            b_periods,
            tau,
            basis_change,
            delta,
            eps,
        })
    }

    /// `max |a_periods · basis_changeᵀ − I|`.
    pub fn normalisation_residual(&self) -> f64 {
        let g = self.genus();
        let prod = &self.a_periods * self.basis_change.transpose();
        (prod - DMatrix::<Complex64>::identity(g, g)).iter().map(|c| c.norm()).fold(0.0, f64::max)
    }
}

/// `∫ x^j dx / y_+` over the real segment `[a_s, a_{s+1}]`, `s = 0, …, 2g`
/// (0-based); even `s` are cuts, odd `s` gaps.
pub(crate) fn segment_integrals(
    curve: &HyperellipticCurve,
    eps: f64,
) -> Result<Vec<DVector<Complex64>>> {
    let a = curve.branch_points();
    let g = curve.genus();
    let mut out = Vec::with_capacity(2 * g + 1);
    for s in 0..=2 * g {
        let (lo, hi) = (a[s], a[s + 1]);
        let mid = 0.5 * (lo + hi);
        let half = 0.5 * (hi - lo);
        let f = |c: f64| -> Vec<f64> {
            let x = mid + half * c;
            let q: f64 = a
                .iter()
                .enumerate()
                .filter(|&(i, _)| i != s && i != s + 1)
                .map(|(_, &ai)| (x - ai).abs())
                .product();
            let w = 1.0 / q.sqrt();
            (0..g).map(|j| w * x.powi(j as i32)).collect()
        };
        let probe = super::quadrature::chebyshev(&f, 64, g);
        let magnitude = probe.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let tol = 0.5 * eps * magnitude.max(1.0);
        let (vals, _) = chebyshev_converged(&f, g, tol)?;
        // y_+ on a cut is i·(−1)^{#cuts to the right}·√|P|, on a gap (−1)^{#cuts to the right}·√|P|
        let cuts_right = (2 * g + 1 - s) / 2;
        let sign = if cuts_right.is_multiple_of(2) { 1.0 } else { -1.0 };
        let phase = if s % 2 == 0 {
            Complex64::new(0.0, sign)
        } else {
            Complex64::new(sign, 0.0)
        };
        out.push(DVector::from_iterator(
            g,
            vals.into_iter().map(|v| Complex64::new(v, 0.0) / phase),
        ));
    }
    Ok(out)
}

/// Periods, normalised basis and the calibrated Riemann-constant shift.
///
/// `A_k` encircles the cut `[a_{2k−1}, a_{2k}]`; `B_k` runs from cut `k` to
/// cut `g+1` on one sheet and back on the other, crossing the gaps `k…g`.
pub fn periods(curve: &HyperellipticCurve, eps: f64) -> Result<PeriodData> {
    check_tolerance(eps)?;
    let g = curve.genus();
    let seg = segment_integrals(curve, eps)?;
    let mut a_mat = DMatrix::<Complex64>::zeros(g, g);
    let mut b_mat = DMatrix::<Complex64>::zeros(g, g);
    for k in 0..g {
        a_mat.set_column(k, &(&seg[2 * k] * Complex64::new(2.0, 0.0)));
        let mut acc = DVector::<Complex64>::zeros(g);
        for gap in k..g {
            acc += &seg[2 * gap + 1];
        }
        b_mat.set_column(k, &(acc * Complex64::new(2.0, 0.0)));
    }
    let c = a_mat
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::NumericFailure("singular A-period matrix".into()))?;
    let mut tau = &c * &b_mat;
    let sym = symmetry_residual(&tau);
    if sym > SYMMETRY_TOLERANCE {
        return Err(Error::NumericFailure(format!(
            "period matrix not symmetric (residual {sym:e})"
        )));
    }
    let im = tau.map(|z| z.im);
    let lam = im.symmetric_eigenvalues();
    if lam.iter().all(|&l| l < 0.0) {
        tau = -tau;
    }
    let pm = PeriodMatrix::new(tau)
        .map_err(|e| Error::NumericFailure(format!("period matrix rejected: {e}")))?;
    let weierstrass = weierstrass_images(&c, &seg);
    let delta = calibrate_delta(&pm, &weierstrass)?;
    Ok(PeriodData {
        a_periods: a_mat.transpose(),
        b_periods: b_mat.transpose(),
        tau: pm,
        basis_change: c,
        delta,
        eps,
    })
}

/// `∫_{W_{2g+2}}^{W_j} v` along the upper bank of the real axis, `j = 1…2g+2`.
fn weierstrass_images(c: &DMatrix<Complex64>, seg: &[DVector<Complex64>]) -> Vec<DVector<Complex64>> {
    let g = c.nrows();
    let mut images = vec![DVector::<Complex64>::zeros(g); 2 * g + 2];
    let mut acc = DVector::<Complex64>::zeros(g);
    for j in (1..=2 * g + 1).rev() {
        acc -= &seg[j - 1];
        images[j - 1] = c * &acc;
    }
    images
}

/// `Δ ≡ τη′ + η″ − Σ_{j∈T} AJ(W_j)` for `η = η_{T∘U}`, agreeing across the
/// windows `T = {i, …, i+g−2}`, `i = 1…g+1`.
fn calibrate_delta(pm: &PeriodMatrix, images: &[DVector<Complex64>]) -> Result<DVector<Complex64>> {
    let g = pm.genus();
    let odd = IndexSet::odd_indices(g);
    let mut candidates = Vec::with_capacity(g + 1);
    for start in 1..=g + 1 {
        let window = IndexSet::new(g, start..start + g - 1)?;
        let target = characteristic_of_set(&window.sym_diff(&odd)?).half_period(pm)?;
        let mut sum = DVector::<Complex64>::zeros(g);
        for &j in window.members() {
            sum += &images[j - 1];
        }
        candidates.push(target - sum);
    }
    let (delta, _, _) = lattice_reduce(pm, &candidates[0]);
    for (i, cand) in candidates.iter().enumerate().skip(1) {
        let r = lattice_residual(pm, &(cand - &delta));
        if r > CALIBRATION_TOLERANCE {
            return Err(Error::NumericFailure(format!(
                "Riemann-constant calibration windows disagree (window {}: {r:e})",
                i + 1
            )));
        }
    }
    Ok(delta)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn agm(mut a: f64, mut b: f64) -> f64 {
        for _ in 0..60 {
            let t = 0.5 * (a + b);
            b = (a * b).sqrt();
            a = t;
        }
        a
    }

    fn elliptic_k(k2: f64) -> f64 {
        PI / (2.0 * agm(1.0, (1.0 - k2).sqrt()))
    }

    fn agm_tau(a: &[f64]) -> Complex64 {
        let k2 = (a[2] - a[1]) * (a[3] - a[0]) / ((a[3] - a[1]) * (a[2] - a[0]));
        Complex64::new(0.0, elliptic_k(k2) / elliptic_k(1.0 - k2))
    }

    #[test]
    fn genus_one_matches_agm() {
        for seed in 0..10 {
            let curve = HyperellipticCurve::random(1, seed).unwrap();
            let pd = periods(&curve, 1e-13).unwrap();
            let tau = pd.tau.tau()[(0, 0)];
            let oracle = agm_tau(curve.branch_points());
            assert!((tau - oracle).norm() <= 1e-10, "seed {seed}: {tau} vs {oracle}");
        }
        let sym = HyperellipticCurve::new(&[-3.0, -1.0, 1.0, 3.0]).unwrap();
        let tau = periods(&sym, 1e-12).unwrap().tau.tau()[(0, 0)];
        assert!(tau.re.abs() <= 1e-9);
    }

    #[test]
    fn normalisation_and_validity() {
        for g in 1..=4 {
            let curve = HyperellipticCurve::random(g, 3 + g as u64).unwrap();
            let pd = periods(&curve, 1e-12).unwrap();
            assert!(pd.normalisation_residual() <= 1e-9);
            assert!(symmetry_residual(pd.tau.tau()) <= 1e-9);
            assert!(pd.tau.lambda_min() > 0.0);
        }
    }

    #[test]
    fn affine_invariance() {
        let curve = HyperellipticCurve::random(3, 21).unwrap();
        let moved: Vec<f64> = curve.branch_points().iter().map(|a| 2.0 * a + 1.0).collect();
        let t1 = periods(&curve, 1e-12).unwrap();
        let t2 = periods(&HyperellipticCurve::new(&moved).unwrap(), 1e-12).unwrap();
        let diff = (t1.tau.tau() - t2.tau.tau()).iter().map(|c| c.norm()).fold(0.0, f64::max);
        assert!(diff <= 1e-9, "{diff:e}");
    }

    #[test]
    fn weierstrass_images_are_half_periods() {
        let curve = HyperellipticCurve::random(2, 8).unwrap();
        let pd = periods(&curve, 1e-12).unwrap();
        let seg = segment_integrals(&curve, 1e-12).unwrap();
        let images = weierstrass_images(&pd.basis_change, &seg);
        for img in &images {
            let doubled = img * Complex64::new(2.0, 0.0);
            assert!(lattice_residual(&pd.tau, &doubled) <= 1e-8);
        }
    }

    #[test]
    fn from_parts_reproduces_derived_fields() {
        let curve = HyperellipticCurve::random(2, 4).unwrap();
        let pd = periods(&curve, 1e-12).unwrap();
        let back =
            PeriodData::from_parts(pd.tau.clone(), pd.a_periods.clone(), pd.delta.clone(), pd.eps)
                .unwrap();
        let db = (&back.b_periods - &pd.b_periods).iter().map(|c| c.norm()).fold(0.0, f64::max);
        assert!(db <= 1e-10);
    }
}
