use std::f64::consts::PI;

use nalgebra::DVector;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::report::{rel_residual, IdentityId, IdentityReport, InputsDigest, LogValue, Variant};
use crate::characteristic::Characteristic;
use crate::charsys::{fundamental_system, Permutation};
use crate::determinants::{eta_det, jacobian_nullwerte, jacobian_points};
use crate::error::{check_tolerance, Error, Result};
use crate::hyperelliptic::{
    abel_jacobi, lattice_reduce, HyperellipticCurve, PeriodData, SurfacePoint,
};
use crate::norms::{norm_eta, norm_j, norm_theta};
use crate::period_matrix::PeriodMatrix;
use crate::theta::theta;

/// Relative size of the generic-position threshold.
pub const GENERIC_FACTOR: f64 = 1e-6;
/// Sample count behind the generic-position scale.
pub const GENERIC_SAMPLES: usize = 100;
/// Largest `|Im(lhs/rhs)|` accepted when reading off a sign.
pub const SIGN_IMAG_TOLERANCE: f64 = 1e-4;

/// Median of `‖θ‖` over random points of the fundamental domain.
pub fn theta_scale(pm: &PeriodMatrix, eps: f64) -> Result<f64> {
    let g = pm.genus();
    let mut rng = ChaCha8Rng::seed_from_u64(0x7e7a);
    let mut values = Vec::with_capacity(GENERIC_SAMPLES);
    for _ in 0..GENERIC_SAMPLES {
        let p = DVector::from_fn(g, |_, _| Complex64::new(rng.gen_range(-0.5..0.5), 0.0));
        let q = DVector::from_fn(g, |_, _| Complex64::new(rng.gen_range(-0.5..0.5), 0.0));
        let z = pm.tau() * p + q;
        values.push(norm_theta(pm, &z, eps)?);
    }
    values.sort_by(f64::total_cmp);
    Ok(0.5 * (values[GENERIC_SAMPLES / 2 - 1] + values[GENERIC_SAMPLES / 2]))
}

/// Curve, periods and generic-position threshold shared by the checks on
/// one surface.
#[derive(Debug, Clone)]
pub struct VerifyContext {
    pub curve: HyperellipticCurve,
    pub pd: PeriodData,
    pub eps: f64,
    /// `θ` arguments with `‖θ‖` below this are treated as zeros.
    pub delta_gen: f64,
    curve_hash: String,
}

/// Images of `p_1, …, p_g, q` in the Jacobian, with `φ` applied lazily.
struct Images {
    p: Vec<DVector<Complex64>>,
    q: DVector<Complex64>,
    delta: DVector<Complex64>,
}

impl Images {
    /// `Δ + Σ c_j u(p_j) + c_q u(q)`.
    fn class(&self, coeffs: &[(usize, f64)], q_coeff: f64) -> DVector<Complex64> {
        let mut z = self.delta.clone();
        for &(j, c) in coeffs {
            z += &self.p[j] * Complex64::new(c, 0.0);
        }
        if q_coeff != 0.0 {
            z += &self.q * Complex64::new(q_coeff, 0.0);
        }
        z
    }

    fn genus(&self) -> usize {
        self.p.len()
    }

    /// `D = Σ p_j − q`.
    fn d(&self) -> DVector<Complex64> {
        let all: Vec<(usize, f64)> = (0..self.genus()).map(|j| (j, 1.0)).collect();
        self.class(&all, -1.0)
    }

    /// `D_k + extra` where `D_k = Σ p_j − p_k`.
    fn d_k(&self, k: usize, extra: &[(usize, f64)], q_coeff: f64) -> DVector<Complex64> {
        let mut coeffs: Vec<(usize, f64)> = (0..self.genus()).map(|j| (j, 1.0)).collect();
        coeffs[k].1 -= 1.0;
        for &(j, c) in extra {
            coeffs[j].1 += c;
        }
        self.class(&coeffs, q_coeff)
    }

    /// `m·p_j + extra`.
    fn multiple(&self, j: usize, m: f64, extra: &[(usize, f64)], q_coeff: f64) -> DVector<Complex64> {
        let mut coeffs = vec![(j, m)];
        coeffs.extend_from_slice(extra);
        self.class(&coeffs, q_coeff)
    }
}

fn point_label(p: &SurfacePoint) -> String {
    format!("{}@{}", crate::numfmt::fmt_c64(p.x), if p.sheet > 0 { "+" } else { "-" })
}

impl VerifyContext {
    pub fn new(curve: HyperellipticCurve, pd: PeriodData, eps: f64) -> Result<Self> {
        check_tolerance(eps)?;
        let delta_gen = GENERIC_FACTOR * theta_scale(&pd.tau, eps)?;
        let curve_hash = curve.hash();
        Ok(Self {
            curve,
            pd,
            eps,
            delta_gen,
            curve_hash,
        })
    }

    pub fn genus(&self) -> usize {
        self.curve.genus()
    }

    fn pm(&self) -> &PeriodMatrix {
        &self.pd.tau
    }

    fn digest(&self, ps: &[SurfacePoint], q: &SurfacePoint, seed: Option<u64>) -> InputsDigest {
        InputsDigest {
            curve_hash: Some(self.curve_hash.clone()),
            seed,
            points: ps.iter().chain(std::iter::once(q)).map(point_label).collect(),
            eps: self.eps,
            ..Default::default()
        }
    }

    /// Lattice-reduced images `u(P) = ∫_{W_{2g+2}}^{P} v`, one lift per point.
    fn images(&self, ps: &[SurfacePoint], q: &SurfacePoint) -> Result<Images> {
        let g = self.genus();
        if ps.len() != g {
            return Err(Error::DimensionMismatch {
                expected: g,
                found: ps.len(),
            });
        }
        let eps = 0.1 * self.eps;
        let reduce = |p: &SurfacePoint| -> Result<DVector<Complex64>> {
            let v = abel_jacobi(&self.curve, &self.pd, p, 2 * g + 2, eps.max(1e-13))?;
            Ok(lattice_reduce(self.pm(), &v).0)
        };
        Ok(Images {
            p: ps.iter().map(reduce).collect::<Result<_>>()?,
            q: reduce(q)?,
            delta: self.pd.delta.clone(),
        })
    }

    fn require_generic(&self, what: &str, z: &DVector<Complex64>) -> Result<()> {
        let n = norm_theta(self.pm(), z, self.eps)?;
        if n < self.delta_gen {
            return Err(Error::GenericPosition(format!(
                "‖θ‖({what}) = {n:.3e} below threshold {:.3e}",
                self.delta_gen
            )));
        }
        Ok(())
    }

    fn theta0(&self, z: &DVector<Complex64>) -> Result<Complex64> {
        Ok(theta(self.pm(), &Characteristic::zero(self.genus()), z, self.eps)?.value())
    }

    fn check_denominators(&self, variant: Option<Variant>, im: &Images) -> Result<()> {
        let g = self.genus();
        self.require_generic("D", &im.d())?;
        let pairs = (0..g).flat_map(|j| (0..g).filter(move |&k| k != j).map(move |k| (j, k)));
        for (j, k) in pairs {
            match variant {
                Some(Variant::I) => {
                    self.require_generic("D_j+p_k-p_j", &im.d_k(j, &[(k, 1.0), (j, -1.0)], 0.0))?
                }
                Some(Variant::Ii) => {
                    self.require_generic("g p_j-p_k", &im.multiple(j, g as f64, &[(k, -1.0)], 0.0))?
                }
                Some(Variant::Iii) => {}
                None => {
                    self.require_generic("D_j+p_k-p_j", &im.d_k(j, &[(k, 1.0), (j, -1.0)], 0.0))?;
                    self.require_generic("g p_j-p_k", &im.multiple(j, g as f64, &[(k, -1.0)], 0.0))?;
                }
            }
        }
        if variant == Some(Variant::Iii) {
            for k in 0..g.saturating_sub(1) {
                self.require_generic("g p_k-q", &im.multiple(k, g as f64, &[], -1.0))?;
            }
        }
        Ok(())
    }

    /// Sides of the unnormed formula; `(−1)^g` is the sign of (i) and (ii).
    fn thm1_sides(&self, variant: Variant, im: &Images) -> Result<(LogValue, LogValue)> {
        let g = self.genus();
        let pm = self.pm();
        let eps = self.eps;
        let gf = g as f64;
        let d_ks: Vec<_> = (0..g).map(|k| im.d_k(k, &[], 0.0)).collect();
        let sign = if g.is_multiple_of(2) { 1.0 } else { -1.0 };
        let j_over_theta = || -> Result<LogValue> {
            let j = LogValue::of(jacobian_points(pm, &d_ks, eps)?);
            let t = LogValue::of(self.theta0(&im.d())?);
            Ok(j.div(t.powi(g as i32 - 1)).powi(2 * g as i32))
        };
        match variant {
            Variant::I | Variant::Ii => {
                let mut lhs = LogValue::one();
                for k in 0..g {
                    let z = match variant {
                        Variant::I => d_ks[k].clone(),
                        _ => im.multiple(k, gf - 1.0, &[], 0.0),
                    };
                    lhs = lhs.mul(LogValue::of(eta_det(pm, &z, eps)?));
                }
                let mut rhs = j_over_theta()?.mul(LogValue::real(sign));
                for j in 0..g {
                    for k in (0..g).filter(|&k| k != j) {
                        let (num, den) = match variant {
                            Variant::I => (
                                im.d_k(j, &[(k, 1.0)], -1.0),
                                im.d_k(j, &[(k, 1.0), (j, -1.0)], 0.0),
                            ),
                            _ => (
                                im.multiple(j, gf, &[], -1.0),
                                im.multiple(j, gf, &[(k, -1.0)], 0.0),
                            ),
                        };
                        let num = LogValue::of(self.theta0(&num)?).powi(2);
                        rhs = rhs.mul(num).div(LogValue::of(self.theta0(&den)?));
                    }
                }
                Ok((lhs, rhs))
            }
            Variant::Iii => {
                let last = g - 1;
                let lhs = LogValue::of(eta_det(pm, &d_ks[last], eps)?).powi(g as i32 - 1);
                let mut rhs = LogValue::one();
                for k in 0..last {
                    let eta = LogValue::of(eta_det(pm, &im.multiple(k, gf - 1.0, &[], 0.0), eps)?);
                    let num = LogValue::of(self.theta0(&im.d_k(last, &[(k, 1.0)], -1.0))?);
                    let den = LogValue::of(self.theta0(&im.multiple(k, gf, &[], -1.0))?);
                    rhs = rhs.mul(eta).mul(num.div(den).powi(g as i32 - 1));
                }
                Ok((lhs, rhs))
            }
        }
    }

    /// Sides of the normed formula; all factors are nonnegative reals.
    fn normed_sides(&self, variant: Variant, im: &Images) -> Result<(LogValue, LogValue)> {
        let g = self.genus();
        let pm = self.pm();
        let eps = self.eps;
        let gf = g as f64;
        let nt = |z: &DVector<Complex64>| -> Result<LogValue> { Ok(LogValue::real(norm_theta(pm, z, eps)?)) };
        let ne = |z: &DVector<Complex64>| -> Result<LogValue> { Ok(LogValue::real(norm_eta(pm, z, eps)?)) };
        let d_ks: Vec<_> = (0..g).map(|k| im.d_k(k, &[], 0.0)).collect();
        match variant {
            Variant::I | Variant::Ii => {
                let mut lhs = LogValue::one();
                for k in 0..g {
                    let z = match variant {
                        Variant::I => d_ks[k].clone(),
                        _ => im.multiple(k, gf - 1.0, &[], 0.0),
                    };
                    lhs = lhs.mul(ne(&z)?);
                }
                let j = LogValue::real(norm_j(pm, &d_ks, eps)?);
                let mut rhs = j.div(nt(&im.d())?.powi(g as i32 - 1)).powi(2 * g as i32);
                for j in 0..g {
                    for k in (0..g).filter(|&k| k != j) {
                        let (num, den) = match variant {
                            Variant::I => (
                                im.d_k(j, &[(k, 1.0)], -1.0),
                                im.d_k(j, &[(k, 1.0), (j, -1.0)], 0.0),
                            ),
                            _ => (
                                im.multiple(j, gf, &[], -1.0),
                                im.multiple(j, gf, &[(k, -1.0)], 0.0),
                            ),
                        };
                        rhs = rhs.mul(nt(&num)?.powi(2)).div(nt(&den)?);
                    }
                }
                Ok((lhs, rhs))
            }
            Variant::Iii => {
                let last = g - 1;
                let lhs = ne(&d_ks[last])?.powi(g as i32 - 1);
                let mut rhs = LogValue::one();
                for k in 0..last {
                    let num = nt(&im.d_k(last, &[(k, 1.0)], -1.0))?;
                    let den = nt(&im.multiple(k, gf, &[], -1.0))?;
                    rhs = rhs
                        .mul(ne(&im.multiple(k, gf - 1.0, &[], 0.0))?)
                        .mul(num.div(den).powi(g as i32 - 1));
                }
                Ok((lhs, rhs))
            }
        }
    }

    fn report(
        &self,
        id: IdentityId,
        (lhs, rhs): (LogValue, LogValue),
        digest: InputsDigest,
    ) -> IdentityReport {
        IdentityReport {
            identity_id: id,
            genus: self.genus(),
            lhs: lhs.to_complex(),
            rhs: rhs.to_complex(),
            rel_residual: rel_residual(lhs, rhs),
            sign: None,
            inputs_digest: digest,
        }
    }

    /// The unnormed product formula `variant` at `p_1, …, p_g, q`.
    pub fn verify_thm1(
        &self,
        variant: Variant,
        ps: &[SurfacePoint],
        q: &SurfacePoint,
    ) -> Result<IdentityReport> {
        let im = self.images(ps, q)?;
        self.check_denominators(Some(variant), &im)?;
        let sides = self.thm1_sides(variant, &im)?;
        Ok(self.report(variant.thm1_id(), sides, self.digest(ps, q, None)))
    }

    /// `∏_{j≠k} θ(g p_j − q)/θ(g p_j − p_k) = ∏_{j≠k} θ(D_j + p_k − q)/θ(D_j + p_k − p_j)`.
    pub fn verify_cor_products(&self, ps: &[SurfacePoint], q: &SurfacePoint) -> Result<IdentityReport> {
        let g = self.genus();
        let gf = g as f64;
        let im = self.images(ps, q)?;
        self.check_denominators(None, &im)?;
        let mut lhs = LogValue::one();
        let mut rhs = LogValue::one();
        for j in 0..g {
            for k in (0..g).filter(|&k| k != j) {
                lhs = lhs
                    .mul(LogValue::of(self.theta0(&im.multiple(j, gf, &[], -1.0))?))
                    .div(LogValue::of(self.theta0(&im.multiple(j, gf, &[(k, -1.0)], 0.0))?));
                rhs = rhs
                    .mul(LogValue::of(self.theta0(&im.d_k(j, &[(k, 1.0)], -1.0))?))
                    .div(LogValue::of(self.theta0(&im.d_k(j, &[(k, 1.0), (j, -1.0)], 0.0))?));
            }
        }
        Ok(self.report(IdentityId::CorProducts, (lhs, rhs), self.digest(ps, q, None)))
    }

    /// The normed formula `variant`; the denominator of (i) is `‖θ‖(D)^{g−1}`.
    pub fn verify_normed(
        &self,
        variant: Variant,
        ps: &[SurfacePoint],
        q: &SurfacePoint,
    ) -> Result<IdentityReport> {
        let im = self.images(ps, q)?;
        self.check_denominators(Some(variant), &im)?;
        let sides = self.normed_sides(variant, &im)?;
        Ok(self.report(variant.normed_id(), sides, self.digest(ps, q, None)))
    }

    /// `J(η^σ_1, …, η^σ_g) = ±π^g ∏_{k>g} θ[η^σ_k](0)` on this surface.
    pub fn verify_thm2(&self, sigma: &Permutation) -> Result<IdentityReport> {
        let mut r = verify_thm2_with_scale(self.pm(), sigma, self.eps, self.delta_gen)?;
        r.inputs_digest.curve_hash = Some(self.curve_hash.clone());
        Ok(r)
    }
}

/// Checks of the hyperelliptic Jacobian–Nullwert formula on a bare period
/// matrix, with its own generic-position scale.
pub fn verify_thm2(pm: &PeriodMatrix, sigma: &Permutation, eps: f64) -> Result<IdentityReport> {
    check_tolerance(eps)?;
    let delta_gen = GENERIC_FACTOR * theta_scale(pm, eps)?;
    verify_thm2_with_scale(pm, sigma, eps, delta_gen)
}

fn verify_thm2_with_scale(
    pm: &PeriodMatrix,
    sigma: &Permutation,
    eps: f64,
    delta_gen: f64,
) -> Result<IdentityReport> {
    let g = pm.genus();
    if sigma.genus() != g {
        return Err(Error::InvalidPermutation(format!(
            "permutation of {} letters used at genus {g}",
            sigma.images().len()
        )));
    }
    let fs = fundamental_system(sigma);
    let lhs = jacobian_nullwerte(pm, fs.odd(), eps)?;
    let zero = DVector::<Complex64>::zeros(g);
    let mut rhs = LogValue::real(PI.powi(g as i32));
    for ch in fs.even() {
        let t = theta(pm, ch, &zero, eps)?.value();
        // ‖θ‖ at z = 0 is det(Y)^{1/4}|θ|
        if pm.det_im().powf(0.25) * t.norm() < delta_gen {
            return Err(Error::NumericFailure(format!(
                "even theta constant θ[{ch}](0) = {t:e} vanishes numerically"
            )));
        }
        rhs = rhs.mul(LogValue::of(t));
    }
    let lhs_log = LogValue::of(lhs);
    let ratio = lhs_log.div(rhs).to_complex();
    if ratio.im.abs() > SIGN_IMAG_TOLERANCE {
        return Err(Error::NumericFailure(format!(
            "lhs/rhs = {ratio} is not real; refusing to read off a sign"
        )));
    }
    let sign: i8 = if ratio.re >= 0.0 { 1 } else { -1 };
    Ok(IdentityReport {
        identity_id: IdentityId::Thm2,
        genus: g,
        lhs,
        rhs: rhs.to_complex(),
        rel_residual: (ratio.norm() - 1.0).abs(),
        sign: Some(sign),
        inputs_digest: InputsDigest {
            sigma: Some(sigma.to_string()),
            eps,
            ..Default::default()
        },
    })
}

/// The genus-one case with `σ = id` at `τ`.
pub fn verify_jacobi(tau: Complex64, eps: f64) -> Result<IdentityReport> {
    let pm = PeriodMatrix::new(nalgebra::DMatrix::from_element(1, 1, tau))?;
    let mut r = verify_thm2(&pm, &Permutation::identity(1), eps)?;
    r.identity_id = IdentityId::JacobiG1;
    r.inputs_digest.tau = Some(crate::numfmt::fmt_c64(tau));
    Ok(r)
}

/// The genus-two case on a period matrix.
pub fn verify_rosenhain(pm: &PeriodMatrix, sigma: &Permutation, eps: f64) -> Result<IdentityReport> {
    if pm.genus() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            found: pm.genus(),
        });
    }
    let mut r = verify_thm2(pm, sigma, eps)?;
    r.identity_id = IdentityId::RosenhainG2;
    Ok(r)
}
