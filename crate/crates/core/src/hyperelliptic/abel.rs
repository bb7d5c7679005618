use nalgebra::DVector;
use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::curve::HyperellipticCurve;
use super::periods::PeriodData;
use super::quadrature::adaptive_gauss_legendre;
use crate::error::{check_tolerance, Error, Result};

/// Relative distance (in units of the span) below which `x` is a branch point.
const BRANCH_SNAP: f64 = 1e-12;
/// Relative distance that integration paths keep from branch points.
pub const PATH_EXCLUSION: f64 = 1e-3;

/// A finite point `(x, sheet·y(x))`; on the real axis `y` is the upper
/// boundary value. The sheet of a Weierstraß point is always `+1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SurfacePoint {
    #[serde(with = "crate::numfmt::sci_c64")]
    pub x: Complex64,
    pub sheet: i8,
}

impl SurfacePoint {
    pub fn new(x: Complex64, sheet: i8) -> Result<Self> {
        if sheet != 1 && sheet != -1 {
            return Err(Error::InvalidCurve(format!("sheet must be ±1, got {sheet}")));
        }
        if !x.re.is_finite() || !x.im.is_finite() {
            return Err(Error::InvalidCurve("non-finite point".into()));
        }
        Ok(Self { x, sheet })
    }

    /// `W_j`, `1 ≤ j ≤ 2g+2`.
    pub fn weierstrass(curve: &HyperellipticCurve, j: usize) -> Self {
        Self {
            x: Complex64::new(curve.branch_point(j), 0.0),
            sheet: 1,
        }
    }

    /// The hyperelliptic involution `(x, y) ↦ (x, −y)`.
    pub fn involution(&self) -> Self {
        Self {
            x: self.x,
            sheet: -self.sheet,
        }
    }

    pub fn y(&self, curve: &HyperellipticCurve) -> Complex64 {
        curve.y(self.x) * f64::from(self.sheet)
    }

    /// Index `j` if this is the Weierstraß point `W_j`.
    pub fn branch_index(&self, curve: &HyperellipticCurve) -> Option<usize> {
        curve.branch_index_near(self.x, BRANCH_SNAP * curve.span())
    }
}

/// Which half-plane carries the integration path.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PathRoute {
    /// The target's half-plane (upper for real targets).
    #[default]
    Direct,
    /// The opposite half-plane, crossing the real axis through the widest gap
    /// when the target is off the axis.
    Mirror,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathOptions {
    pub route: PathRoute,
    /// Height of the horizontal leg, as a fraction of the span.
    pub height: f64,
}

impl Default for PathOptions {
    fn default() -> Self {
        Self {
            route: PathRoute::Direct,
            height: 0.3,
        }
    }
}

/// `∫_{W_b}^{P} v` along the default path.
pub fn abel_jacobi(
    curve: &HyperellipticCurve,
    pd: &PeriodData,
    p: &SurfacePoint,
    base_index: usize,
    eps: f64,
) -> Result<DVector<Complex64>> {
    abel_jacobi_with(curve, pd, p, base_index, eps, &PathOptions::default())
}

/// `∫_{W_b}^{P} v` along a polyline: vertical rise from `a_b`, horizontal leg,
/// then into `P`. On failure the construction is retried at other heights.
pub fn abel_jacobi_with(
    curve: &HyperellipticCurve,
    pd: &PeriodData,
    p: &SurfacePoint,
    base_index: usize,
    eps: f64,
    opts: &PathOptions,
) -> Result<DVector<Complex64>> {
    check_tolerance(eps)?;
    let g = curve.genus();
    if base_index == 0 || base_index > 2 * g + 2 {
        return Err(Error::PathConstruction(format!(
            "base index {base_index} outside 1..={}",
            2 * g + 2
        )));
    }
    if p.branch_index(curve) == Some(base_index) {
        return Ok(DVector::zeros(g));
    }
    let mut last = None;
    for factor in [1.0, 0.5, 1.7, 0.25] {
        let mut o = *opts;
        o.height *= factor;
        match integrate_path(curve, p, base_index, eps, &o) {
            Ok(raw) => {
                let v = &pd.basis_change * DVector::from_vec(raw);
                return Ok(v);
            }
            Err(e @ Error::PathConstruction(_)) => last = Some(e),
            Err(e) => return Err(e),
        }
    }
    Err(last.expect("at least one attempt"))
}

struct Leg {
    from: Complex64,
    to: Complex64,
    from_branch: bool,
    to_branch: bool,
}

fn integrate_path(
    curve: &HyperellipticCurve,
    p: &SurfacePoint,
    base_index: usize,
    eps: f64,
    opts: &PathOptions,
) -> Result<Vec<Complex64>> {
    let g = curve.genus();
    let span = curve.span();
    let h = opts.height * span;
    if !(h > 0.0) {
        return Err(Error::PathConstruction("non-positive path height".into()));
    }
    let base = Complex64::new(curve.branch_point(base_index), 0.0);
    let target_branch = p.branch_index(curve);
    let x = p.x;
    let target_side = if x.im < 0.0 { -1.0 } else { 1.0 };
    let on_axis = x.im == 0.0 || target_branch.is_some();
    let mirror = opts.route == PathRoute::Mirror;
    let side = if mirror { -target_side } else { target_side };
    let lift = Complex64::new(0.0, side * h);

    let mut points = vec![base, base + lift];
    let mut multiplier = f64::from(p.sheet);
    match target_branch {
        Some(j) => {
            let a = Complex64::new(curve.branch_point(j), 0.0);
            points.push(a + lift);
            points.push(a);
            multiplier = 1.0;
        }
        None if on_axis => {
            if mirror && in_cut(curve, x.re) {
                // the lower boundary value on a cut is −y_+
                multiplier = -multiplier;
            }
            points.push(x);
        }
        None if mirror => {
            let m = widest_gap_midpoint(curve);
            points.push(m + lift);
            points.push(m - lift);
            points.push(x);
        }
        None => points.push(x),
    }
    let legs: Vec<Leg> = points
        .windows(2)
        .enumerate()
        .map(|(i, w)| Leg {
            from: w[0],
            to: w[1],
            from_branch: i == 0,
            to_branch: target_branch.is_some() && i + 2 == points.len(),
        })
        .collect();
    check_clearance(curve, &legs)?;
    let tol = 0.05 * eps / legs.len() as f64;
    let mut total = vec![Complex64::new(0.0, 0.0); g];
    for leg in &legs {
        let part = leg_integral(curve, leg, tol)?;
        for (t, v) in total.iter_mut().zip(part) {
            *t += v;
        }
    }
    Ok(total.into_iter().map(|v| v * multiplier).collect())
}

fn in_cut(curve: &HyperellipticCurve, t: f64) -> bool {
    curve.branch_points().chunks(2).any(|c| t >= c[0] && t <= c[1])
}

fn widest_gap_midpoint(curve: &HyperellipticCurve) -> Complex64 {
    let a = curve.branch_points();
    let g = curve.genus();
    let k = (1..=g)
        .max_by(|&i, &j| (a[2 * i] - a[2 * i - 1]).total_cmp(&(a[2 * j] - a[2 * j - 1])))
        .expect("genus is positive");
    Complex64::new(0.5 * (a[2 * k - 1] + a[2 * k]), 0.0)
}

fn segment_distance(p: Complex64, a: Complex64, b: Complex64) -> f64 {
    let d = b - a;
    let len2 = d.norm_sqr();
    if len2 == 0.0 {
        return (p - a).norm();
    }
    let t = (((p - a) * d.conj()).re / len2).clamp(0.0, 1.0);
    (p - (a + d * t)).norm()
}

fn check_clearance(curve: &HyperellipticCurve, legs: &[Leg]) -> Result<()> {
    let radius = PATH_EXCLUSION * curve.span();
    for leg in legs {
        for &a in curve.branch_points() {
            let a = Complex64::new(a, 0.0);
            let own = (leg.from_branch && leg.from == a) || (leg.to_branch && leg.to == a);
            if !own && segment_distance(a, leg.from, leg.to) < radius {
                return Err(Error::PathConstruction(format!(
                    "leg {} -> {} passes within {radius:e} of branch point {}",
                    leg.from, leg.to, a.re
                )));
            }
        }
    }
    Ok(())
}

fn leg_integral(curve: &HyperellipticCurve, leg: &Leg, tol: f64) -> Result<Vec<Complex64>> {
    let g = curve.genus();
    let d = leg.to - leg.from;
    // x = x0 + d·u² (resp. x1 − d·(1−u)²) absorbs the square-root endpoint
    let from_index = if leg.from_branch { curve.branch_index_near(leg.from, 0.0) } else { None };
    let to_index = if leg.to_branch { curve.branch_index_near(leg.to, 0.0) } else { None };
    let f = |u: f64| -> Vec<Complex64> {
        let (x, dx, y) = if let Some(j) = from_index {
            let off = d * (u * u);
            (leg.from + off, d * (2.0 * u), curve.y_near_branch(j, off))
        } else if let Some(j) = to_index {
            let v = 1.0 - u;
            let off = -d * (v * v);
            (leg.to + off, d * (2.0 * v), curve.y_near_branch(j, off))
        } else {
            let x = leg.from + d * u;
            (x, d, curve.y(x))
        };
        let w = dx / y;
        let mut out = Vec::with_capacity(g);
        let mut xp = Complex64::new(1.0, 0.0);
        for _ in 0..g {
            out.push(w * xp);
            xp *= x;
        }
        out
    };
    adaptive_gauss_legendre(&f, 0.0, 1.0, g, tol)
}

/// Sampling box for random points, in units of the span.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SampleRegion {
    /// Extension of the real range beyond `[a_1, a_{2g+2}]`.
    pub margin: f64,
    pub min_height: f64,
    pub max_height: f64,
}

impl Default for SampleRegion {
    fn default() -> Self {
        Self {
            margin: 0.2,
            min_height: 0.05,
            max_height: 0.6,
        }
    }
}

/// A random off-axis point with random sheet and half-plane, deterministic
/// per `seed`.
pub fn random_point(curve: &HyperellipticCurve, seed: u64, region: &SampleRegion) -> SurfacePoint {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    random_point_from(curve, &mut rng, region)
}

pub fn random_point_from<R: Rng + ?Sized>(
    curve: &HyperellipticCurve,
    rng: &mut R,
    region: &SampleRegion,
) -> SurfacePoint {
    let span = curve.span();
    let lo = curve.branch_point(1) - region.margin * span;
    let hi = curve.branch_point(2 * curve.genus() + 2) + region.margin * span;
    let exclusion = PATH_EXCLUSION * span;
    loop {
        let re = rng.gen_range(lo..hi);
        let im = rng.gen_range(region.min_height..=region.max_height) * span;
        let side = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
        let sheet = if rng.gen_bool(0.5) { 1 } else { -1 };
        let x = Complex64::new(re, side * im);
        if curve.branch_points().iter().all(|&a| (x - a).norm() >= exclusion) {
            return SurfacePoint { x, sheet };
        }
    }
}

#[cfg(test)]
mod tests {
    use super::super::lattice::lattice_residual;
    use super::super::periods::periods;
    use super::*;

    fn setup(g: usize, seed: u64) -> (HyperellipticCurve, PeriodData) {
        let c = HyperellipticCurve::random(g, seed).unwrap();
        let pd = periods(&c, 1e-12).unwrap();
        (c, pd)
    }

    #[test]
    fn base_point_maps_to_zero() {
        let (c, pd) = setup(2, 1);
        let w = SurfacePoint::weierstrass(&c, 3);
        assert_eq!(abel_jacobi(&c, &pd, &w, 3, 1e-12).unwrap().norm(), 0.0);
    }

    #[test]
    fn weierstrass_points_are_two_torsion() {
        for g in 1..=3 {
            let (c, pd) = setup(g, 10 + g as u64);
            for b in [1, 2 * g + 2] {
                for j in 1..=2 * g + 2 {
                    let w = SurfacePoint::weierstrass(&c, j);
                    let v = abel_jacobi(&c, &pd, &w, b, 1e-12).unwrap() * Complex64::new(2.0, 0.0);
                    assert!(lattice_residual(&pd.tau, &v) <= 1e-8, "g={g} b={b} j={j}");
                }
            }
        }
    }

    #[test]
    fn involution_negates_and_routes_agree() {
        let (c, pd) = setup(3, 2);
        for seed in 0..20 {
            let p = random_point(&c, seed, &SampleRegion::default());
            let v = abel_jacobi(&c, &pd, &p, 8, 1e-12).unwrap();
            let w = abel_jacobi(&c, &pd, &p.involution(), 8, 1e-12).unwrap();
            assert!(lattice_residual(&pd.tau, &(&v + &w)) <= 1e-8);
            let mirror = PathOptions {
                route: PathRoute::Mirror,
                ..PathOptions::default()
            };
            let m = abel_jacobi_with(&c, &pd, &p, 8, 1e-12, &mirror).unwrap();
            assert!(lattice_residual(&pd.tau, &(&v - &m)) <= 1e-8, "seed {seed}");
        }
    }

    #[test]
    fn real_points_on_cut_and_gap() {
        let (c, pd) = setup(2, 6);
        let a = c.branch_points();
        let mirror = PathOptions {
            route: PathRoute::Mirror,
            ..PathOptions::default()
        };
        for t in [0.5 * (a[0] + a[1]), 0.5 * (a[1] + a[2]), a[5] + 0.3] {
            let p = SurfacePoint::new(Complex64::new(t, 0.0), -1).unwrap();
            let v = abel_jacobi(&c, &pd, &p, 6, 1e-12).unwrap();
            let m = abel_jacobi_with(&c, &pd, &p, 6, 1e-12, &mirror).unwrap();
            assert!(lattice_residual(&pd.tau, &(&v - &m)) <= 1e-8, "t={t}");
        }
    }

    #[test]
    fn random_points_are_deterministic_and_clear() {
        let c = HyperellipticCurve::random(2, 3).unwrap();
        let r = SampleRegion::default();
        assert_eq!(random_point(&c, 9, &r), random_point(&c, 9, &r));
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..1000 {
            let p = random_point_from(&c, &mut rng, &r);
            assert!(c.branch_points().iter().all(|&a| (p.x - a).norm() >= 1e-3 * c.span()));
        }
    }

    #[test]
    fn rejects_bad_base_index() {
        let (c, pd) = setup(1, 0);
        let p = random_point(&c, 0, &SampleRegion::default());
        assert!(matches!(
            abel_jacobi(&c, &pd, &p, 5, 1e-10),
            Err(Error::PathConstruction(_))
        ));
    }
}
