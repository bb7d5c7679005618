use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::numfmt::{fmt_f64, parse_f64};

/// Relative minimum separation of branch points.
pub const MIN_RELATIVE_GAP: f64 = 1e-6;

/// `y² = ∏_{i=1}^{2g+2} (x − a_i)` with real `a_1 < … < a_{2g+2}`.
///
/// Cuts run along `[a_{2k−1}, a_{2k}]`, `k = 1, …, g+1`. The branch of `y`
/// used everywhere is the product of `(x − m_k)·√(1 − h_k²/(x − m_k)²)` over
/// the cuts (midpoint `m_k`, half-width `h_k`); it is analytic off the cuts
/// and behaves like `x^{g+1}` at infinity.
#[derive(Debug, Clone, PartialEq)]
pub struct HyperellipticCurve {
    branch_points: Vec<f64>,
    genus: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CurveFile {
    pub schema: u32,
    pub genus: usize,
    pub branch_points: Vec<String>,
}

impl HyperellipticCurve {
    pub fn new(points: &[f64]) -> Result<Self> {
        let n = points.len();
        if n < 4 {
            return Err(Error::InvalidCurve(format!(
                "need at least 4 branch points, got {n}"
            )));
        }
        if !n.is_multiple_of(2) {
            return Err(Error::InvalidCurve(format!(
                "need an even number 2g+2 of branch points, got {n}"
            )));
        }
        if points.iter().any(|p| !p.is_finite()) {
            return Err(Error::InvalidCurve("non-finite branch point".into()));
        }
        let mut sorted = points.to_vec();
        sorted.sort_by(f64::total_cmp);
        let span = sorted[n - 1] - sorted[0];
        let min_gap = sorted.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min);
        if !(span > 0.0) || min_gap <= MIN_RELATIVE_GAP * span {
            return Err(Error::InvalidCurve(format!(
                "duplicate branch points (minimum gap {min_gap:e}, span {span:e})"
            )));
        }
        Ok(Self {
            branch_points: sorted,
            genus: n / 2 - 1,
        })
    }

    /// Sorted distinct branch points in `[-2, 2]` with pairwise gaps of at
    /// least `0.4 / (2g+2)`, drawn deterministically from `seed`.
    pub fn random(genus: usize, seed: u64) -> Result<Self> {
        if genus == 0 {
            return Err(Error::InvalidCurve("genus must be positive".into()));
        }
        let n = 2 * genus + 2;
        let min_gap = 0.4 / n as f64;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        // spread the slack uniformly: sorted uniforms on the reduced interval
        // plus the mandatory gaps
        let slack = 4.0 - min_gap * (n - 1) as f64;
        let mut u: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..slack)).collect();
        u.sort_by(f64::total_cmp);
        let points: Vec<f64> = u
            .iter()
            .enumerate()
            .map(|(i, &v)| -2.0 + v + min_gap * i as f64)
            .collect();
        Self::new(&points)
    }

    pub fn genus(&self) -> usize {
        self.genus
    }

    pub fn branch_points(&self) -> &[f64] {
        &self.branch_points
    }

    /// `a_j` for `1 ≤ j ≤ 2g+2`.
    pub fn branch_point(&self, j: usize) -> f64 {
        self.branch_points[j - 1]
    }

    pub fn span(&self) -> f64 {
        self.branch_points[self.branch_points.len() - 1] - self.branch_points[0]
    }

    pub fn min_gap(&self) -> f64 {
        self.branch_points
            .windows(2)
            .map(|w| w[1] - w[0])
            .fold(f64::INFINITY, f64::min)
    }

    /// Index `j` of the branch point within `tol` of `x`, if any.
    pub fn branch_index_near(&self, x: Complex64, tol: f64) -> Option<usize> {
        self.branch_points
            .iter()
            .position(|&a| (x - a).norm() <= tol)
            .map(|i| i + 1)
    }

    /// The branch of `y` at `x`; on the real axis the boundary value from the
    /// upper half-plane.
    pub fn y(&self, x: Complex64) -> Complex64 {
        let x = Complex64::new(x.re, if x.im == 0.0 { 0.0 } else { x.im });
        self.y_from_offsets(|i| x - self.branch_points[i])
    }

    /// `y` at `x = a_j + delta`, with the offset to `a_j` taken exactly.
    pub fn y_near_branch(&self, j: usize, delta: Complex64) -> Complex64 {
        let aj = self.branch_points[j - 1];
        let delta = Complex64::new(delta.re, if delta.im == 0.0 { 0.0 } else { delta.im });
        self.y_from_offsets(|i| {
            if i + 1 == j {
                delta
            } else {
                delta + (aj - self.branch_points[i])
            }
        })
    }

    // each cut contributes √(x − a)·√(x − b) (principal roots): analytic off
    // [a, b] and ~ x at infinity
    fn y_from_offsets(&self, offset: impl Fn(usize) -> Complex64) -> Complex64 {
        (0..=self.genus)
            .map(|k| offset(2 * k).sqrt() * offset(2 * k + 1).sqrt())
            .product()
    }

    pub fn to_file(&self) -> CurveFile {
        CurveFile {
            schema: 1,
            genus: self.genus,
            branch_points: self.branch_points.iter().map(|&a| fmt_f64(a)).collect(),
        }
    }

    pub fn from_file(file: &CurveFile) -> Result<Self> {
        if file.schema != 1 {
            return Err(Error::Parse(format!("unsupported curve schema {}", file.schema)));
        }
        let points = file
            .branch_points
            .iter()
            .map(|s| parse_f64(s).map_err(Error::Parse))
            .collect::<Result<Vec<_>>>()?;
        let curve = Self::new(&points)?;
        if curve.genus != file.genus {
            return Err(Error::InvalidCurve(format!(
                "file declares genus {} but has {} branch points",
                file.genus,
                points.len()
            )));
        }
        Ok(curve)
    }

    /// Compact JSON of the curve file; the cache key is its SHA-256.
    pub fn canonical_bytes(&self) -> Vec<u8> {
        serde_json::to_vec(&self.to_file()).expect("curve file serialises")
    }

    pub fn hash(&self) -> String {
        hex::encode(Sha256::digest(self.canonical_bytes()))
    }
}
