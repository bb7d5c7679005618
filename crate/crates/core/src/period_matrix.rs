use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Default tolerance for `|τ_jk − τ_kj|`.
pub const SYMMETRY_TOLERANCE: f64 = 1e-9;

/// A point of the Siegel upper half-space together with the real data derived
/// from `Y = Im τ` that every theta evaluation needs.
#[derive(Debug, Clone)]
pub struct PeriodMatrix {
    tau: DMatrix<Complex64>,
    y: DMatrix<f64>,
    y_inv: DMatrix<f64>,
    /// Upper-triangular `U` with `Y = Uᵀ U`.
    chol_upper: DMatrix<f64>,
    lambda_min: f64,
    det_y: f64,
}

impl PeriodMatrix {
    pub fn new(tau: DMatrix<Complex64>) -> Result<Self> {
        Self::with_tolerance(tau, SYMMETRY_TOLERANCE)
    }

    pub fn with_tolerance(tau: DMatrix<Complex64>, sym_tol: f64) -> Result<Self> {
        let g = tau.nrows();
        if g == 0 || tau.ncols() != g {
            return Err(Error::InvalidPeriodMatrix(format!(
                "expected a square matrix of positive size, got {}x{}",
                tau.nrows(),
                tau.ncols()
            )));
        }
        if tau.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidPeriodMatrix("non-finite entry".into()));
        }
        let asym = symmetry_residual(&tau);
        if asym > sym_tol {
            return Err(Error::InvalidPeriodMatrix(format!(
                "not symmetric: max |τ_jk - τ_kj| = {asym:e}"
            )));
        }
        let tau = (&tau + tau.transpose()).map(|z| z * 0.5);
        let y = tau.map(|z| z.im);
        let lambda_min = y.clone().symmetric_eigen().eigenvalues.min();
        if !(lambda_min > 0.0) {
            return Err(Error::InvalidPeriodMatrix(format!(
                "Im τ is not positive definite (smallest eigenvalue {lambda_min:e})"
            )));
        }
        let chol = y.clone().cholesky().ok_or_else(|| {
            Error::InvalidPeriodMatrix("Cholesky factorisation of Im τ failed".into())
        })?;
        let chol_upper = chol.l().transpose();
        let y_inv = chol.inverse();
        let det_y = chol.determinant();
        Ok(Self {
            tau,
            y,
            y_inv,
            chol_upper,
            lambda_min,
            det_y,
        })
    }

    /// Parses `"r11,r12;r21,r22"` with complex entries such as `1i`, `0.5+2i`.
    pub fn parse(text: &str) -> Result<Self> {
        let rows: Vec<Vec<Complex64>> = text
            .split(';')
            .map(|row| row.split(',').map(parse_complex).collect::<Result<Vec<_>>>())
            .collect::<Result<_>>()?;
        let g = rows.len();
        if rows.iter().any(|r| r.len() != g) {
            return Err(Error::Parse(format!("period matrix {text:?} is not square")));
        }
        Self::new(DMatrix::from_fn(g, g, |i, j| rows[i][j]))
    }

    pub fn genus(&self) -> usize {
        self.tau.nrows()
    }

    pub fn tau(&self) -> &DMatrix<Complex64> {
        &self.tau
    }

    pub fn im(&self) -> &DMatrix<f64> {
        &self.y
    }

    pub fn im_inverse(&self) -> &DMatrix<f64> {
        &self.y_inv
    }

    pub fn cholesky_upper(&self) -> &DMatrix<f64> {
        &self.chol_upper
    }

    pub fn lambda_min(&self) -> f64 {
        self.lambda_min
    }

    pub fn det_im(&self) -> f64 {
        self.det_y
    }

    /// `ᵗy Y⁻¹ y` for a real vector `y`.
    pub fn quad_inverse(&self, y: &DVector<f64>) -> f64 {
        y.dot(&(&self.y_inv * y))
    }
}

pub fn symmetry_residual(tau: &DMatrix<Complex64>) -> f64 {
    let g = tau.nrows();
    let mut worst: f64 = 0.0;
    for j in 0..g {
        for k in 0..j {
            worst = worst.max((tau[(j, k)] - tau[(k, j)]).norm());
        }
    }
    worst
}

/// Parses `a`, `bi`, `a+bi`, `a-bi` (also `i`, `-i`, and `j` in place of `i`).
pub fn parse_complex(s: &str) -> Result<Complex64> {
    let t: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    let bad = || Error::Parse(format!("cannot parse complex number {s:?}"));
    if t.is_empty() {
        return Err(bad());
    }
    let imag_unit = t.ends_with('i') || t.ends_with('j');
    if !imag_unit {
        return t.parse::<f64>().map(|re| Complex64::new(re, 0.0)).map_err(|_| bad());
    }
    let body = &t[..t.len() - 1];
    // split at the last sign that is not part of an exponent
    let bytes = body.as_bytes();
    let mut split = None;
    for idx in (1..bytes.len()).rev() {
        if (bytes[idx] == b'+' || bytes[idx] == b'-')
            && !matches!(bytes[idx - 1], b'e' | b'E')
        {
            split = Some(idx);
            break;
        }
    }
    let coeff = |c: &str| -> Result<f64> {
        match c {
            "" | "+" => Ok(1.0),
            "-" => Ok(-1.0),
            _ => c.parse::<f64>().map_err(|_| bad()),
        }
    };
    match split {
        Some(idx) => {
            let re = body[..idx].parse::<f64>().map_err(|_| bad())?;
            Ok(Complex64::new(re, coeff(&body[idx..])?))
        }
        None => Ok(Complex64::new(0.0, coeff(body)?)),
    }
}
