use nalgebra::DVector;
use num_complex::Complex64;

use super::abel::{abel_jacobi_with, PathOptions, SurfacePoint};
use super::curve::HyperellipticCurve;
use super::periods::PeriodData;
use crate::characteristic::Characteristic;
use crate::charsys::{characteristic_of_set, IndexSet};
use crate::error::{Error, Result};

/// A finite formal sum of points.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Divisor {
    pub terms: Vec<(SurfacePoint, i64)>,
}

impl Divisor {
    pub fn new(terms: Vec<(SurfacePoint, i64)>) -> Self {
        Self { terms }
    }

    pub fn degree(&self) -> i64 {
        self.terms.iter().map(|(_, w)| w).sum()
    }

    pub fn push(&mut self, point: SurfacePoint, weight: i64) {
        self.terms.push((point, weight));
    }
}

/// `φ(D) = Σ w·∫_{W_{2g+2}}^{P} v + Δ` for `deg D = g − 1`; not reduced.
pub fn divisor_class(
    curve: &HyperellipticCurve,
    pd: &PeriodData,
    d: &Divisor,
    eps: f64,
) -> Result<DVector<Complex64>> {
    divisor_class_with(curve, pd, d, eps, &PathOptions::default())
}

pub fn divisor_class_with(
    curve: &HyperellipticCurve,
    pd: &PeriodData,
    d: &Divisor,
    eps: f64,
    opts: &PathOptions,
) -> Result<DVector<Complex64>> {
    let g = curve.genus();
    let expected = g as i64 - 1;
    if d.degree() != expected {
        return Err(Error::WrongDegree {
            expected,
            found: d.degree(),
        });
    }
    let base = 2 * g + 2;
    let mut acc = pd.delta.clone();
    for (p, w) in &d.terms {
        if *w != 0 {
            let v = abel_jacobi_with(curve, pd, p, base, eps, opts)?;
            acc += v * Complex64::new(*w as f64, 0.0);
        }
    }
    Ok(acc)
}

/// The characteristic `η_{T∘U}` of `Σ_{j∈T} W_j` (`|T| = g−1`) or of
/// `W_{j_1}+…+W_{j_g} − W_{j_{g+1}}` (`|T| = g+1`).
pub fn weierstrass_class(genus: usize, t: &IndexSet) -> Result<Characteristic> {
    if t.genus() != genus {
        return Err(Error::InvalidIndexSet(format!(
            "index set for genus {} used at genus {genus}",
            t.genus()
        )));
    }
    if t.len() + 1 != genus && t.len() != genus + 1 {
        return Err(Error::InvalidIndexSet(format!(
            "|T| = {} but must be g-1 = {} or g+1 = {}",
            t.len(),
            genus as i64 - 1,
            genus + 1
        )));
    }
    Ok(characteristic_of_set(&t.sym_diff(&IndexSet::odd_indices(genus))?))
}
