use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::curve::HyperellipticCurve;
use super::periods::{periods, PeriodData};
use crate::error::{Error, Result};
use crate::numfmt::{fmt_f64, parse_f64};
use crate::period_matrix::PeriodMatrix;

/// On-disk period cache entry; matrices are row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeriodCacheFile {
    pub schema: u32,
    pub curve_hash: String,
    pub eps: String,
    pub tau_re: Vec<String>,
    pub tau_im: Vec<String>,
    #[serde(rename = "A_re")]
    pub a_re: Vec<String>,
    #[serde(rename = "A_im")]
    pub a_im: Vec<String>,
    pub delta_re: Vec<String>,
    pub delta_im: Vec<String>,
}

fn split(values: impl Iterator<Item = Complex64>) -> (Vec<String>, Vec<String>) {
    values.map(|c| (fmt_f64(c.re), fmt_f64(c.im))).unzip()
}

fn join(re: &[String], im: &[String], len: usize) -> Result<Vec<Complex64>> {
    if re.len() != len || im.len() != len {
        return Err(Error::Parse(format!(
            "cache entry has {} / {} values, expected {len}",
            re.len(),
            im.len()
        )));
    }
    re.iter()
        .zip(im)
        .map(|(r, i)| {
            Ok(Complex64::new(
                parse_f64(r).map_err(Error::Parse)?,
                parse_f64(i).map_err(Error::Parse)?,
            ))
        })
        .collect()
}

fn row_major(m: &DMatrix<Complex64>) -> impl Iterator<Item = Complex64> + '_ {
    (0..m.nrows()).flat_map(move |i| (0..m.ncols()).map(move |j| m[(i, j)]))
}

impl PeriodCacheFile {
    pub fn from_data(curve: &HyperellipticCurve, pd: &PeriodData) -> Self {
        let (tau_re, tau_im) = split(row_major(pd.tau.tau()));
        let (a_re, a_im) = split(row_major(&pd.a_periods));
        let (delta_re, delta_im) = split(pd.delta.iter().copied());
        Self {
            schema: 1,
            curve_hash: curve.hash(),
            eps: fmt_f64(pd.eps),
            tau_re,
            tau_im,
            a_re,
            a_im,
            delta_re,
            delta_im,
        }
    }

    pub fn to_data(&self, genus: usize) -> Result<PeriodData> {
        if self.schema != 1 {
            return Err(Error::Parse(format!("unsupported cache schema {}", self.schema)));
        }
        let gg = genus * genus;
        let tau = DMatrix::from_row_slice(genus, genus, &join(&self.tau_re, &self.tau_im, gg)?);
        let a = DMatrix::from_row_slice(genus, genus, &join(&self.a_re, &self.a_im, gg)?);
        let delta = DVector::from_vec(join(&self.delta_re, &self.delta_im, genus)?);
        let eps = parse_f64(&self.eps).map_err(Error::Parse)?;
        PeriodData::from_parts(PeriodMatrix::new(tau)?, a, delta, eps)
    }
}

pub fn cache_path(dir: &Path, curve: &HyperellipticCurve) -> PathBuf {
    dir.join(format!("{}.json", curve.hash()))
}

/// A cached entry computed at tolerance `≤ eps`, if present and intact.
pub fn load_cached(dir: &Path, curve: &HyperellipticCurve, eps: f64) -> Result<Option<PeriodData>> {
    let path = cache_path(dir, curve);
    let bytes = match fs::read(&path) {
        Ok(b) => b,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(None),
        Err(e) => return Err(e.into()),
    };
    let Ok(file) = serde_json::from_slice::<PeriodCacheFile>(&bytes) else {
        return Ok(None);
    };
    if file.curve_hash != curve.hash() {
        return Ok(None);
    }
    let pd = file.to_data(curve.genus())?;
    Ok((pd.eps <= eps).then_some(pd))
}

/// Writes the entry to a temporary file in `dir` and renames it into place.
pub fn store(dir: &Path, curve: &HyperellipticCurve, pd: &PeriodData) -> Result<PathBuf> {
    fs::create_dir_all(dir)?;
    let path = cache_path(dir, curve);
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    serde_json::to_writer_pretty(&mut tmp, &PeriodCacheFile::from_data(curve, pd))?;
    tmp.write_all(b"\n")?;
    tmp.as_file().sync_all()?;
    tmp.persist(&path).map_err(|e| Error::Io(e.error))?;
    Ok(path)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CacheStatus {
    Hit,
    Miss,
    Disabled,
}

/// `periods` backed by the on-disk cache in `dir` (no caching for `None`).
pub fn periods_cached(
    curve: &HyperellipticCurve,
    eps: f64,
    dir: Option<&Path>,
) -> Result<(PeriodData, CacheStatus)> {
    let Some(dir) = dir else {
        return Ok((periods(curve, eps)?, CacheStatus::Disabled));
    };
    if let Some(pd) = load_cached(dir, curve, eps)? {
        return Ok((pd, CacheStatus::Hit));
    }
    let pd = periods(curve, eps)?;
    store(dir, curve, &pd)?;
    Ok((pd, CacheStatus::Miss))
}
