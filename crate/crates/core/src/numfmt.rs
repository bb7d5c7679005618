//! Decimal-string encoding for floats in every file and report we write.
//!
//! `{:.16e}` carries 17 significant digits, enough to round-trip any `f64`.

use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// `a+bi` with both parts at full precision; parsed back by `parse_complex`.
pub fn fmt_c64(z: Complex64) -> String {
    format!("{}{:+.16e}i", fmt_f64(z.re), z.im)
}

pub fn parse_f64(s: &str) -> Result<f64, String> {
    s.trim().parse::<f64>().map_err(|e| format!("bad decimal {s:?}: {e}"))
}

/// `#[serde(with = "numfmt::sci")]` for a single `f64`.
pub mod sci {
    use super::*;

    pub fn serialize<S: Serializer>(x: &f64, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&fmt_f64(*x))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        let s = String::deserialize(d)?;
        parse_f64(&s).map_err(serde::de::Error::custom)
    }
}

/// `#[serde(with = "numfmt::sci_vec")]` for `Vec<f64>`.
pub mod sci_vec {
    use super::*;

    pub fn serialize<S: Serializer>(xs: &[f64], s: S) -> Result<S::Ok, S::Error> {
        let v: Vec<String> = xs.iter().map(|&x| fmt_f64(x)).collect();
        v.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<f64>, D::Error> {
        let v = Vec::<String>::deserialize(d)?;
        v.iter()
            .map(|s| parse_f64(s))
            .collect::<Result<_, _>>()
            .map_err(serde::de::Error::custom)
    }
}

/// Complex number as `{"re": "...", "im": "..."}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SciComplex {
    #[serde(with = "sci")]
    pub re: f64,
    #[serde(with = "sci")]
    pub im: f64,
}

impl From<Complex64> for SciComplex {
    fn from(z: Complex64) -> Self {
        Self { re: z.re, im: z.im }
    }
}

impl From<SciComplex> for Complex64 {
    fn from(z: SciComplex) -> Self {
        Complex64::new(z.re, z.im)
    }
}

/// `#[serde(with = "numfmt::sci_c64")]` for a `Complex64` field.
pub mod sci_c64 {
    use super::*;

    pub fn serialize<S: Serializer>(z: &Complex64, s: S) -> Result<S::Ok, S::Error> {
        SciComplex::from(*z).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Complex64, D::Error> {
        SciComplex::deserialize(d).map(Into::into)
    }
}
