//! Half-integer theta characteristics.
//!
//! Entries are stored doubled, so `top[i] == 1` means `α′_i = 1/2`. All
//! reduction and sign bookkeeping is therefore exact integer arithmetic.

use std::fmt;
use std::str::FromStr;

use nalgebra::DVector;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::period_matrix::PeriodMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Parity {
    Even,
    Odd,
}

/// A theta characteristic `(α′; α″)` with half-integer entries.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Characteristic {
    top: Vec<i64>,
    bottom: Vec<i64>,
}

impl Characteristic {
    /// Builds a characteristic from doubled entries (`entry / 2` is the value).
    pub fn from_doubled(top: Vec<i64>, bottom: Vec<i64>) -> Result<Self> {
        if top.len() != bottom.len() {
            return Err(Error::InvalidCharacteristic(format!(
                "top has length {} but bottom has length {}",
                top.len(),
                bottom.len()
            )));
        }
        if top.is_empty() {
            return Err(Error::InvalidCharacteristic("genus must be positive".into()));
        }
        Ok(Self { top, bottom })
    }

    /// Builds a characteristic from real entries, each of which must be a
    /// multiple of 1/2.
    pub fn from_values(top: &[f64], bottom: &[f64]) -> Result<Self> {
        let double = |v: &f64| -> Result<i64> {
            let d = 2.0 * v;
            if !d.is_finite() || (d - d.round()).abs() > 1e-12 {
                return Err(Error::InvalidCharacteristic(format!(
                    "entry {v} is not a multiple of 1/2"
                )));
            }
            Ok(d.round() as i64)
        };
        let top = top.iter().map(double).collect::<Result<Vec<_>>>()?;
        let bottom = bottom.iter().map(double).collect::<Result<Vec<_>>>()?;
        Self::from_doubled(top, bottom)
    }

    pub fn zero(genus: usize) -> Self {
        Self {
            top: vec![0; genus],
            bottom: vec![0; genus],
        }
    }

    pub fn genus(&self) -> usize {
        self.top.len()
    }

    pub fn top_doubled(&self) -> &[i64] {
        &self.top
    }

    pub fn bottom_doubled(&self) -> &[i64] {
        &self.bottom
    }

    pub fn top_values(&self) -> Vec<f64> {
        self.top.iter().map(|&t| t as f64 / 2.0).collect()
    }

    pub fn bottom_values(&self) -> Vec<f64> {
        self.bottom.iter().map(|&b| b as f64 / 2.0).collect()
    }

    pub fn is_canonical(&self) -> bool {
        self.top.iter().chain(&self.bottom).all(|&e| e == 0 || e == 1)
    }

    pub fn is_zero(&self) -> bool {
        self.top.iter().chain(&self.bottom).all(|&e| e == 0)
    }

    /// Reduces every entry into `{0, 1/2}` and returns the sign `s` with
    /// `θ[self] = s · θ[canonical]`.
    pub fn reduce(&self) -> (Characteristic, i8) {
        let canon_top: Vec<i64> = self.top.iter().map(|t| t.rem_euclid(2)).collect();
        let canon_bottom: Vec<i64> = self.bottom.iter().map(|b| b.rem_euclid(2)).collect();
        // n″ = (bottom - canonical bottom) / 2; the sign is (-1)^{Σ c′_i n″_i}
        // with c′_i ∈ {0, 1} the doubled canonical top entries.
        let exponent: i64 = canon_top
            .iter()
            .zip(self.bottom.iter().zip(&canon_bottom))
            .map(|(&ct, (&b, &cb))| ct * ((b - cb) / 2))
            .sum();
        let sign = if exponent.rem_euclid(2) == 0 { 1 } else { -1 };
        (
            Characteristic {
                top: canon_top,
                bottom: canon_bottom,
            },
            sign,
        )
    }

    /// Even iff `4 ᵗα′α″` is an even integer.
    pub fn parity(&self) -> Parity {
        let four_dot: i64 = self.top.iter().zip(&self.bottom).map(|(t, b)| t * b).sum();
        if four_dot.rem_euclid(2) == 0 {
            Parity::Even
        } else {
            Parity::Odd
        }
    }

    /// Entrywise sum reduced mod 1 (canonical result).
    pub fn add_mod1(&self, other: &Characteristic) -> Result<Characteristic> {
        crate::error::check_dim(self.genus(), other.genus())?;
        let top = self
            .top
            .iter()
            .zip(&other.top)
            .map(|(a, b)| (a + b).rem_euclid(2))
            .collect();
        let bottom = self
            .bottom
            .iter()
            .zip(&other.bottom)
            .map(|(a, b)| (a + b).rem_euclid(2))
            .collect();
        Ok(Characteristic { top, bottom })
    }

    /// The half-period `τα′ + α″` attached to the characteristic.
    pub fn half_period(&self, pm: &PeriodMatrix) -> Result<DVector<Complex64>> {
        crate::error::check_dim(pm.genus(), self.genus())?;
        let top = DVector::from_iterator(
            self.genus(),
            self.top_values().into_iter().map(|t| Complex64::new(t, 0.0)),
        );
        let bottom = DVector::from_iterator(
            self.genus(),
            self.bottom_values().into_iter().map(|b| Complex64::new(b, 0.0)),
        );
        Ok(pm.tau() * top + bottom)
    }
}

fn format_half(doubled: i64) -> String {
    if doubled % 2 == 0 {
        format!("{}", doubled / 2)
    } else {
        format!("{doubled}/2")
    }
}

fn parse_half(s: &str) -> Result<i64> {
    let s = s.trim();
    let bad = || Error::InvalidCharacteristic(format!("cannot parse entry {s:?}"));
    if let Some((num, den)) = s.split_once('/') {
        let num: i64 = num.trim().parse().map_err(|_| bad())?;
        match den.trim() {
            "2" => Ok(num),
            "1" => Ok(2 * num),
            _ => Err(bad()),
        }
    } else {
        let v: i64 = s.parse().map_err(|_| bad())?;
        Ok(2 * v)
    }
}

impl fmt::Display for Characteristic {
    /// `a1,…,ag;b1,…,bg` with entries written as `0`, `1/2`, `1`, ...
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let top: Vec<String> = self.top.iter().map(|&t| format_half(t)).collect();
        let bottom: Vec<String> = self.bottom.iter().map(|&b| format_half(b)).collect();
        write!(f, "{};{}", top.join(","), bottom.join(","))
    }
}

impl FromStr for Characteristic {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (top, bottom) = s.split_once(';').ok_or_else(|| {
            Error::InvalidCharacteristic(format!("expected \"a1,..,ag;b1,..,bg\", got {s:?}"))
        })?;
        let top = top.split(',').map(parse_half).collect::<Result<Vec<_>>>()?;
        let bottom = bottom.split(',').map(parse_half).collect::<Result<Vec<_>>>()?;
        Characteristic::from_doubled(top, bottom)
    }
}

impl serde::Serialize for Characteristic {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> serde::Deserialize<'de> for Characteristic {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}
