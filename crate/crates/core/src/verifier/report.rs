use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IdentityId {
    Thm1I,
    Thm1Ii,
    Thm1Iii,
    CorProducts,
    Thm2,
    NormedI,
    NormedIi,
    NormedIii,
    JacobiG1,
    RosenhainG2,
}

impl IdentityId {
    pub const ALL: [IdentityId; 10] = [
        IdentityId::Thm1I,
        IdentityId::Thm1Ii,
        IdentityId::Thm1Iii,
        IdentityId::CorProducts,
        IdentityId::Thm2,
        IdentityId::NormedI,
        IdentityId::NormedIi,
        IdentityId::NormedIii,
        IdentityId::JacobiG1,
        IdentityId::RosenhainG2,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            IdentityId::Thm1I => "thm1_i",
            IdentityId::Thm1Ii => "thm1_ii",
            IdentityId::Thm1Iii => "thm1_iii",
            IdentityId::CorProducts => "cor_products",
            IdentityId::Thm2 => "thm2",
            IdentityId::NormedI => "normed_i",
            IdentityId::NormedIi => "normed_ii",
            IdentityId::NormedIii => "normed_iii",
            IdentityId::JacobiG1 => "jacobi_g1",
            IdentityId::RosenhainG2 => "rosenhain_g2",
        }
    }

    /// Whether the report carries a resolved sign.
    pub fn has_sign(self) -> bool {
        matches!(self, IdentityId::Thm2 | IdentityId::JacobiG1 | IdentityId::RosenhainG2)
    }
}

impl fmt::Display for IdentityId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for IdentityId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        IdentityId::ALL
            .into_iter()
            .find(|id| id.as_str() == s)
            .ok_or_else(|| Error::Parse(format!("unknown identity '{s}'")))
    }
}

/// Which of the three formulas of a family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    I,
    Ii,
    Iii,
}

impl Variant {
    pub const ALL: [Variant; 3] = [Variant::I, Variant::Ii, Variant::Iii];

    pub fn thm1_id(self) -> IdentityId {
        match self {
            Variant::I => IdentityId::Thm1I,
            Variant::Ii => IdentityId::Thm1Ii,
            Variant::Iii => IdentityId::Thm1Iii,
        }
    }

    pub fn normed_id(self) -> IdentityId {
        match self {
            Variant::I => IdentityId::NormedI,
            Variant::Ii => IdentityId::NormedIi,
            Variant::Iii => IdentityId::NormedIii,
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Variant::I => "i",
            Variant::Ii => "ii",
            Variant::Iii => "iii",
        })
    }
}

impl FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        match s {
            "i" => Ok(Variant::I),
            "ii" => Ok(Variant::Ii),
            "iii" => Ok(Variant::Iii),
            other => Err(Error::Parse(format!("unknown variant '{other}' (expected i, ii or iii)"))),
        }
    }
}

/// Everything needed to rerun a single check.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct InputsDigest {
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub curve_hash: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub tau: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub sigma: Option<String>,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub points: Vec<String>,
    #[serde(with = "crate::numfmt::sci")]
    pub eps: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdentityReport {
    pub identity_id: IdentityId,
    pub genus: usize,
    #[serde(with = "crate::numfmt::sci_c64")]
    pub lhs: Complex64,
    #[serde(with = "crate::numfmt::sci_c64")]
    pub rhs: Complex64,
    #[serde(with = "crate::numfmt::sci")]
    pub rel_residual: f64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub sign: Option<i8>,
    pub inputs_digest: InputsDigest,
}

/// `ln|v|` and `arg v` of a product accumulated factor by factor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct LogValue {
    pub ln_abs: f64,
    pub arg: f64,
}

impl LogValue {
    pub fn one() -> Self {
        Self { ln_abs: 0.0, arg: 0.0 }
    }

    pub fn of(c: Complex64) -> Self {
        Self {
            ln_abs: c.norm().ln(),
            arg: c.arg(),
        }
    }

    pub fn real(x: f64) -> Self {
        Self::of(Complex64::new(x, 0.0))
    }

    pub fn mul(self, o: Self) -> Self {
        Self {
            ln_abs: self.ln_abs + o.ln_abs,
            arg: self.arg + o.arg,
        }
    }

    pub fn div(self, o: Self) -> Self {
        Self {
            ln_abs: self.ln_abs - o.ln_abs,
            arg: self.arg - o.arg,
        }
    }

    pub fn powi(self, n: i32) -> Self {
        Self {
            ln_abs: self.ln_abs * f64::from(n),
            arg: self.arg * f64::from(n),
        }
    }

    pub fn to_complex(self) -> Complex64 {
        Complex64::from_polar(self.ln_abs.exp(), self.arg)
    }
}

/// `|l − r| / max(|l|, |r|)` without forming either value.
pub(crate) fn rel_residual(l: LogValue, r: LogValue) -> f64 {
    let zl = l.ln_abs == f64::NEG_INFINITY;
    let zr = r.ln_abs == f64::NEG_INFINITY;
    if zl && zr {
        return 0.0;
    }
    if zl || zr {
        return 1.0;
    }
    let (big, small) = if l.ln_abs >= r.ln_abs { (l, r) } else { (r, l) };
    let ratio = Complex64::from_polar((small.ln_abs - big.ln_abs).exp(), small.arg - big.arg);
    let res = (Complex64::new(1.0, 0.0) - ratio).norm();
    if res.is_finite() {
        res
    } else {
        f64::INFINITY
    }
}
