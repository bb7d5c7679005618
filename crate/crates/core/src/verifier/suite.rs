use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::identities::VerifyContext;
use super::report::{IdentityId, IdentityReport, Variant};
use crate::charsys::Permutation;
use crate::error::{check_tolerance, Error, Result};
use crate::hyperelliptic::{periods, random_point_from, HyperellipticCurve, SampleRegion, SurfacePoint};

/// Attempts at drawing a point tuple in generic position.
pub const MAX_RESAMPLES: usize = 10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Thresholds {
    #[serde(with = "crate::numfmt::sci")]
    pub thm1: f64,
    #[serde(with = "crate::numfmt::sci")]
    pub cor_products: f64,
    #[serde(with = "crate::numfmt::sci")]
    pub normed: f64,
    #[serde(with = "crate::numfmt::sci")]
    pub thm2: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Self {
            thm1: 1e-6,
            cor_products: 1e-8,
            normed: 1e-6,
            thm2: 1e-6,
        }
    }
}

impl Thresholds {
    pub fn uniform(t: f64) -> Self {
        Self {
            thm1: t,
            cor_products: t,
            normed: t,
            thm2: t,
        }
    }

    pub fn for_identity(&self, id: IdentityId) -> f64 {
        match id {
            IdentityId::Thm1I | IdentityId::Thm1Ii | IdentityId::Thm1Iii => self.thm1,
            IdentityId::CorProducts => self.cor_products,
            IdentityId::NormedI | IdentityId::NormedIi | IdentityId::NormedIii => self.normed,
            IdentityId::Thm2 | IdentityId::JacobiG1 | IdentityId::RosenhainG2 => self.thm2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteConfig {
    pub genus_min: usize,
    pub genus_max: usize,
    pub curves_per_genus: usize,
    pub trials_per_curve: usize,
    /// Permutations per genus for the theta-constant formula, the identity first.
    pub permutations_per_genus: usize,
    pub seed: u64,
    #[serde(with = "crate::numfmt::sci")]
    pub eps: f64,
    pub thresholds: Thresholds,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        Self {
            genus_min: 1,
            genus_max: 3,
            curves_per_genus: 3,
            trials_per_curve: 5,
            permutations_per_genus: 4,
            seed: 0,
            eps: 1e-10,
            thresholds: Thresholds::default(),
        }
    }
}

impl SuiteConfig {
    pub fn validate(&self) -> Result<()> {
        check_tolerance(self.eps)?;
        if self.genus_min == 0 || self.genus_min > self.genus_max || self.genus_max > 4 {
            return Err(Error::InvalidCurve(format!(
                "genus range {}..={} must lie in 1..=4",
                self.genus_min, self.genus_max
            )));
        }
        if self.curves_per_genus == 0 {
            return Err(Error::InvalidCurve("need at least one curve per genus".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialFailure {
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub identity_id: Option<IdentityId>,
    pub genus: usize,
    pub curve: usize,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub trial: Option<usize>,
    pub error: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignEntry {
    pub sign: i8,
    pub consistent: bool,
    pub curves: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub schema: u32,
    pub config: SuiteConfig,
    pub reports: Vec<IdentityReport>,
    pub max_residuals: BTreeMap<IdentityId, String>,
    /// Keyed by genus (`"g2"`), then by permutation.
    pub sign_table: BTreeMap<String, BTreeMap<String, SignEntry>>,
    pub failures: Vec<TrialFailure>,
    pub pass: bool,
}

/// Independent generator for the component labelled `tag`.
fn rng_for(seed: u64, tag: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(tag);
    rng
}

fn curve_tag(g: usize, c: usize) -> u64 {
    ((g as u64) << 40) | ((c as u64) << 20)
}

/// The identity followed by `count − 1` seeded random permutations.
pub fn suite_permutations(genus: usize, count: usize, seed: u64) -> Vec<Permutation> {
    let mut out = vec![Permutation::identity(genus)];
    let mut rng = rng_for(seed, (genus as u64) << 56);
    let mut images: Vec<usize> = (1..=2 * genus + 2).collect();
    while out.len() < count {
        images.shuffle(&mut rng);
        let p = Permutation::new(images.clone()).expect("shuffle of 1..=2g+2");
        if !out.contains(&p) {
            out.push(p);
        }
        if out.len() as u128 >= (1..=(2 * genus as u128 + 2)).product::<u128>() {
            break;
        }
    }
    out
}

/// `g + 1` random points `p_1, …, p_g, q`.
fn draw_points(curve: &HyperellipticCurve, rng: &mut ChaCha8Rng) -> (Vec<SurfacePoint>, SurfacePoint) {
    let region = SampleRegion::default();
    let g = curve.genus();
    let ps = (0..g).map(|_| random_point_from(curve, rng, &region)).collect();
    let q = random_point_from(curve, rng, &region);
    (ps, q)
}

/// All point identities on one tuple.
fn point_checks(ctx: &VerifyContext, ps: &[SurfacePoint], q: &SurfacePoint) -> Result<Vec<IdentityReport>> {
    let mut out = Vec::with_capacity(7);
    for v in Variant::ALL {
        out.push(ctx.verify_thm1(v, ps, q)?);
    }
    out.push(ctx.verify_cor_products(ps, q)?);
    for v in Variant::ALL {
        out.push(ctx.verify_normed(v, ps, q)?);
    }
    Ok(out)
}

/// Point identities on one trial, redrawing non-generic tuples.
pub fn run_trial(ctx: &VerifyContext, seed: u64, tag: u64) -> Result<Vec<IdentityReport>> {
    let mut rng = rng_for(seed, tag);
    let mut last = None;
    for _ in 0..MAX_RESAMPLES {
        let (ps, q) = draw_points(&ctx.curve, &mut rng);
        match point_checks(ctx, &ps, &q) {
            Ok(mut reports) => {
                for r in &mut reports {
                    r.inputs_digest.seed = Some(seed);
                }
                return Ok(reports);
            }
            Err(e @ Error::GenericPosition(_)) => last = Some(e),
            Err(e) => return Err(e),
        }
    }
    Err(last.expect("at least one attempt"))
}

struct CurveOutcome {
    reports: Vec<IdentityReport>,
    failures: Vec<TrialFailure>,
}

fn run_curve(config: &SuiteConfig, g: usize, c: usize, perms: &[Permutation]) -> CurveOutcome {
    let mut failures = Vec::new();
    let fail = |identity_id, trial, e: Error| TrialFailure {
        identity_id,
        genus: g,
        curve: c,
        trial,
        error: e.to_string(),
    };
    let curve_seed = {
        use rand::RngCore;
        rng_for(config.seed, curve_tag(g, c)).next_u64()
    };
    let ctx = HyperellipticCurve::random(g, curve_seed)
        .and_then(|curve| {
            let pd = periods(&curve, config.eps)?;
            VerifyContext::new(curve, pd, config.eps)
        });
    let ctx = match ctx {
        Ok(ctx) => ctx,
        Err(e) => {
            return CurveOutcome {
                reports: Vec::new(),
                failures: vec![fail(None, None, e)],
            }
        }
    };
    let trials: Vec<Result<Vec<IdentityReport>>> = (0..config.trials_per_curve)
        .into_par_iter()
        .map(|t| run_trial(&ctx, config.seed, curve_tag(g, c) | (t as u64 + 1)))
        .collect();
    let mut reports = Vec::new();
    for (t, r) in trials.into_iter().enumerate() {
        match r {
            Ok(rs) => reports.extend(rs),
            Err(e) => failures.push(fail(None, Some(t), e)),
        }
    }
    for sigma in perms {
        match ctx.verify_thm2(sigma) {
            Ok(mut r) => {
                r.inputs_digest.seed = Some(config.seed);
                reports.push(r);
            }
            Err(e) => failures.push(fail(Some(IdentityId::Thm2), None, e)),
        }
    }
    CurveOutcome { reports, failures }
}

/// Runs every identity over seeded random curves and points. Output depends
/// only on `config`.
pub fn run_suite(config: &SuiteConfig) -> Result<SuiteReport> {
    config.validate()?;
    let perms: BTreeMap<usize, Vec<Permutation>> = (config.genus_min..=config.genus_max)
        .map(|g| (g, suite_permutations(g, config.permutations_per_genus, config.seed)))
        .collect();
    let jobs: Vec<(usize, usize)> = (config.genus_min..=config.genus_max)
        .flat_map(|g| (0..config.curves_per_genus).map(move |c| (g, c)))
        .collect();
    let outcomes: Vec<CurveOutcome> = jobs
        .par_iter()
        .map(|&(g, c)| run_curve(config, g, c, &perms[&g]))
        .collect();

    let mut reports = Vec::new();
    let mut failures = Vec::new();
    for o in outcomes {
        reports.extend(o.reports);
        failures.extend(o.failures);
    }

    let mut max_res: BTreeMap<IdentityId, f64> = BTreeMap::new();
    let mut pass = failures.is_empty();
    for r in &reports {
        let entry = max_res.entry(r.identity_id).or_insert(0.0);
        // NaN must dominate
        if !(r.rel_residual <= *entry) {
            *entry = r.rel_residual;
        }
        if !(r.rel_residual <= config.thresholds.for_identity(r.identity_id)) {
            pass = false;
        }
    }

    let mut sign_table: BTreeMap<String, BTreeMap<String, SignEntry>> = BTreeMap::new();
    for r in reports.iter().filter(|r| r.identity_id.has_sign()) {
        let (Some(sign), Some(sigma)) = (r.sign, r.inputs_digest.sigma.clone()) else {
            continue;
        };
        let row = sign_table.entry(format!("g{}", r.genus)).or_default();
        row.entry(sigma)
            .and_modify(|e| {
                e.consistent &= e.sign == sign;
                e.curves += 1;
            })
            .or_insert(SignEntry {
                sign,
                consistent: true,
                curves: 1,
            });
    }
    if sign_table.values().flat_map(|row| row.values()).any(|e| !e.consistent) {
        pass = false;
    }

    Ok(SuiteReport {
        schema: 1,
        config: config.clone(),
        reports,
        max_residuals: max_res
            .into_iter()
            .map(|(k, v)| (k, crate::numfmt::fmt_f64(v)))
            .collect(),
        sign_table,
        failures,
        pass,
    })
}
