//! Command-line front end: curve generation, cached periods, theta values and
//! identity checks.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use nalgebra::DVector;
use num_complex::Complex64;
use thetaforge::charsys::Permutation;
use thetaforge::hyperelliptic::{
    periods_cached, random_point, CacheStatus, CurveFile, HyperellipticCurve, PeriodCacheFile,
    PeriodData, SampleRegion, SurfacePoint,
};
use thetaforge::numfmt::{fmt_c64, fmt_f64};
use thetaforge::period_matrix::parse_complex;
use thetaforge::verifier::{
    run_suite, verify_jacobi, verify_rosenhain, verify_thm2, IdentityId, IdentityReport,
    SuiteConfig, Thresholds, Variant, VerifyContext, MAX_RESAMPLES,
};
use thetaforge::{theta_jet, Characteristic, Error, PeriodMatrix};

pub const EXIT_PASS: i32 = 0;
pub const EXIT_VERIFICATION: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_NUMERIC: i32 = 3;

const EPS_RANGE: (f64, f64) = (1e-13, 1e-3);
const CACHE_ENV: &str = "THETAFORGE_CACHE_DIR";

#[derive(Parser, Debug)]
#[command(name = "thetaforge", version, about = "Riemann theta functions on hyperelliptic Jacobians")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Common {
    /// Target accuracy, in [1e-13, 1e-3].
    #[arg(long, global = true, default_value_t = 1e-10)]
    eps: f64,
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Also write the machine-readable result to this file.
    #[arg(long, global = true, value_name = "PATH")]
    json: Option<PathBuf>,
    #[arg(long, global = true, env = CACHE_ENV, value_name = "DIR")]
    cache_dir: Option<PathBuf>,
    #[arg(long, global = true)]
    no_cache: bool,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate or inspect curve files.
    #[command(subcommand)]
    Curve(CurveCmd),
    /// Period matrix and Riemann-constant shift of a curve.
    Periods {
        #[arg(long, value_name = "FILE")]
        curve: PathBuf,
    },
    /// Evaluate θ[α](z; τ) and optionally its derivatives.
    Theta {
        #[command(flatten)]
        source: TauSource,
        /// Characteristic "a1,..,ag;b1,..,bg" with entries 0 or 1/2.
        #[arg(long = "char", value_name = "CHAR")]
        characteristic: Option<String>,
        /// Comma-separated complex coordinates; zero if omitted.
        #[arg(long)]
        z: Option<String>,
        /// Highest derivative order (0, 1 or 2).
        #[arg(long, default_value_t = 0, value_parser = clap::value_parser!(u32).range(0..=2))]
        order: u32,
    },
    /// Check one identity.
    #[command(subcommand)]
    Verify(VerifyCmd),
    /// Run every identity over seeded random curves.
    Suite {
        #[arg(long, default_value_t = 1, value_parser = genus_parser())]
        genus_min: usize,
        #[arg(long, default_value_t = 3, value_parser = genus_parser())]
        genus_max: usize,
        #[arg(long, default_value_t = 3)]
        curves: usize,
        #[arg(long, default_value_t = 5)]
        trials: usize,
        #[arg(long, default_value_t = 4)]
        perms: usize,
        /// One residual threshold for every identity.
        #[arg(long)]
        threshold: Option<f64>,
    },
}

#[derive(Subcommand, Debug)]
enum CurveCmd {
    /// Random branch points in [-2, 2], seeded.
    Gen {
        #[arg(long, value_parser = genus_parser())]
        genus: usize,
        #[arg(long, value_name = "FILE")]
        out: Option<PathBuf>,
    },
    Show {
        #[arg(long, value_name = "FILE")]
        curve: PathBuf,
    },
}

#[derive(Args, Debug, Clone)]
struct TauSource {
    /// Period matrix "t11,t12;t21,t22".
    #[arg(long, conflicts_with = "curve")]
    tau: Option<String>,
    #[arg(long, value_name = "FILE")]
    curve: Option<PathBuf>,
}

#[derive(Args, Debug, Clone)]
struct CurveSource {
    #[arg(long, value_name = "FILE")]
    curve: Option<PathBuf>,
    /// Genus of the seeded random curve used without --curve.
    #[arg(long, default_value_t = 2, value_parser = genus_parser())]
    genus: usize,
    #[arg(long)]
    threshold: Option<f64>,
}

#[derive(Subcommand, Debug)]
enum VerifyCmd {
    Thm1 {
        #[command(flatten)]
        source: CurveSource,
        #[arg(long, default_value = "i")]
        variant: Variant,
    },
    Cor {
        #[command(flatten)]
        source: CurveSource,
    },
    Normed {
        #[command(flatten)]
        source: CurveSource,
        #[arg(long, default_value = "i")]
        variant: Variant,
    },
    Thm2 {
        #[command(flatten)]
        source: CurveSource,
        #[arg(long)]
        tau: Option<String>,
        /// One-line permutation "c1,c2,…" of 1..2g+2; identity if omitted.
        #[arg(long)]
        sigma: Option<String>,
    },
    Jacobi {
        #[arg(long)]
        tau: String,
        #[arg(long)]
        threshold: Option<f64>,
    },
    Rosenhain {
        #[command(flatten)]
        source: CurveSource,
        #[arg(long)]
        tau: Option<String>,
        #[arg(long)]
        sigma: Option<String>,
    },
}

fn genus_parser() -> clap::builder::RangedU64ValueParser<usize> {
    clap::builder::RangedU64ValueParser::<usize>::new().range(1..=4)
}

/// How a command ended, mapped onto the exit code.
#[derive(Debug)]
enum Failure {
    Usage(String),
    Numeric(String),
    Verification(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Quadrature(_)
            | Error::PathConstruction(_)
            | Error::GenericPosition(_)
            | Error::NumericFailure(_) => Failure::Numeric(e.to_string()),
            _ => Failure::Usage(e.to_string()),
        }
    }
}

type CmdResult = Result<(), Failure>;

/// Runs the command line and returns the process exit code.
pub fn execute<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_PASS };
            let _ = e.print();
            return code;
        }
    };
    match run(&cli) {
        Ok(()) => EXIT_PASS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            EXIT_USAGE
        }
        Err(Failure::Numeric(msg)) => {
            eprintln!("error: {msg}");
            EXIT_NUMERIC
        }
        Err(Failure::Verification(msg)) => {
            eprintln!("verification failed: {msg}");
            EXIT_VERIFICATION
        }
    }
}

fn run(cli: &Cli) -> CmdResult {
    let c = &cli.common;
    if !(c.eps >= EPS_RANGE.0 && c.eps <= EPS_RANGE.1) {
        return Err(Failure::Usage(format!(
            "--eps {} outside [{:e}, {:e}]",
            c.eps, EPS_RANGE.0, EPS_RANGE.1
        )));
    }
    match &cli.command {
        Command::Curve(CurveCmd::Gen { genus, out }) => curve_gen(c, *genus, out.as_deref()),
        Command::Curve(CurveCmd::Show { curve }) => curve_show(c, curve),
        Command::Periods { curve } => periods_cmd(c, curve),
        Command::Theta {
            source,
            characteristic,
            z,
            order,
        } => theta_cmd(c, source, characteristic.as_deref(), z.as_deref(), *order),
        Command::Verify(v) => verify_cmd(c, v),
        Command::Suite {
            genus_min,
            genus_max,
            curves,
            trials,
            perms,
            threshold,
        } => {
            let config = SuiteConfig {
                genus_min: *genus_min,
                genus_max: *genus_max,
                curves_per_genus: *curves,
                trials_per_curve: *trials,
                permutations_per_genus: *perms,
                seed: c.seed,
                eps: c.eps,
                thresholds: threshold.map(Thresholds::uniform).unwrap_or_default(),
            };
            suite_cmd(c, &config)
        }
    }
}

fn cache_dir(c: &Common) -> Option<PathBuf> {
    if c.no_cache {
        return None;
    }
    if let Some(dir) = &c.cache_dir {
        return Some(dir.clone());
    }
    let base = std::env::var_os("XDG_CACHE_HOME")
        .map(PathBuf::from)
        .or_else(|| std::env::var_os("HOME").map(|h| PathBuf::from(h).join(".cache")))?;
    Some(base.join("thetaforge"))
}

fn write_json(c: &Common, value: &impl serde::Serialize) -> CmdResult {
    if let Some(path) = &c.json {
        let mut text = serde_json::to_string_pretty(value).map_err(|e| Failure::Usage(e.to_string()))?;
        text.push('\n');
        fs::write(path, text).map_err(|e| Failure::Usage(format!("writing {}: {e}", path.display())))?;
    }
    Ok(())
}

fn read_curve(path: &Path) -> Result<HyperellipticCurve, Failure> {
    let text = fs::read_to_string(path)
        .map_err(|e| Failure::Usage(format!("reading {}: {e}", path.display())))?;
    let file: CurveFile = serde_json::from_str(&text)
        .map_err(|e| Failure::Usage(format!("parsing {}: {e}", path.display())))?;
    Ok(HyperellipticCurve::from_file(&file)?)
}

fn load_periods(c: &Common, curve: &HyperellipticCurve) -> Result<(PeriodData, CacheStatus), Failure> {
    let dir = cache_dir(c);
    Ok(periods_cached(curve, c.eps, dir.as_deref())?)
}

fn curve_gen(c: &Common, genus: usize, out: Option<&Path>) -> CmdResult {
    let curve = HyperellipticCurve::random(genus, c.seed)?;
    let mut text = serde_json::to_string_pretty(&curve.to_file()).expect("curve file serialises");
    text.push('\n');
    match out {
        Some(path) => {
            fs::write(path, &text).map_err(|e| Failure::Usage(format!("writing {}: {e}", path.display())))?;
            println!("wrote genus-{genus} curve to {}", path.display());
        }
        None => print!("{text}"),
    }
    write_json(c, &curve.to_file())
}

fn curve_show(c: &Common, path: &Path) -> CmdResult {
    let curve = read_curve(path)?;
    println!("genus          {}", curve.genus());
    println!("hash           {}", curve.hash());
    println!("span           {}", fmt_f64(curve.span()));
    println!("min gap        {}", fmt_f64(curve.min_gap()));
    for (j, a) in curve.branch_points().iter().enumerate() {
        println!("a_{:<2}           {}", j + 1, fmt_f64(*a));
    }
    write_json(c, &curve.to_file())
}

fn print_matrix(name: &str, m: &nalgebra::DMatrix<Complex64>) {
    for i in 0..m.nrows() {
        let row: Vec<String> = (0..m.ncols()).map(|j| fmt_c64(m[(i, j)])).collect();
        let label = if i == 0 { name } else { "" };
        println!("{label:<8} [{}]", row.join(", "));
    }
}

fn periods_cmd(c: &Common, path: &Path) -> CmdResult {
    let curve = read_curve(path)?;
    let (pd, status) = load_periods(c, &curve)?;
    println!("curve    {} (genus {})", curve.hash(), curve.genus());
    println!("cache    {status:?}");
    print_matrix("tau", pd.tau.tau());
    print_matrix("A", &pd.a_periods);
    let delta: Vec<String> = pd.delta.iter().map(|z| fmt_c64(*z)).collect();
    println!("delta    [{}]", delta.join(", "));
    println!("lambda   {}", fmt_f64(pd.tau.lambda_min()));
    write_json(c, &PeriodCacheFile::from_data(&curve, &pd))
}

fn resolve_tau(c: &Common, source: &TauSource) -> Result<PeriodMatrix, Failure> {
    match (&source.tau, &source.curve) {
        (Some(t), _) => Ok(PeriodMatrix::parse(t)?),
        (None, Some(path)) => Ok(load_periods(c, &read_curve(path)?)?.0.tau),
        (None, None) => Err(Failure::Usage("one of --tau or --curve is required".into())),
    }
}

fn theta_cmd(c: &Common, source: &TauSource, ch: Option<&str>, z: Option<&str>, order: u32) -> CmdResult {
    let pm = resolve_tau(c, source)?;
    let g = pm.genus();
    let ch: Characteristic = match ch {
        Some(s) => s.parse()?,
        None => Characteristic::zero(g),
    };
    let z = match z {
        Some(s) => DVector::from_vec(s.split(',').map(parse_complex).collect::<Result<Vec<_>, _>>()?),
        None => DVector::zeros(g),
    };
    let jet = theta_jet(&pm, &ch, &z, c.eps, order)?;
    let v = jet.value();
    println!("theta[{ch}]  {}  (error ≤ {})", fmt_c64(v.value()), fmt_f64(v.error_bound));
    println!("radius        {}  ({} lattice points)", fmt_f64(jet.radius), jet.points);
    if order >= 1 {
        for (i, d) in jet.grad_values().iter().enumerate() {
            println!("d/dz{}         {}", i + 1, fmt_c64(d.value()));
        }
    }
    if order >= 2 {
        for (i, row) in jet.hess_values().iter().enumerate() {
            let cells: Vec<String> = row.iter().map(|d| fmt_c64(d.value())).collect();
            println!("d2/dz{}dz*     [{}]", i + 1, cells.join(", "));
        }
    }
    let mut out = serde_json::json!({
        "schema": 1,
        "characteristic": ch.to_string(),
        "z": z.iter().map(|w| fmt_c64(*w)).collect::<Vec<_>>(),
        "eps": fmt_f64(c.eps),
        "value": v,
        "radius": fmt_f64(jet.radius),
        "points": jet.points,
    });
    if order >= 1 {
        out["grad"] = serde_json::to_value(jet.grad_values()).expect("serialisable");
    }
    if order >= 2 {
        out["hess"] = serde_json::to_value(jet.hess_values()).expect("serialisable");
    }
    write_json(c, &out)
}

fn curve_for(c: &Common, source: &CurveSource) -> Result<HyperellipticCurve, Failure> {
    match &source.curve {
        Some(path) => read_curve(path),
        None => Ok(HyperellipticCurve::random(source.genus, c.seed)?),
    }
}

fn context_for(c: &Common, source: &CurveSource) -> Result<VerifyContext, Failure> {
    let curve = curve_for(c, source)?;
    let (pd, _) = load_periods(c, &curve)?;
    Ok(VerifyContext::new(curve, pd, c.eps)?)
}

fn parse_sigma(s: Option<&str>, genus: usize) -> Result<Permutation, Failure> {
    match s {
        Some(s) => {
            let p: Permutation = s.parse()?;
            if p.genus() != genus {
                return Err(Failure::Usage(format!(
                    "--sigma permutes {} letters but the genus needs {}",
                    p.images().len(),
                    2 * genus + 2
                )));
            }
            Ok(p)
        }
        None => Ok(Permutation::identity(genus)),
    }
}

/// Seeded point tuples, redrawn while the identity reports special position.
fn with_points(
    c: &Common,
    ctx: &VerifyContext,
    check: impl Fn(&[SurfacePoint], &SurfacePoint) -> thetaforge::Result<IdentityReport>,
) -> Result<IdentityReport, Failure> {
    let g = ctx.genus();
    let region = SampleRegion::default();
    let mut last = None;
    for attempt in 0..MAX_RESAMPLES as u64 {
        let base = c.seed.wrapping_mul(1_000_003).wrapping_add(attempt * 64);
        let ps: Vec<SurfacePoint> = (0..g as u64)
            .map(|j| random_point(&ctx.curve, base + j, &region))
            .collect();
        let q = random_point(&ctx.curve, base + 63, &region);
        match check(&ps, &q) {
            Ok(mut r) => {
                r.inputs_digest.seed = Some(c.seed);
                return Ok(r);
            }
            Err(e @ Error::GenericPosition(_)) => last = Some(e),
            Err(e) => return Err(e.into()),
        }
    }
    Err(last.expect("at least one attempt").into())
}

fn default_threshold(id: IdentityId) -> f64 {
    match id {
        IdentityId::JacobiG1 => 1e-9,
        IdentityId::RosenhainG2 => 1e-7,
        other => Thresholds::default().for_identity(other),
    }
}

fn finish_report(c: &Common, report: &IdentityReport, threshold: Option<f64>) -> CmdResult {
    let limit = threshold.unwrap_or_else(|| default_threshold(report.identity_id));
    let ok = report.rel_residual <= limit;
    println!("identity     {} (genus {})", report.identity_id, report.genus);
    println!("lhs          {}", fmt_c64(report.lhs));
    println!("rhs          {}", fmt_c64(report.rhs));
    println!("residual     {}  (threshold {})", fmt_f64(report.rel_residual), fmt_f64(limit));
    if let Some(sign) = report.sign {
        println!("sign         {sign:+}");
    }
    println!("result       {}", if ok { "PASS" } else { "FAIL" });
    write_json(c, report)?;
    if ok {
        Ok(())
    } else {
        Err(Failure::Verification(format!(
            "{} residual {:e} exceeds {:e}",
            report.identity_id, report.rel_residual, limit
        )))
    }
}

fn verify_cmd(c: &Common, v: &VerifyCmd) -> CmdResult {
    match v {
        VerifyCmd::Thm1 { source, variant } => {
            let ctx = context_for(c, source)?;
            let r = with_points(c, &ctx, |ps, q| ctx.verify_thm1(*variant, ps, q))?;
            finish_report(c, &r, source.threshold)
        }
        VerifyCmd::Cor { source } => {
            let ctx = context_for(c, source)?;
            let r = with_points(c, &ctx, |ps, q| ctx.verify_cor_products(ps, q))?;
            finish_report(c, &r, source.threshold)
        }
        VerifyCmd::Normed { source, variant } => {
            let ctx = context_for(c, source)?;
            let r = with_points(c, &ctx, |ps, q| ctx.verify_normed(*variant, ps, q))?;
            finish_report(c, &r, source.threshold)
        }
        VerifyCmd::Thm2 { source, tau, sigma } | VerifyCmd::Rosenhain { source, tau, sigma } => {
            let rosenhain = matches!(v, VerifyCmd::Rosenhain { .. });
            let r = match tau {
                Some(t) => {
                    let pm = PeriodMatrix::parse(t)?;
                    let sigma = parse_sigma(sigma.as_deref(), pm.genus())?;
                    if rosenhain {
                        verify_rosenhain(&pm, &sigma, c.eps)?
                    } else {
                        verify_thm2(&pm, &sigma, c.eps)?
                    }
                }
                None => {
                    let mut source = source.clone();
                    if rosenhain && source.curve.is_none() {
                        source.genus = 2;
                    }
                    let ctx = context_for(c, &source)?;
                    if rosenhain && ctx.genus() != 2 {
                        return Err(Failure::Usage(format!(
                            "rosenhain needs a genus-2 curve, got genus {}",
                            ctx.genus()
                        )));
                    }
                    let sigma = parse_sigma(sigma.as_deref(), ctx.genus())?;
                    let mut r = ctx.verify_thm2(&sigma)?;
                    if rosenhain {
                        r.identity_id = IdentityId::RosenhainG2;
                    }
                    r
                }
            };
            finish_report(c, &r, source.threshold)
        }
        VerifyCmd::Jacobi { tau, threshold } => {
            let r = verify_jacobi(parse_complex(tau)?, c.eps)?;
            finish_report(c, &r, *threshold)
        }
    }
}

fn suite_cmd(c: &Common, config: &SuiteConfig) -> CmdResult {
    if config.genus_min > config.genus_max {
        return Err(Failure::Usage("--genus-min exceeds --genus-max".into()));
    }
    let report = run_suite(config)?;
    let mut table = String::new();
    let _ = writeln!(table, "{:<14} {:>8} {:>24} {:>12}", "identity", "checks", "max residual", "threshold");
    for id in IdentityId::ALL {
        let n = report.reports.iter().filter(|r| r.identity_id == id).count();
        if let Some(max) = report.max_residuals.get(&id) {
            let _ = writeln!(
                table,
                "{:<14} {:>8} {:>24} {:>12}",
                id.as_str(),
                n,
                max,
                format!("{:e}", config.thresholds.for_identity(id))
            );
        }
    }
    print!("{table}");
    for (genus, row) in &report.sign_table {
        for (sigma, e) in row {
            let state = if e.consistent { "" } else { "  INCONSISTENT" };
            println!("sign {genus} σ={sigma:<24} {:+}  over {} curves{state}", e.sign, e.curves);
        }
    }
    for f in &report.failures {
        println!(
            "failure genus {} curve {} trial {:?}: {}",
            f.genus, f.curve, f.trial, f.error
        );
    }
    println!("result {}", if report.pass { "PASS" } else { "FAIL" });
    write_json(c, &report)?;
    if report.pass {
        Ok(())
    } else {
        Err(Failure::Verification("suite thresholds not met".into()))
    }
}
