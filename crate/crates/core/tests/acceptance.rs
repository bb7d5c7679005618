//! Acceptance run: one PASS/FAIL line per criterion, nonzero exit on failure.

use std::f64::consts::PI;
use std::time::{Duration, Instant};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thetaforge::charsys::{fundamental_system, is_fundamental, Permutation};
use thetaforge::hyperelliptic::{
    divisor_class, lattice_residual, periods, random_point, weierstrass_class, Divisor,
    HyperellipticCurve, PeriodData, SampleRegion, SurfacePoint,
};
use thetaforge::norms::norm_theta;
use thetaforge::verifier::{run_trial, verify_thm2, IdentityId, VerifyContext};
use thetaforge::{theta, theta_grad, theta_hess, Characteristic, Parity, PeriodMatrix};
use thetaforge::charsys::IndexSet;

const EPS: f64 = 1e-12;

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(elapsed: Duration, limit: Duration) -> Result<(), String> {
    ensure(elapsed <= limit, || format!("runtime {elapsed:?} exceeds {limit:?}"))
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// `Σ_{|n| ≤ 40}` genus-one series with characteristic `[a; b]`.
fn series_g1(tau: Complex64, a: f64, b: f64, derivative: bool) -> Complex64 {
    let i = c(0.0, 1.0);
    (-40..=40)
        .map(|n| {
            let m = n as f64 + a;
            let t = (i * PI * m * m * tau + 2.0 * PI * i * m * b).exp();
            if derivative {
                t * (2.0 * PI * i * m)
            } else {
                t
            }
        })
        .sum()
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let tau = c(rng.gen_range(-0.4..=0.4), rng.gen_range(0.5..=3.0));
        let pm = PeriodMatrix::new(DMatrix::from_element(1, 1, tau)).map_err(|e| e.to_string())?;
        let r = verify_thm2(&pm, &Permutation::identity(1), 1e-13).map_err(|e| e.to_string())?;
        ensure(r.sign == Some(-1), || format!("τ={tau}: sign {:?}", r.sign))?;
        ensure(r.rel_residual <= 1e-9, || format!("τ={tau}: residual {:e}", r.rel_residual))?;
        let oracle = series_g1(tau, 0.5, 0.5, true);
        let rhs = -PI * series_g1(tau, 0.0, 0.0, false) * series_g1(tau, 0.5, 0.0, false) * series_g1(tau, 0.0, 0.5, false);
        ensure((oracle - rhs).norm() <= 1e-10 * oracle.norm(), || format!("oracle disagrees at τ={tau}"))?;
        ensure((r.lhs - oracle).norm() <= 1e-10 * oracle.norm(), || format!("lhs off the series at τ={tau}"))?;
        worst = worst.max(r.rel_residual);
    }
    within(start.elapsed(), Duration::from_secs(5))?;
    Ok(format!("20 τ, sign −1 throughout, max residual {worst:.2e}, {:?}", start.elapsed()))
}

fn context(g: usize, seed: u64) -> Result<VerifyContext, String> {
    let curve = HyperellipticCurve::random(g, seed).map_err(|e| e.to_string())?;
    let pd = periods(&curve, EPS).map_err(|e| e.to_string())?;
    VerifyContext::new(curve, pd, EPS).map_err(|e| e.to_string())
}

fn criterion_2() -> Outcome {
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    for g in [2usize, 3] {
        let mut rng = ChaCha8Rng::seed_from_u64(20 + g as u64);
        let sigmas: Vec<Permutation> = (0..10)
            .map(|_| {
                let mut images: Vec<usize> = (1..=2 * g + 2).collect();
                rand::seq::SliceRandom::shuffle(images.as_mut_slice(), &mut rng);
                Permutation::new(images).expect("shuffled")
            })
            .collect();
        let mut signs: Vec<Vec<i8>> = vec![Vec::new(); sigmas.len()];
        for curve in 0..5 {
            let ctx = context(g, 200 + 10 * g as u64 + curve)?;
            for (s, sigma) in sigmas.iter().enumerate() {
                let r = ctx.verify_thm2(sigma).map_err(|e| format!("g={g} σ={sigma}: {e}"))?;
                let ratio = r.lhs / r.rhs;
                ensure(r.rel_residual <= 1e-6, || format!("g={g} σ={sigma}: residual {:e}", r.rel_residual))?;
                ensure(ratio.im.abs() <= 1e-4, || format!("g={g} σ={sigma}: Im ratio {:e}", ratio.im))?;
                worst = worst.max(r.rel_residual);
                signs[s].push(r.sign.expect("thm2 carries a sign"));
            }
        }
        for (sigma, s) in sigmas.iter().zip(&signs) {
            ensure(s.iter().all(|&x| x == s[0]), || format!("g={g} σ={sigma}: signs {s:?}"))?;
        }
    }
    within(start.elapsed(), Duration::from_secs(120))?;
    Ok(format!("g=2,3 × 5 curves × 10 σ, signs stable, max residual {worst:.2e}, {:?}", start.elapsed()))
}

/// Reports of the point identities for criteria 3–5.
fn point_reports() -> Result<(Vec<thetaforge::verifier::IdentityReport>, Duration), String> {
    let start = Instant::now();
    let mut all = Vec::new();
    for g in [2usize, 3] {
        for curve in 0..3u64 {
            let ctx = context(g, 300 + 10 * g as u64 + curve)?;
            for trial in 0..10u64 {
                let rs = run_trial(&ctx, 99, (g as u64) << 32 | curve << 16 | trial)
                    .map_err(|e| format!("g={g} curve {curve} trial {trial}: {e}"))?;
                all.extend(rs);
            }
        }
    }
    Ok((all, start.elapsed()))
}

fn max_of(reports: &[thetaforge::verifier::IdentityReport], ids: &[IdentityId]) -> f64 {
    reports
        .iter()
        .filter(|r| ids.contains(&r.identity_id))
        .map(|r| r.rel_residual)
        .fold(0.0, |m, v| if v > m || v.is_nan() { v } else { m })
}

fn criterion_3(reports: &[thetaforge::verifier::IdentityReport], elapsed: Duration) -> Outcome {
    let mut parts = Vec::new();
    for id in [IdentityId::Thm1I, IdentityId::Thm1Ii, IdentityId::Thm1Iii] {
        let n = reports.iter().filter(|r| r.identity_id == id).count();
        ensure(n == 60, || format!("{id}: {n} reports instead of 60"))?;
        let m = max_of(reports, &[id]);
        ensure(m <= 1e-6, || format!("{id}: max residual {m:e}"))?;
        parts.push(format!("{id} {m:.2e}"));
    }
    within(elapsed, Duration::from_secs(300))?;
    Ok(format!("{} over 60 tuples each, {elapsed:?}", parts.join(", ")))
}

fn criterion_4(reports: &[thetaforge::verifier::IdentityReport]) -> Outcome {
    let m = max_of(reports, &[IdentityId::CorProducts]);
    ensure(m <= 1e-8, || format!("max residual {m:e}"))?;
    Ok(format!("max residual {m:.2e} over 60 tuples"))
}

fn criterion_5(reports: &[thetaforge::verifier::IdentityReport]) -> Outcome {
    let mut worst_gap: f64 = 0.0;
    for (normed, plain) in [
        (IdentityId::NormedI, IdentityId::Thm1I),
        (IdentityId::NormedIi, IdentityId::Thm1Ii),
        (IdentityId::NormedIii, IdentityId::Thm1Iii),
    ] {
        let m = max_of(reports, &[normed]);
        ensure(m <= 1e-6, || format!("{normed}: max residual {m:e}"))?;
        let ns: Vec<_> = reports.iter().filter(|r| r.identity_id == normed).collect();
        let ps: Vec<_> = reports.iter().filter(|r| r.identity_id == plain).collect();
        ensure(ns.len() == ps.len() && !ns.is_empty(), || "unpaired reports".into())?;
        for (n, p) in ns.iter().zip(&ps) {
            ensure(n.inputs_digest.points == p.inputs_digest.points, || "misaligned tuples".into())?;
            worst_gap = worst_gap.max((n.rel_residual - p.rel_residual).abs());
        }
    }
    ensure(worst_gap <= 1e-6, || format!("normed vs unnormed residual gap {worst_gap:e}"))?;
    Ok(format!("max normed residual {:.2e}, max gap to unnormed {worst_gap:.2e}",
        max_of(reports, &[IdentityId::NormedI, IdentityId::NormedIi, IdentityId::NormedIii])))
}

fn agm(mut a: f64, mut b: f64) -> f64 {
    for _ in 0..60 {
        let t = 0.5 * (a + b);
        b = (a * b).sqrt();
        a = t;
    }
    a
}

fn agm_tau(a: &[f64]) -> Complex64 {
    let k2 = (a[2] - a[1]) * (a[3] - a[0]) / ((a[3] - a[1]) * (a[2] - a[0]));
    let k = |m: f64| PI / (2.0 * agm(1.0, (1.0 - m).sqrt()));
    c(0.0, k(k2) / k(1.0 - k2))
}

/// `C·B` before any symmetrisation.
fn raw_tau(pd: &PeriodData) -> DMatrix<Complex64> {
    &pd.basis_change * pd.b_periods.transpose()
}

fn criterion_6() -> Outcome {
    let mut worst_agm: f64 = 0.0;
    for seed in 0..10 {
        let curve = HyperellipticCurve::random(1, 600 + seed).map_err(|e| e.to_string())?;
        let pd = periods(&curve, 1e-13).map_err(|e| e.to_string())?;
        let d = (pd.tau.tau()[(0, 0)] - agm_tau(curve.branch_points())).norm();
        ensure(d <= 1e-10, || format!("AGM mismatch {d:e} on seed {seed}"))?;
        worst_agm = worst_agm.max(d);
    }
    let mut worst_sym: f64 = 0.0;
    let mut curves = 0;
    for g in 1..=4usize {
        for seed in 0..5 {
            let curve = HyperellipticCurve::random(g, 650 + 10 * g as u64 + seed).map_err(|e| e.to_string())?;
            let pd = periods(&curve, EPS).map_err(|e| e.to_string())?;
            let t = raw_tau(&pd);
            let sym = (&t - t.transpose()).iter().map(|z| z.norm()).fold(0.0, f64::max);
            ensure(sym <= 1e-9, || format!("g={g}: symmetry residual {sym:e}"))?;
            let y = t.map(|z| z.im);
            let y = 0.5 * (&y + y.transpose());
            ensure(y.cholesky().is_some(), || format!("g={g}: Im τ not positive definite"))?;
            worst_sym = worst_sym.max(sym);
            curves += 1;
        }
    }
    let mut worst_affine: f64 = 0.0;
    for g in 1..=4usize {
        let curve = HyperellipticCurve::random(g, 700 + g as u64).map_err(|e| e.to_string())?;
        let moved: Vec<f64> = curve.branch_points().iter().map(|a| 2.0 * a + 1.0).collect();
        let moved = HyperellipticCurve::new(&moved).map_err(|e| e.to_string())?;
        let t1 = periods(&curve, EPS).map_err(|e| e.to_string())?;
        let t2 = periods(&moved, EPS).map_err(|e| e.to_string())?;
        let d = (t1.tau.tau() - t2.tau.tau()).iter().map(|z| z.norm()).fold(0.0, f64::max);
        ensure(d <= 1e-9, || format!("g={g}: affine change moved τ by {d:e}"))?;
        worst_affine = worst_affine.max(d);
    }
    Ok(format!(
        "AGM {worst_agm:.2e} (10 curves), symmetry {worst_sym:.2e} and Im τ > 0 ({curves} curves), affine {worst_affine:.2e}"
    ))
}

fn criterion_7() -> Outcome {
    let mut worst_w: f64 = 0.0;
    let mut worst_ratio: f64 = 0.0;
    let region = SampleRegion::default();
    for g in 1..=3usize {
        for seed in 0..2u64 {
            let curve = HyperellipticCurve::random(g, 800 + 10 * g as u64 + seed).map_err(|e| e.to_string())?;
            let pd = periods(&curve, EPS).map_err(|e| e.to_string())?;
            let n = 2 * g + 2;
            for mask in 0u32..(1 << n) {
                let size = mask.count_ones() as usize;
                if size + 1 != g && size != g + 1 {
                    continue;
                }
                let members: Vec<usize> = (1..=n).filter(|j| mask >> (j - 1) & 1 == 1).collect();
                let mut d = Divisor::default();
                for (i, &j) in members.iter().enumerate() {
                    let w = if size == g + 1 && i == g { -1 } else { 1 };
                    d.push(SurfacePoint::weierstrass(&curve, j), w);
                }
                let t = IndexSet::new(g, members.iter().copied()).map_err(|e| e.to_string())?;
                let target = weierstrass_class(g, &t).and_then(|ch| ch.half_period(&pd.tau)).map_err(|e| e.to_string())?;
                let v = divisor_class(&curve, &pd, &d, EPS).map_err(|e| e.to_string())?;
                let r = lattice_residual(&pd.tau, &(v - target));
                ensure(r <= 1e-8, || format!("g={g} T={members:?}: residual {r:e}"))?;
                worst_w = worst_w.max(r);
            }
            let mut rng_seed = 10_000 * g as u64 + 100 * seed;
            let mut next_point = || {
                rng_seed += 1;
                random_point(&curve, rng_seed, &region)
            };
            let mut eff_max: f64 = 0.0;
            let mut gen_max: f64 = 0.0;
            for _ in 0..50 {
                let eff = Divisor::new((0..g - 1).map(|_| (next_point(), 1)).collect());
                let z = divisor_class(&curve, &pd, &eff, EPS).map_err(|e| e.to_string())?;
                eff_max = eff_max.max(norm_theta(&pd.tau, &z, EPS).map_err(|e| e.to_string())?);
                let mut generic: Vec<(SurfacePoint, i64)> = (0..g).map(|_| (next_point(), 1)).collect();
                generic.push((next_point(), -1));
                let z = divisor_class(&curve, &pd, &Divisor::new(generic), EPS).map_err(|e| e.to_string())?;
                gen_max = gen_max.max(norm_theta(&pd.tau, &z, EPS).map_err(|e| e.to_string())?);
            }
            let ratio = eff_max / gen_max;
            ensure(ratio <= 1e-7, || format!("g={g}: vanishing ratio {ratio:e}"))?;
            worst_ratio = worst_ratio.max(ratio);
        }
    }
    Ok(format!("Weierstraß classes {worst_w:.2e}, Riemann vanishing ratio {worst_ratio:.2e}"))
}

/// A random point of the Siegel upper half-space: `X + i(AAᵀ + I/2)`.
fn random_tau(g: usize, rng: &mut ChaCha8Rng) -> PeriodMatrix {
    let a = DMatrix::from_fn(g, g, |_, _| rng.gen_range(-0.5..0.5));
    let y = &a * a.transpose() + DMatrix::identity(g, g) * 0.5;
    let mut x = DMatrix::from_fn(g, g, |_, _| rng.gen_range(-0.5..0.5));
    x = 0.5 * (&x + x.transpose());
    PeriodMatrix::new(DMatrix::from_fn(g, g, |i, j| c(x[(i, j)], y[(i, j)]))).expect("valid τ")
}

fn random_char(g: usize, rng: &mut ChaCha8Rng) -> Characteristic {
    let top = (0..g).map(|_| rng.gen_range(0..2)).collect();
    let bottom = (0..g).map(|_| rng.gen_range(0..2)).collect();
    Characteristic::from_doubled(top, bottom).expect("doubled entries 0/1")
}

fn random_z(g: usize, rng: &mut ChaCha8Rng) -> DVector<Complex64> {
    DVector::from_fn(g, |_, _| c(rng.gen_range(-0.5..0.5), rng.gen_range(-0.5..0.5)))
}

fn sup(v: impl Iterator<Item = Complex64>) -> f64 {
    v.map(|z| z.norm()).fold(0.0, f64::max)
}

fn criterion_8() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let h = 1e-5;
    let (mut worst_g, mut worst_h): (f64, f64) = (0.0, 0.0);
    for s in 0..100 {
        let g = 1 + s % 3;
        let pm = random_tau(g, &mut rng);
        let ch = random_char(g, &mut rng);
        let z = random_z(g, &mut rng);
        let err = |e: thetaforge::Error| e.to_string();
        let grad: Vec<Complex64> = theta_grad(&pm, &ch, &z, 1e-13).map_err(err)?.iter().map(|v| v.value()).collect();
        let hess = theta_hess(&pm, &ch, &z, 1e-13).map_err(err)?;
        let mut fd_grad = Vec::with_capacity(g);
        let mut fd_hess = DMatrix::<Complex64>::zeros(g, g);
        for k in 0..g {
            let mut zp = z.clone();
            let mut zm = z.clone();
            zp[k] += h;
            zm[k] -= h;
            let tp = theta(&pm, &ch, &zp, 1e-13).map_err(err)?.value();
            let tm = theta(&pm, &ch, &zm, 1e-13).map_err(err)?.value();
            fd_grad.push((tp - tm) / (2.0 * h));
            let gp = theta_grad(&pm, &ch, &zp, 1e-13).map_err(err)?;
            let gm = theta_grad(&pm, &ch, &zm, 1e-13).map_err(err)?;
            for j in 0..g {
                fd_hess[(j, k)] = (gp[j].value() - gm[j].value()) / (2.0 * h);
            }
        }
        let eg = sup(grad.iter().zip(&fd_grad).map(|(a, b)| a - b)) / sup(grad.iter().copied());
        let hv: Vec<Complex64> = hess.iter().flat_map(|row| row.iter().map(|v| v.value())).collect();
        let eh = sup(hv.iter().zip(fd_hess.transpose().iter()).map(|(a, b)| a - b)) / sup(hv.iter().copied());
        ensure(eg <= 1e-6, || format!("sample {s} (g={g}, {ch}): gradient error {eg:e}"))?;
        ensure(eh <= 1e-5, || format!("sample {s} (g={g}, {ch}): Hessian error {eh:e}"))?;
        worst_g = worst_g.max(eg);
        worst_h = worst_h.max(eh);
    }
    Ok(format!("100 samples, gradient {worst_g:.2e}, Hessian {worst_h:.2e}"))
}

fn criterion_9() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let i = c(0.0, 1.0);
    let (mut worst_q, mut worst_p): (f64, f64) = (0.0, 0.0);
    for s in 0..100 {
        let g = 1 + s % 3;
        let pm = random_tau(g, &mut rng);
        let ch = random_char(g, &mut rng);
        let z = random_z(g, &mut rng);
        let m: Vec<i64> = (0..g).map(|_| rng.gen_range(-2..=2)).collect();
        let n: Vec<i64> = (0..g).map(|_| rng.gen_range(-3..=3)).collect();
        let mf = DVector::from_iterator(g, m.iter().map(|&v| c(v as f64, 0.0)));
        let shifted = &z + pm.tau() * &mf + DVector::from_iterator(g, n.iter().map(|&v| c(v as f64, 0.0)));
        let (a, b) = (ch.top_values(), ch.bottom_values());
        let mtm = (mf.transpose() * pm.tau() * &mf)[(0, 0)];
        let mz: Complex64 = mf.iter().zip(z.iter()).map(|(x, y)| x * y).sum();
        let char_phase: f64 = (0..g).map(|k| a[k] * n[k] as f64 - b[k] * m[k] as f64).sum();
        let factor = (2.0 * PI * i * char_phase - PI * i * mtm - 2.0 * PI * i * mz).exp();
        let base = theta(&pm, &ch, &z, 1e-13).map_err(|e| e.to_string())?.value();
        let moved = theta(&pm, &ch, &shifted, 1e-13).map_err(|e| e.to_string())?.value();
        let eq = (moved - factor * base).norm() / moved.norm().max((factor * base).norm());
        ensure(eq <= 1e-8, || format!("sample {s}: quasi-periodicity error {eq:e}"))?;
        // θ[α](−z) = (−1)^{4α′·α″} θ[α](z)
        let dot: i64 = ch.top_doubled().iter().zip(ch.bottom_doubled()).map(|(x, y)| x * y).sum();
        let sign = if dot % 2 == 0 { 1.0 } else { -1.0 };
        let expected = if sign > 0.0 { Parity::Even } else { Parity::Odd };
        ensure(ch.parity() == expected, || format!("sample {s}: parity of {ch}"))?;
        let neg = theta(&pm, &ch, &(-&z), 1e-13).map_err(|e| e.to_string())?.value();
        let ep = (neg - base * sign).norm() / base.norm().max(neg.norm());
        ensure(ep <= 1e-8, || format!("sample {s}: parity error {ep:e}"))?;
        worst_q = worst_q.max(eq);
        worst_p = worst_p.max(ep);
    }
    Ok(format!("100 samples, quasi-periodicity {worst_q:.2e}, parity {worst_p:.2e}"))
}

fn criterion_10() -> Outcome {
    let perms = Permutation::all(2);
    ensure(perms.len() == 720, || format!("{} permutations", perms.len()))?;
    for sigma in &perms {
        let fs = fundamental_system(sigma);
        ensure(is_fundamental(&fs), || format!("σ={sigma} fails"))?;
        let odd = fs.odd().iter().filter(|c| c.parity() == Parity::Odd).count();
        let even = fs.even().iter().filter(|c| c.parity() == Parity::Even).count();
        ensure(odd == 2 && even == 4, || format!("σ={sigma}: parity split {odd}/{even}"))?;
    }
    Ok("720/720 permutations give fundamental systems".into())
}

fn main() {
    let mut failed = 0;
    let mut report = |n: usize, name: &str, outcome: Outcome| match outcome {
        Ok(detail) => println!("criterion {n:>2} {name}: PASS ({detail})"),
        Err(why) => {
            failed += 1;
            println!("criterion {n:>2} {name}: FAIL ({why})");
        }
    };
    report(1, "genus-one Jacobi anchor", criterion_1());
    report(2, "theta-constant formula, genus 2 and 3", criterion_2());
    match point_reports() {
        Ok((reports, elapsed)) => {
            report(3, "product formulas (i)-(iii)", criterion_3(&reports, elapsed));
            report(4, "theta-only product equality", criterion_4(&reports));
            report(5, "normed formulas", criterion_5(&reports));
        }
        Err(e) => {
            for (n, name) in [(3, "product formulas (i)-(iii)"), (4, "theta-only product equality"), (5, "normed formulas")] {
                report(n, name, Err(e.clone()));
            }
        }
    }
    report(6, "period matrices", criterion_6());
    report(7, "divisor-class calibration", criterion_7());
    report(8, "derivatives", criterion_8());
    report(9, "quasi-periodicity and parity", criterion_9());
    report(10, "fundamental systems, genus 2", criterion_10());
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
    println!("all 10 criteria passed");
}
