use std::f64::consts::PI;

use num_complex::Complex64;
use thetaforge::charsys::Permutation;
use thetaforge::hyperelliptic::{
    periods, random_point, HyperellipticCurve, SampleRegion, SurfacePoint,
};
use thetaforge::verifier::{
    run_suite, verify_jacobi, verify_rosenhain, verify_thm2, IdentityId, SuiteConfig, Thresholds,
    Variant, VerifyContext,
};
use thetaforge::{Error, PeriodMatrix};

const EPS: f64 = 1e-11;

fn context(g: usize, seed: u64) -> VerifyContext {
    let curve = HyperellipticCurve::random(g, seed).unwrap();
    let pd = periods(&curve, EPS).unwrap();
    VerifyContext::new(curve, pd, EPS).unwrap()
}

fn points(ctx: &VerifyContext, seed: u64) -> (Vec<SurfacePoint>, SurfacePoint) {
    let region = SampleRegion::default();
    let g = ctx.genus();
    let ps = (0..g).map(|j| random_point(&ctx.curve, seed * 31 + j as u64, &region)).collect();
    (ps, random_point(&ctx.curve, seed * 31 + 29, &region))
}

/// Brute-force `Σ_{|n|≤N}` for genus one with characteristic `[a; b]`.
fn brute_theta_g1(tau: Complex64, a: f64, b: f64, derivative: bool) -> Complex64 {
    let i = Complex64::new(0.0, 1.0);
    (-40..=40)
        .map(|n| {
            let m = n as f64 + a;
            let term = (i * PI * m * m * tau + 2.0 * PI * i * m * b).exp();
            if derivative {
                term * (2.0 * PI * i * m)
            } else {
                term
            }
        })
        .sum()
}

#[test]
fn jacobi_identity_against_brute_force_series() {
    for tau in [Complex64::new(0.0, 1.0), Complex64::new(0.3, 0.7), Complex64::new(-0.4, 2.5)] {
        let r = verify_jacobi(tau, 1e-13).unwrap();
        assert_eq!(r.identity_id, IdentityId::JacobiG1);
        assert!(r.rel_residual <= 1e-9);
        assert_eq!(r.sign, Some(-1));
        let lhs = brute_theta_g1(tau, 0.5, 0.5, true);
        let rhs = -PI
            * brute_theta_g1(tau, 0.0, 0.0, false)
            * brute_theta_g1(tau, 0.5, 0.0, false)
            * brute_theta_g1(tau, 0.0, 0.5, false);
        assert!((lhs - rhs).norm() <= 1e-10 * lhs.norm());
        assert!((r.lhs - lhs).norm() <= 1e-10 * lhs.norm());
    }
}

#[test]
fn thm1_genus_one_is_degenerate_but_exact() {
    let ctx = context(1, 3);
    let (ps, q) = points(&ctx, 1);
    let r = ctx.verify_thm1(Variant::I, &ps, &q).unwrap();
    assert!(r.rel_residual <= 1e-8);
    let cor = ctx.verify_cor_products(&ps, &q).unwrap();
    assert_eq!(cor.rel_residual, 0.0);
    assert_eq!(cor.lhs, Complex64::new(1.0, 0.0));
}

#[test]
fn genus_two_identities_hold() {
    let ctx = context(2, 8);
    let (ps, q) = points(&ctx, 2);
    for v in Variant::ALL {
        let r = ctx.verify_thm1(v, &ps, &q).unwrap();
        assert!(r.rel_residual <= 1e-6, "{v}: {}", r.rel_residual);
        let n = ctx.verify_normed(v, &ps, &q).unwrap();
        assert!(n.rel_residual <= 1e-6);
        assert!((r.rel_residual - n.rel_residual).abs() <= 1e-6);
        assert!(n.lhs.im == 0.0 && n.lhs.re >= 0.0);
    }
    assert!(ctx.verify_cor_products(&ps, &q).unwrap().rel_residual <= 1e-8);
}

#[test]
fn special_positions_are_rejected() {
    let ctx = context(2, 9);
    let (ps, _) = points(&ctx, 3);
    let q = ps[1];
    assert!(matches!(ctx.verify_thm1(Variant::I, &ps, &q), Err(Error::GenericPosition(_))));
    assert!(matches!(ctx.verify_cor_products(&ps, &ps[0]), Err(Error::GenericPosition(_))));
    assert!(matches!(ctx.verify_normed(Variant::Ii, &ps, &ps[0]), Err(Error::GenericPosition(_))));
}

#[test]
fn residuals_are_invariant_under_relabelling() {
    let ctx = context(3, 4);
    let (ps, q) = points(&ctx, 5);
    let swapped = vec![ps[2], ps[0], ps[1]];
    for v in [Variant::I, Variant::Ii] {
        let a = ctx.verify_thm1(v, &ps, &q).unwrap().rel_residual;
        let b = ctx.verify_thm1(v, &swapped, &q).unwrap().rel_residual;
        assert!((a - b).abs() <= 1e-9);
    }
    let a = ctx.verify_cor_products(&ps, &q).unwrap().rel_residual;
    let b = ctx.verify_cor_products(&swapped, &q).unwrap().rel_residual;
    assert!((a - b).abs() <= 1e-9);
}

#[test]
fn thm2_signs_are_curve_independent() {
    for g in 2..=3usize {
        let sigmas = [
            Permutation::identity(g),
            Permutation::new((1..=2 * g + 2).rev().collect()).unwrap(),
        ];
        for sigma in &sigmas {
            let mut signs = Vec::new();
            for seed in 0..5 {
                let ctx = context(g, 100 + seed);
                let r = ctx.verify_thm2(sigma).unwrap();
                assert!(r.rel_residual <= 1e-7, "g={g} σ={sigma}: {}", r.rel_residual);
                signs.push(r.sign.unwrap());
            }
            assert!(signs.iter().all(|&s| s == signs[0]), "g={g} σ={sigma}: {signs:?}");
        }
    }
}

#[test]
fn thm2_residual_ignores_order_within_blocks() {
    let ctx = context(2, 6);
    let sigma = Permutation::new(vec![3, 1, 6, 2, 5, 4]).unwrap();
    let a = ctx.verify_thm2(&sigma).unwrap();
    let b = ctx.verify_thm2(&sigma.swap_positions(1, 2)).unwrap();
    let c = ctx.verify_thm2(&sigma.swap_positions(3, 6)).unwrap();
    assert!((a.rel_residual - b.rel_residual).abs() <= 1e-9);
    assert!((a.rel_residual - c.rel_residual).abs() <= 1e-9);
}

#[test]
fn halving_eps_moves_sides_within_tolerance() {
    let curve = HyperellipticCurve::random(2, 2).unwrap();
    let pd = periods(&curve, 1e-12).unwrap();
    let sigma = Permutation::identity(2);
    let eps = 1e-8;
    let a = verify_thm2(&pd.tau, &sigma, eps).unwrap();
    let b = verify_thm2(&pd.tau, &sigma, eps / 2.0).unwrap();
    assert!((a.lhs - b.lhs).norm() <= 4.0 * eps * a.lhs.norm().max(1.0));
    assert!((a.rhs - b.rhs).norm() <= 4.0 * eps * a.rhs.norm().max(1.0));
}

#[test]
fn rosenhain_requires_genus_two() {
    let pm = PeriodMatrix::parse("1i").unwrap();
    assert!(verify_rosenhain(&pm, &Permutation::identity(1), 1e-10).is_err());
    let curve = HyperellipticCurve::random(2, 0).unwrap();
    let pd = periods(&curve, 1e-12).unwrap();
    let r = verify_rosenhain(&pd.tau, &Permutation::identity(2), 1e-12).unwrap();
    assert_eq!(r.identity_id, IdentityId::RosenhainG2);
    assert!(r.rel_residual <= 1e-7);
}

fn small_config(seed: u64) -> SuiteConfig {
    SuiteConfig {
        genus_max: 2,
        curves_per_genus: 2,
        trials_per_curve: 2,
        permutations_per_genus: 3,
        seed,
        ..SuiteConfig::default()
    }
}

#[test]
fn suite_is_deterministic_and_passes() {
    let a = run_suite(&small_config(7)).unwrap();
    let b = run_suite(&small_config(7)).unwrap();
    assert!(a.pass, "{:?}", a.failures);
    assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
    assert_eq!(a.sign_table["g1"]["1,2,3,4"].sign, -1);
    assert!(a.max_residuals.contains_key(&IdentityId::Thm1I));
}

#[test]
fn zero_threshold_fails() {
    let mut config = small_config(3);
    config.thresholds = Thresholds::uniform(0.0);
    let report = run_suite(&config).unwrap();
    assert!(!report.pass);
    assert!(report.reports.iter().any(|r| r.rel_residual > 0.0));
}

#[test]
fn suite_rejects_bad_config() {
    let mut config = SuiteConfig::default();
    config.genus_max = 5;
    assert!(run_suite(&config).is_err());
    config.genus_max = 2;
    config.eps = 1e-20;
    assert!(matches!(run_suite(&config), Err(Error::InvalidTolerance(_))));
}
