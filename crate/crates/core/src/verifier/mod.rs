//! Both sides of each identity, residuals and resolved signs.

mod identities;
mod report;
mod suite;

pub use identities::{
    theta_scale, verify_jacobi, verify_rosenhain, verify_thm2, VerifyContext, GENERIC_FACTOR,
    GENERIC_SAMPLES, SIGN_IMAG_TOLERANCE,
};
pub use report::{IdentityId, IdentityReport, InputsDigest, Variant};
pub use suite::{
    run_suite, run_trial, suite_permutations, SignEntry, SuiteConfig, SuiteReport, Thresholds,
    TrialFailure, MAX_RESAMPLES,
};
