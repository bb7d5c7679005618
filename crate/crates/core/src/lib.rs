//! Riemann theta functions with characteristics on hyperelliptic Jacobians.
//!
//! The crate evaluates `θ[α](z; τ)` and its first two derivatives with
//! certified truncation, builds the determinant forms `J` and `η`, computes
//! period matrices and Abel–Jacobi images for real hyperelliptic curves
//! `y² = ∏(x − a_i)`, and checks the product identities that tie these
//! objects together.

pub mod characteristic;
pub mod charsys;
pub mod determinants;
pub mod error;
pub mod hyperelliptic;
pub mod norms;
pub mod numfmt;
pub mod period_matrix;
pub mod theta;
pub mod truncation;
pub mod verifier;

pub use characteristic::{Characteristic, Parity};
pub use error::{Error, Result};
pub use period_matrix::PeriodMatrix;
pub use theta::{theta, theta_grad, theta_hess, theta_jet, ThetaJet, ThetaValue};
