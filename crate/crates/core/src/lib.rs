//! Workbench for metric Diophantine approximation of systems of small linear forms.
//!
//! The crate enumerates integer vectors `q` with `|qX|_i < ψ(|q|)`, classifies the
//! convergence series governing the zero-full laws, runs the reduction from small
//! linear forms to classical approximation with exact certificates, and checks
//! zero-one trends and dimension predictions empirically.

pub mod criteria;
pub mod domain;
pub mod error;
pub mod forms;
pub mod lab;
pub mod linalg;
pub mod reduction;
pub mod scalar;

pub use domain::{
    classify_regime, ApproxFunction, DimensionFunction, FormMatrix, IntegerVector, ProblemSpec,
    Regime, SolutionRecord, Variant,
};
pub use error::{Error, Result};
pub use scalar::Scalar;

/// Engine version recorded in run records.
pub const ENGINE_VERSION: &str = env!("CARGO_PKG_VERSION");
