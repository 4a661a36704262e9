//! Certification of restricted-eigenvalue (RE) and restricted-isometry
//! properties for deterministic and random design matrices.
//!
//! The crate is organized bottom-up:
//!
//! - [`numerics`]: dense matrices, Jacobi eigensolver, PSD square roots,
//!   generalized symmetric eigen-extremes and ℓ₁-ball projection.
//! - [`ensembles`]: covariance models and random designs `X = ΨA`, including
//!   bounded-entry and Walsh block-diagonal row laws.
//! - [`cone`]: the cone `{x : ∃|I| = s₀, ‖x_{Iᶜ}‖₁ ≤ k₀‖x_I‖₁}`.
//! - [`spectra`]: sparse eigenvalues, RIP constants, the RE constant `K`,
//!   sparse-isometry and reduction checks, Maurey sparsification and the
//!   Bernstein tail check.
//! - [`solvers`]: Lasso, basis pursuit and oracle-rate diagnostics.
//! - [`harness`]: Monte Carlo experiments, sample-size bounds and report output.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
pub mod cone;
pub mod ensembles;
pub mod error;
pub mod harness;
pub mod numerics;
pub mod par;
pub mod rng;
pub mod solvers;
pub mod spectra;

pub use error::{Error, Result};
pub use numerics::DenseMatrix;
