//! Dense linear algebra used throughout the crate.

pub mod eig;
pub mod l1;
pub mod matrix;

pub use eig::{gen_eig_extremes, psd_sqrt, sym_eig, SymEigResult};
pub use l1::l1_ball_project;
pub use matrix::{dot, norm1, norm2, norm_inf, DenseMatrix};
