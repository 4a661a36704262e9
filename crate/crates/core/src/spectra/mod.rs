//! Sparse spectra and restricted-eigenvalue certification.

pub mod bernstein;
pub mod isometry;
pub mod maurey;
pub mod re;
pub mod sparse_eig;
pub mod supports;

pub use bernstein::{bernstein_tail_check, bernstein_tail_check_many, BernsteinReport};
pub use isometry::{
    auto_support_mode, d_dimension, hull_functional_check, reduction_verify, reduction_verify_design,
    restricted_isometry_report, transfer_holds, HullReport,
    IsometryReport, ReductionOptions, ReductionReport,
};
pub use maurey::{maurey_sparsify, MaureyMode, MaureyResult};
pub use re::{re_constant, ReEstimate, ReMode, ReModeTag};
pub use sparse_eig::{rip_constant, sparse_eigs, SparseEigResult, SupportMode};
