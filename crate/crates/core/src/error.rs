use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Failures surfaced by the certification library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("matrix contains a non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },
    #[error("matrix is not symmetric (max asymmetry {0:e})")]
    NonSymmetric(f64),
    #[error("jacobi iteration did not converge within {0} sweeps")]
    NoConvergence(usize),
    #[error("matrix is not positive semidefinite (eigenvalue {0:e})")]
    NotPsd(f64),
    #[error("generalized eigenproblem has a numerically zero right-hand matrix")]
    DegenerateG,
    #[error("Walsh order 2^{0} exceeds the supported cap")]
    TooLarge(u32),
    #[error("operation unsupported for this distribution: {0}")]
    Unsupported(String),
    #[error("zero vector has no support")]
    ZeroVector,
    #[error("{count} supports exceed the enumeration cap {cap}")]
    TooManySupports { count: u128, cap: u128 },
    #[error("mode preconditions not met: {0}")]
    InfeasibleMode(String),
    #[error("no sparse approximation within tolerance after {attempts} attempts (best error {best_err:e})")]
    AttemptsExhausted { attempts: usize, best_err: f64 },
    #[error("A maps a sampled cone point to zero: RE fails on the cone")]
    ReViolatedOnSample,
    #[error("equality constraints not met (residual {0:e})")]
    Infeasible(f64),
    #[error("invalid configuration: {0}")]
    ConfigInvalid(String),
    #[error("numerical failure: {0}")]
    NumericalFailure(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl Error {
    /// Process exit status: 1 for bad input or configuration, 2 for numerical failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::NoConvergence(_)
            | Error::NotPsd(_)
            | Error::DegenerateG
            | Error::AttemptsExhausted { .. }
            | Error::ReViolatedOnSample
            | Error::Infeasible(_)
            | Error::NumericalFailure(_) => 2,
            _ => 1,
        }
    }
}
