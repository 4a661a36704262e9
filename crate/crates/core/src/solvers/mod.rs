//! Lasso, basis pursuit and oracle-rate diagnostics.

mod bp;
mod lasso;
mod oracle;

pub use bp::{basis_pursuit, BP_DEFAULT_MAX_ITERS, BP_DEFAULT_TOL};
pub use lasso::{lasso_cd, lasso_cd_traced, lasso_objective, LassoProblem, SolveResult};
pub use oracle::{default_lambda, lasso_cone_check, oracle_rate_ratio, oracle_s0};
