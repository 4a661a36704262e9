use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{norm1, norm_inf, DenseMatrix};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LassoProblem {
    pub x: DenseMatrix,
    pub y: Vec<f64>,
    /// Penalty in the `(1/2n)‖Y − Xβ‖² + λ‖β‖₁` scaling.
    pub lambda_n: f64,
    /// Noise level; carried as metadata.
    #[serde(default)]
    pub sigma: f64,
}

impl LassoProblem {
    pub fn new(x: DenseMatrix, y: Vec<f64>, lambda_n: f64, sigma: f64) -> Result<Self> {
        if y.len() != x.rows() {
            return Err(Error::Dimension(format!(
                "Y has length {} but X has {} rows",
                y.len(),
                x.rows()
            )));
        }
        if !(lambda_n >= 0.0) || !lambda_n.is_finite() {
            return Err(Error::ConfigInvalid(format!("lambda_n = {lambda_n} must be non-negative")));
        }
        if y.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite { row: 0, col: 0 });
        }
        Ok(Self { x, y, lambda_n, sigma })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveResult {
    pub beta_hat: Vec<f64>,
    pub objective: f64,
    pub iterations: usize,
    pub converged: bool,
    pub duality_or_kkt_residual: f64,
}

fn residual(x: &DenseMatrix, y: &[f64], beta: &[f64]) -> Vec<f64> {
    let fit = x.matvec(beta);
    y.iter().zip(&fit).map(|(a, b)| a - b).collect()
}

/// `(1/2n)‖Y − Xβ‖₂² + λ‖β‖₁`.
pub fn lasso_objective(problem: &LassoProblem, beta: &[f64]) -> f64 {
    let n = problem.x.rows() as f64;
    let r = residual(&problem.x, &problem.y, beta);
    r.iter().map(|v| v * v).sum::<f64>() / (2.0 * n) + problem.lambda_n * norm1(beta)
}

fn soft(z: f64, t: f64) -> f64 {
    z.signum() * (z.abs() - t).max(0.0)
}

/// Cyclic coordinate descent.
pub fn lasso_cd(problem: &LassoProblem, tol: f64, max_iters: usize) -> SolveResult {
    lasso_cd_traced(problem, tol, max_iters).0
}

/// As [`lasso_cd`], also returning the objective after every sweep.
pub fn lasso_cd_traced(problem: &LassoProblem, tol: f64, max_iters: usize) -> (SolveResult, Vec<f64>) {
    let x = &problem.x;
    let (n, p) = (x.rows(), x.cols());
    let nf = n as f64;
    let lambda = problem.lambda_n;
    let cols: Vec<Vec<f64>> = (0..p).map(|j| x.column(j)).collect();
    let curv: Vec<f64> = cols.iter().map(|c| c.iter().map(|v| v * v).sum::<f64>() / nf).collect();

    let mut beta = vec![0.0; p];
    let mut r = problem.y.clone();
    let mut trace = Vec::new();
    let mut converged = false;
    let mut iterations = 0;
    while iterations < max_iters {
        iterations += 1;
        let mut max_change = 0.0f64;
        for j in 0..p {
            if curv[j] == 0.0 {
                continue;
            }
            let col = &cols[j];
            let rho = col.iter().zip(&r).map(|(a, b)| a * b).sum::<f64>() / nf + curv[j] * beta[j];
            let new = soft(rho, lambda) / curv[j];
            let step = new - beta[j];
            if step != 0.0 {
                for (ri, ci) in r.iter_mut().zip(col) {
                    *ri -= step * ci;
                }
                beta[j] = new;
                max_change = max_change.max(step.abs());
            }
        }
        trace.push(lasso_objective(problem, &beta));
        if max_change < tol * (1.0 + norm_inf(&beta)) {
            converged = true;
            break;
        }
    }

    // recompute the residual from scratch to shed accumulated drift
    let r = residual(x, &problem.y, &beta);
    let mut kkt = 0.0f64;
    for j in 0..p {
        let g = cols[j].iter().zip(&r).map(|(a, b)| a * b).sum::<f64>() / nf;
        let violation = if beta[j] == 0.0 {
            (g.abs() - lambda).max(0.0)
        } else {
            (g - lambda * beta[j].signum()).abs()
        };
        kkt = kkt.max(violation);
    }
    let result = SolveResult {
        objective: lasso_objective(problem, &beta),
        beta_hat: beta,
        iterations,
        converged,
        duality_or_kkt_residual: kkt,
    };
    (result, trace)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_column_soft_threshold() {
        let n = 9;
        let x = DenseMatrix::from_fn(n, 1, |i, _| if i == 0 { (n as f64).sqrt() } else { 0.0 });
        for (beta, lambda) in [(2.0, 0.5), (-1.0, 0.25), (0.3, 0.5)] {
            let y = x.matvec(&[beta]);
            let prob = LassoProblem::new(x.clone(), y, lambda, 0.0).unwrap();
            let r = lasso_cd(&prob, 1e-12, 100);
            let expect = f64::signum(beta) * (f64::abs(beta) - lambda).max(0.0);
            assert!((r.beta_hat[0] - expect).abs() < 1e-12, "{beta} {lambda}");
            assert!(r.converged);
        }
    }

    #[test]
    fn large_penalty_gives_zero() {
        let x = DenseMatrix::from_rows(&[vec![1.0, 2.0], vec![0.5, -1.0], vec![3.0, 0.0]]).unwrap();
        let y = vec![1.0, -2.0, 0.5];
        let g = x.t_matvec(&y);
        let lambda = norm_inf(&g) / 3.0;
        let r = lasso_cd(&LassoProblem::new(x, y, lambda, 0.0).unwrap(), 1e-10, 100);
        assert_eq!(r.beta_hat, vec![0.0, 0.0]);
        assert!(r.duality_or_kkt_residual <= 1e-15);
    }

    #[test]
    fn unpenalized_square_system() {
        let x = DenseMatrix::from_rows(&[vec![2.0, 1.0], vec![1.0, 3.0]]).unwrap();
        let truth = [0.7, -1.2];
        let y = x.matvec(&truth);
        let r = lasso_cd(&LassoProblem::new(x, y, 0.0, 0.0).unwrap(), 1e-14, 10_000);
        assert!((r.beta_hat[0] - truth[0]).abs() < 1e-8);
        assert!((r.beta_hat[1] - truth[1]).abs() < 1e-8);
    }

    #[test]
    fn objective_field_is_recomputable() {
        let x = DenseMatrix::from_fn(6, 4, |i, j| ((i * 7 + j * 3) % 5) as f64 - 2.0);
        let y = vec![1.0, 0.0, -1.0, 2.0, 0.5, -0.5];
        let prob = LassoProblem::new(x.clone(), y.clone(), 0.1, 1.0).unwrap();
        let r = lasso_cd(&prob, 1e-10, 1000);
        let fit = x.matvec(&r.beta_hat);
        let rss: f64 = y.iter().zip(&fit).map(|(a, b)| (a - b).powi(2)).sum();
        let manual = rss / 12.0 + 0.1 * r.beta_hat.iter().map(|b| b.abs()).sum::<f64>();
        assert!((r.objective - manual).abs() <= 1e-10 * manual.abs());
        assert!(r.duality_or_kkt_residual <= 0.1 + 1e-8);
    }

    #[test]
    fn budget_exhaustion_is_not_an_error() {
        let x = DenseMatrix::from_rows(&[vec![1.0, 0.99], vec![0.99, 1.0]]).unwrap();
        let r = lasso_cd(&LassoProblem::new(x, vec![1.0, -1.0], 0.0, 0.0).unwrap(), 1e-15, 1);
        assert!(!r.converged);
        assert_eq!(r.iterations, 1);
    }

    #[test]
    fn mismatched_dimensions() {
        assert!(LassoProblem::new(DenseMatrix::identity(2), vec![1.0], 0.1, 0.0).is_err());
        assert!(LassoProblem::new(DenseMatrix::identity(2), vec![1.0, 1.0], -0.1, 0.0).is_err());
    }
}
