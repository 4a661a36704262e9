use super::lasso::SolveResult;
use crate::error::{Error, Result};
use crate::numerics::{eig::DEFAULT_EIG_TOL, norm1, norm2, sym_eig, DenseMatrix};

pub const BP_DEFAULT_TOL: f64 = 1e-8;
pub const BP_DEFAULT_MAX_ITERS: usize = 20_000;

const RHO_INIT: f64 = 1.0;
const RHO_FACTOR: f64 = 2.0;
const BALANCE_RATIO: f64 = 10.0;
/// Rebalance at most this often, and not at all past `FREEZE_AFTER` iterations,
/// so the fixed-penalty convergence guarantee applies eventually.
const BALANCE_EVERY: usize = 10;
const FREEZE_AFTER: usize = 2_000;
const RANK_TOL: f64 = 1e-12;

/// `S⁺ r` for symmetric PSD `S`, dropping eigenvalues below `RANK_TOL·‖S‖₂`.
struct PseudoInverse {
    vectors: DenseMatrix,
    inv: Vec<f64>,
}

impl PseudoInverse {
    fn new(s: &DenseMatrix) -> Result<Self> {
        let eig = sym_eig(s, DEFAULT_EIG_TOL)?;
        let cut = RANK_TOL * eig.max().max(0.0);
        let inv = eig
            .eigenvalues
            .iter()
            .map(|&l| if l > cut && l > 0.0 { 1.0 / l } else { 0.0 })
            .collect();
        Ok(Self {
            vectors: eig.eigenvectors,
            inv,
        })
    }

    fn apply(&self, r: &[f64]) -> Vec<f64> {
        let mut coef = self.vectors.t_matvec(r);
        for (c, w) in coef.iter_mut().zip(&self.inv) {
            *c *= w;
        }
        self.vectors.matvec(&coef)
    }
}

fn soft(z: f64, t: f64) -> f64 {
    z.signum() * (z.abs() - t).max(0.0)
}

/// Least-squares refit on the support of `z`; used to snap ADMM iterates onto
/// the exact sparse solution when one exists.
fn polish(x: &DenseMatrix, b: &[f64], z: &[f64]) -> Option<Vec<f64>> {
    let scale = z.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let support: Vec<usize> = (0..z.len()).filter(|&j| z[j].abs() > 1e-9 * scale).collect();
    if support.is_empty() || support.len() > x.rows() {
        return None;
    }
    let xs = x.select_columns(&support);
    let w = PseudoInverse::new(&xs.gram()).ok()?.apply(&xs.t_matvec(b));
    let mut out = vec![0.0; z.len()];
    for (&j, &v) in support.iter().zip(&w) {
        out[j] = v;
    }
    Some(out)
}

fn feasibility(x: &DenseMatrix, b: &[f64], beta: &[f64]) -> f64 {
    let fit = x.matvec(beta);
    norm2(&fit.iter().zip(b).map(|(f, v)| f - v).collect::<Vec<_>>())
}

/// Minimizes `‖β‖₁` subject to `Xβ = b` by ADMM on the split `β = z`, with the
/// `β`-step an exact projection onto the affine constraint set.
pub fn basis_pursuit(x: &DenseMatrix, b: &[f64], tol: f64, max_iters: usize) -> Result<SolveResult> {
    let (n, p) = (x.rows(), x.cols());
    if b.len() != n {
        return Err(Error::Dimension(format!("b has length {} but X has {n} rows", b.len())));
    }
    if !(tol > 0.0) {
        return Err(Error::ConfigInvalid(format!("tol = {tol} must be positive")));
    }
    let xt = x.transpose();
    let outer = PseudoInverse::new(&xt.gram())?;
    let project = |v: &[f64]| -> Vec<f64> {
        let fit = x.matvec(v);
        let r: Vec<f64> = fit.iter().zip(b).map(|(f, bi)| f - bi).collect();
        let corr = x.t_matvec(&outer.apply(&r));
        v.iter().zip(&corr).map(|(a, c)| a - c).collect()
    };

    let mut rho = RHO_INIT;
    let mut beta = project(&vec![0.0; p]);
    let mut z = beta.clone();
    let mut u = vec![0.0; p];
    let mut iterations = 0;
    let mut converged = false;
    let mut residual = f64::INFINITY;
    while iterations < max_iters {
        iterations += 1;
        let v: Vec<f64> = z.iter().zip(&u).map(|(a, c)| a - c).collect();
        beta = project(&v);
        let z_old = std::mem::take(&mut z);
        z = beta.iter().zip(&u).map(|(a, c)| soft(a + c, 1.0 / rho)).collect();
        for i in 0..p {
            u[i] += beta[i] - z[i];
        }
        let primal = norm2(&beta.iter().zip(&z).map(|(a, c)| a - c).collect::<Vec<_>>());
        let dual = rho * norm2(&z.iter().zip(&z_old).map(|(a, c)| a - c).collect::<Vec<_>>());
        residual = primal.max(dual);
        let eps_primal = tol * norm2(&beta).max(norm2(&z)).max(1.0);
        let eps_dual = tol * (rho * norm2(&u)).max(1.0);
        if primal <= eps_primal && dual <= eps_dual {
            converged = true;
            break;
        }
        if iterations % BALANCE_EVERY != 0 || iterations > FREEZE_AFTER {
            continue;
        }
        if primal > BALANCE_RATIO * dual {
            rho *= RHO_FACTOR;
            u.iter_mut().for_each(|v| *v /= RHO_FACTOR);
        } else if dual > BALANCE_RATIO * primal {
            rho /= RHO_FACTOR;
            u.iter_mut().for_each(|v| *v *= RHO_FACTOR);
        }
    }

    let b_norm = norm2(b);
    let allowed = tol * b_norm.max(f64::MIN_POSITIVE);
    if let Some(refit) = polish(x, b, &z) {
        if feasibility(x, b, &refit) <= allowed && norm1(&refit) <= norm1(&beta) + tol {
            beta = refit;
        }
    }
    let infeasibility = feasibility(x, b, &beta);
    if infeasibility > allowed && !(b_norm == 0.0 && infeasibility == 0.0) {
        return Err(Error::Infeasible(infeasibility));
    }
    Ok(SolveResult {
        objective: norm1(&beta),
        beta_hat: beta,
        iterations,
        converged,
        duality_or_kkt_residual: residual,
    })
}
