use serde::{Deserialize, Serialize};

use super::matrix::DenseMatrix;
use crate::error::{Error, Result};

/// Sweep cap for the cyclic Jacobi iteration.
pub const MAX_SWEEPS: usize = 100;
/// Default relative off-diagonal threshold, `‖offdiag(S)‖_F ≤ tol·‖S‖_F`.
pub const DEFAULT_EIG_TOL: f64 = 1e-12;
/// Relative symmetry tolerance accepted on input.
pub const SYMMETRY_TOL: f64 = 1e-12;
/// Eigenvalues above `-PSD_CLAMP·‖S‖₂` are clamped to zero by [`psd_sqrt`].
pub const PSD_CLAMP: f64 = 1e-10;
/// Default deflation tolerance for [`gen_eig_extremes`].
pub const DEFAULT_DEFLATION_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SymEigResult {
    /// Non-increasing.
    pub eigenvalues: Vec<f64>,
    /// Column `k` is the unit eigenvector for `eigenvalues[k]`.
    pub eigenvectors: DenseMatrix,
}

impl SymEigResult {
    pub fn max(&self) -> f64 {
        self.eigenvalues[0]
    }

    pub fn min(&self) -> f64 {
        *self.eigenvalues.last().unwrap()
    }
}

pub fn check_symmetric(s: &DenseMatrix) -> Result<()> {
    if !s.is_square() {
        return Err(Error::Dimension(format!(
            "expected a square matrix, got {}x{}",
            s.rows(),
            s.cols()
        )));
    }
    let asym = s.max_asymmetry();
    if asym > SYMMETRY_TOL * s.max_abs().max(f64::MIN_POSITIVE) {
        return Err(Error::NonSymmetric(asym));
    }
    Ok(())
}

/// Full symmetric eigendecomposition by cyclic Jacobi rotations.
pub fn sym_eig(s: &DenseMatrix, tol: f64) -> Result<SymEigResult> {
    check_symmetric(s)?;
    let n = s.rows();
    let mut a: Vec<f64> = s.data().to_vec();
    // symmetrize exactly so rotations see one consistent matrix
    for i in 0..n {
        for j in 0..i {
            let m = 0.5 * (a[i * n + j] + a[j * n + i]);
            a[i * n + j] = m;
            a[j * n + i] = m;
        }
    }
    let mut v = vec![0.0; n * n];
    for i in 0..n {
        v[i * n + i] = 1.0;
    }
    let threshold = tol * s.frobenius_norm();

    let off_norm = |a: &[f64]| -> f64 {
        let mut acc = 0.0;
        for i in 0..n {
            for j in (i + 1)..n {
                acc += 2.0 * a[i * n + j] * a[i * n + j];
            }
        }
        acc.sqrt()
    };

    let mut converged = off_norm(&a) <= threshold;
    let mut sweeps = 0;
    while !converged {
        if sweeps == MAX_SWEEPS {
            return Err(Error::NoConvergence(MAX_SWEEPS));
        }
        sweeps += 1;
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[p * n + q];
                if apq == 0.0 {
                    continue;
                }
                let app = a[p * n + p];
                let aqq = a[q * n + q];
                let theta = (aqq - app) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let sn = t * c;
                for k in 0..n {
                    let akp = a[k * n + p];
                    let akq = a[k * n + q];
                    a[k * n + p] = c * akp - sn * akq;
                    a[k * n + q] = sn * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p * n + k];
                    let aqk = a[q * n + k];
                    a[p * n + k] = c * apk - sn * aqk;
                    a[q * n + k] = sn * apk + c * aqk;
                }
                a[p * n + q] = 0.0;
                a[q * n + p] = 0.0;
                for k in 0..n {
                    let vkp = v[k * n + p];
                    let vkq = v[k * n + q];
                    v[k * n + p] = c * vkp - sn * vkq;
                    v[k * n + q] = sn * vkp + c * vkq;
                }
            }
        }
        converged = off_norm(&a) <= threshold;
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[j * n + j].total_cmp(&a[i * n + i]).then(i.cmp(&j)));
    let eigenvalues = order.iter().map(|&k| a[k * n + k]).collect();
    let eigenvectors = DenseMatrix::from_fn(n, n, |i, k| v[i * n + order[k]]);
    Ok(SymEigResult {
        eigenvalues,
        eigenvectors,
    })
}

/// `V f(Λ) Vᵀ`, assembled on the upper triangle and mirrored so the result is exactly symmetric.
fn spectral_apply(eig: &SymEigResult, f: impl Fn(f64) -> f64) -> DenseMatrix {
    let n = eig.eigenvalues.len();
    let vecs = &eig.eigenvectors;
    let fl: Vec<f64> = eig.eigenvalues.iter().map(|&l| f(l)).collect();
    let mut out = DenseMatrix::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let mut acc = 0.0;
            for (k, &w) in fl.iter().enumerate() {
                acc += vecs.get(i, k) * w * vecs.get(j, k);
            }
            out.set(i, j, acc);
            out.set(j, i, acc);
        }
    }
    out
}

/// Symmetric PSD square root.
pub fn psd_sqrt(s: &DenseMatrix) -> Result<DenseMatrix> {
    let eig = sym_eig(s, DEFAULT_EIG_TOL)?;
    let spectral_norm = eig.eigenvalues.iter().fold(0.0f64, |m, l| m.max(l.abs()));
    let lowest = eig.min();
    if lowest < -PSD_CLAMP * spectral_norm {
        return Err(Error::NotPsd(lowest));
    }
    Ok(spectral_apply(&eig, |l| l.max(0.0).sqrt()))
}

/// Extremes of `xᵀMx / xᵀGx` over the range of `G`.
///
/// Directions of `G` with eigenvalue at most `tol·‖G‖₂` are deflated, the rest
/// is whitened with `G^{-1/2}`, and the whitened `M` is diagonalized.
pub fn gen_eig_extremes(m: &DenseMatrix, g: &DenseMatrix, tol: f64) -> Result<(f64, f64)> {
    check_symmetric(m)?;
    check_symmetric(g)?;
    if m.rows() != g.rows() {
        return Err(Error::Dimension(format!(
            "M is {0}x{0} but G is {1}x{1}",
            m.rows(),
            g.rows()
        )));
    }
    let eg = sym_eig(g, DEFAULT_EIG_TOL)?;
    let top = eg.max();
    if top <= 0.0 {
        return Err(Error::DegenerateG);
    }
    let kept: Vec<usize> = (0..eg.eigenvalues.len())
        .filter(|&k| eg.eigenvalues[k] > tol * top)
        .collect();
    let n = m.rows();
    // W = U_k Λ_k^{-1/2}
    let w = DenseMatrix::from_fn(n, kept.len(), |i, c| {
        let k = kept[c];
        eg.eigenvectors.get(i, k) / eg.eigenvalues[k].sqrt()
    });
    let mw = m.matmul(&w)?;
    let r = kept.len();
    let mut c = DenseMatrix::zeros(r, r);
    for a in 0..r {
        for b in a..r {
            let mut acc = 0.0;
            for i in 0..n {
                acc += w.get(i, a) * mw.get(i, b);
            }
            c.set(a, b, acc);
            c.set(b, a, acc);
        }
    }
    let ec = sym_eig(&c, DEFAULT_EIG_TOL)?;
    Ok((ec.min(), ec.max()))
}
