use serde::{Deserialize, Serialize};

use super::supports::{check_cap, fold_subsets};
use crate::error::{Error, Result};
use crate::numerics::{eig::DEFAULT_EIG_TOL, sym_eig, DenseMatrix};
use crate::rng::Stream;

/// Largest number of supports visited in enumeration mode.
pub const ENUMERATION_CAP: u128 = 2_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum SupportMode {
    Enumerate,
    Sample { count: usize, seed: u64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SparseEigResult {
    pub m: usize,
    pub rho_min: f64,
    pub rho_max: f64,
    pub argmin_support: Vec<usize>,
    pub argmax_support: Vec<usize>,
    /// True when every support was visited.
    pub exact: bool,
}

/// Extremal eigenvalues of the principal submatrix `G_JJ`.
pub(crate) fn principal_extremes(gram: &DenseMatrix, support: &[usize]) -> (f64, f64) {
    match support {
        [j] => {
            let v = gram.get(*j, *j);
            (v, v)
        }
        _ => {
            let sub = gram.submatrix(support, support);
            let e = sym_eig(&sub, DEFAULT_EIG_TOL).expect("principal submatrix of a Gram matrix");
            (e.min(), e.max())
        }
    }
}

#[derive(Clone)]
struct Extremes {
    min: (f64, u128, Vec<usize>),
    max: (f64, u128, Vec<usize>),
}

impl Extremes {
    fn empty() -> Self {
        Self {
            min: (f64::INFINITY, u128::MAX, Vec::new()),
            max: (f64::NEG_INFINITY, u128::MAX, Vec::new()),
        }
    }

    fn merge(self, other: Self) -> Self {
        let min = if (other.min.0, other.min.1) < (self.min.0, self.min.1) {
            other.min
        } else {
            self.min
        };
        // ties resolved toward the lower rank
        let max = if other.max.0 > self.max.0 || (other.max.0 == self.max.0 && other.max.1 < self.max.1) {
            other.max
        } else {
            self.max
        };
        Self { min, max }
    }
}

/// Smallest and largest `m`-sparse eigenvalues `ρ_min(m, A)`, `ρ_max(m, A)`.
pub fn sparse_eigs(a: &DenseMatrix, m: usize, mode: SupportMode) -> Result<SparseEigResult> {
    sparse_eigs_of_gram(&a.gram(), m, mode)
}

/// As [`sparse_eigs`] with `AᵀA` supplied directly.
pub fn sparse_eigs_of_gram(gram: &DenseMatrix, m: usize, mode: SupportMode) -> Result<SparseEigResult> {
    let p = gram.cols();
    if m == 0 || m > p {
        return Err(Error::Dimension(format!("sparsity {m} outside 1..={p}")));
    }
    let visit = |rank: u128, s: &[usize]| {
        let (lo, hi) = principal_extremes(gram, s);
        Extremes {
            min: (lo, rank, s.to_vec()),
            max: (hi, rank, s.to_vec()),
        }
    };
    let (ext, exact) = match mode {
        SupportMode::Enumerate => {
            check_cap(p, m, ENUMERATION_CAP)?;
            (fold_subsets(p, m, Extremes::empty(), visit, Extremes::merge), true)
        }
        SupportMode::Sample { count, seed } => {
            if count == 0 {
                return Err(Error::ConfigInvalid("sample count must be positive".into()));
            }
            let parts = crate::par::map_indices(count, |i| {
                let s = Stream::new(seed, i as u64).subset(p, m);
                visit(i as u128, &s)
            });
            let ext = parts.into_iter().fold(Extremes::empty(), Extremes::merge);
            (ext, false)
        }
    };
    Ok(SparseEigResult {
        m,
        // Gram eigenvalues are non-negative; clamp round-off
        rho_min: ext.min.0.max(0.0),
        rho_max: ext.max.0.max(0.0),
        argmin_support: ext.min.2,
        argmax_support: ext.max.2,
        exact,
    })
}

/// Restricted isometry constant `θ_s` of `X/√n`.
pub fn rip_constant(x: &DenseMatrix, s: usize) -> Result<f64> {
    let p = x.cols();
    if s == 0 || s > p {
        return Err(Error::Dimension(format!("sparsity {s} outside 1..={p}")));
    }
    check_cap(p, s, ENUMERATION_CAP)?;
    let gram = x.gram().scaled(1.0 / x.rows() as f64);
    Ok(fold_subsets(
        p,
        s,
        0.0f64,
        |_, sup| {
            let (lo, hi) = principal_extremes(&gram, sup);
            (hi - 1.0).max(1.0 - lo)
        },
        f64::max,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensembles::{build_covariance, CovarianceSpec};
    use crate::numerics::psd_sqrt;

    #[test]
    fn identity_is_flat() {
        let r = sparse_eigs(&DenseMatrix::identity(5), 3, SupportMode::Enumerate).unwrap();
        assert_eq!((r.rho_min, r.rho_max), (1.0, 1.0));
        assert!(r.exact);
    }

    #[test]
    fn ar1_square_root_closed_form() {
        let sigma = build_covariance(&CovarianceSpec::ar1(0.5, 2)).unwrap();
        let a = psd_sqrt(&sigma).unwrap();
        let r = sparse_eigs(&a, 2, SupportMode::Enumerate).unwrap();
        assert!((r.rho_min - 0.5).abs() < 1e-12);
        assert!((r.rho_max - 1.5).abs() < 1e-12);
    }

    #[test]
    fn unit_columns_one_sparse() {
        let a = DenseMatrix::from_rows(&[vec![0.6, 1.0], vec![0.8, 0.0]]).unwrap();
        let r = sparse_eigs(&a, 1, SupportMode::Enumerate).unwrap();
        assert!((r.rho_min - 1.0).abs() < 1e-15 && (r.rho_max - 1.0).abs() < 1e-15);
    }

    #[test]
    fn rip_examples() {
        let n = 9.0f64;
        let x = DenseMatrix::identity(9).scaled(n.sqrt());
        assert!(rip_constant(&x, 3).unwrap().abs() < 1e-14);
        let dup = DenseMatrix::from_rows(&[vec![2.0, 2.0], vec![0.0, 0.0], vec![0.0, 0.0], vec![0.0, 0.0]]).unwrap();
        assert!((rip_constant(&dup, 2).unwrap() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn cap_enforced() {
        let a = DenseMatrix::identity(40);
        assert!(matches!(
            sparse_eigs(&a, 10, SupportMode::Enumerate),
            Err(Error::TooManySupports { .. })
        ));
    }
}
