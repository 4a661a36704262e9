//! Restricted isometry of `Ψ̃ = Ψ/√n` on images of sparse vectors, and the
//! checks built on it: cone-image ratios, RE transfer and the convex-hull
//! support-function comparison.

use serde::{Deserialize, Serialize};

use super::re::{re_constant, ReEstimate, ReMode};
use super::sparse_eig::SupportMode;
use super::supports::{binomial, check_cap, fold_subsets};
use crate::cone::{sample_cone_batch, ConeSpec};
use crate::error::{Error, Result};
use crate::numerics::{dot, eig::DEFAULT_DEFLATION_TOL, gen_eig_extremes, norm2, sym_eig, DenseMatrix};
use crate::rng::Stream;

pub const ISOMETRY_ENUMERATION_CAP: u128 = 200_000;
pub const HULL_ENUMERATION_CAP: u128 = 200_000;
/// Support samples used when enumeration is over the cap.
pub const DEFAULT_SUPPORT_SAMPLES: usize = 20_000;

/// Reduced dimension `d = s₀ + s₀·max_j‖Ae_j‖²·16K²(3k₀)²(3k₀+1)/δ²`, rounded up.
///
/// `k_at_3k0` is `K(s₀, 3k₀, A)`.
pub fn d_dimension(spec: &ConeSpec, k_at_3k0: f64, max_col_norm: f64, delta: f64) -> Result<u64> {
    if !(k_at_3k0 > 0.0 && max_col_norm > 0.0) {
        return Err(Error::ConfigInvalid("K and the column norm must be positive".into()));
    }
    if !(delta > 0.0 && delta <= 1.0) {
        return Err(Error::ConfigInvalid(format!("delta {delta} outside (0, 1]")));
    }
    let s0 = spec.s0 as f64;
    let k3 = 3.0 * spec.k0;
    let d = s0 + s0 * max_col_norm.powi(2) * 16.0 * k_at_3k0.powi(2) * k3 * k3 * (k3 + 1.0) / (delta * delta);
    // absorb the last-ulp error of δ² before rounding up
    Ok((d - d * 1e-12).ceil() as u64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SupportRatio {
    pub support: Vec<usize>,
    pub ratio_min: f64,
    pub ratio_max: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IsometryReport {
    pub d_prime: usize,
    pub supports_checked: usize,
    /// Per-support ratio extremes; empty when the caller asked for a summary only.
    pub per_support: Vec<SupportRatio>,
    pub ratio_min: f64,
    pub ratio_max: f64,
    /// `max(ratio_max − 1, 1 − ratio_min)` over supports.
    pub delta: f64,
    /// Per-support extremes are exact generalized eigenvalues.
    pub exact_per_support: bool,
    /// Every support of size `d′` was visited.
    pub exhaustive: bool,
}

/// Ratio extremes of `‖ΨA_J x‖ / (√n‖A_J x‖)` on one support.
fn support_ratio(m_full: &DenseMatrix, g_full: &DenseMatrix, support: &[usize]) -> Result<(f64, f64)> {
    let m = m_full.submatrix(support, support);
    let g = g_full.submatrix(support, support);
    let (lo, hi) = gen_eig_extremes(&m, &g, DEFAULT_DEFLATION_TOL)?;
    Ok((lo.max(0.0).sqrt(), hi.max(0.0).sqrt()))
}

struct IsoAcc {
    min: f64,
    max: f64,
    list: Vec<(u128, SupportRatio)>,
    err: Option<Error>,
}

impl IsoAcc {
    fn empty() -> Self {
        Self {
            min: f64::INFINITY,
            max: f64::NEG_INFINITY,
            list: Vec::new(),
            err: None,
        }
    }

    fn merge(mut self, other: Self) -> Self {
        self.min = self.min.min(other.min);
        self.max = self.max.max(other.max);
        self.list.extend(other.list);
        self.err = self.err.or(other.err);
        self
    }
}

impl Clone for IsoAcc {
    fn clone(&self) -> Self {
        Self {
            min: self.min,
            max: self.max,
            list: self.list.clone(),
            err: self.err.clone(),
        }
    }
}

/// Sparse-isometry report for `Ψ̃ = Ψ/√n` on `A E_J`, `|J| = d′`.
///
/// With `keep_supports = false` only the global extremes are returned.
pub fn restricted_isometry_report(
    psi: &DenseMatrix,
    a: &DenseMatrix,
    d_prime: usize,
    mode: SupportMode,
    keep_supports: bool,
) -> Result<IsometryReport> {
    let x = psi.matmul(a)?;
    let m_full = x.gram().scaled(1.0 / psi.rows() as f64);
    isometry_from_grams(&m_full, &a.gram(), d_prime, mode, keep_supports)
}

/// As [`restricted_isometry_report`] from `XᵀX/n` and `AᵀA` directly.
pub fn isometry_from_grams(
    m_full: &DenseMatrix,
    g_full: &DenseMatrix,
    d_prime: usize,
    mode: SupportMode,
    keep_supports: bool,
) -> Result<IsometryReport> {
    let p = g_full.cols();
    if d_prime == 0 || d_prime > p {
        return Err(Error::Dimension(format!("d' = {d_prime} outside 1..={p}")));
    }
    let visit = |rank: u128, s: &[usize]| -> IsoAcc {
        match support_ratio(m_full, g_full, s) {
            Ok((lo, hi)) => IsoAcc {
                min: lo,
                max: hi,
                list: if keep_supports {
                    vec![(
                        rank,
                        SupportRatio {
                            support: s.to_vec(),
                            ratio_min: lo,
                            ratio_max: hi,
                        },
                    )]
                } else {
                    Vec::new()
                },
                err: None,
            },
            Err(e) => IsoAcc {
                err: Some(e),
                ..IsoAcc::empty()
            },
        }
    };
    let (acc, checked, exhaustive) = match mode {
        SupportMode::Enumerate => {
            let count = check_cap(p, d_prime, ISOMETRY_ENUMERATION_CAP)?;
            (fold_subsets(p, d_prime, IsoAcc::empty(), visit, IsoAcc::merge), count as usize, true)
        }
        SupportMode::Sample { count, seed } => {
            if count == 0 {
                return Err(Error::ConfigInvalid("sample count must be positive".into()));
            }
            let parts = crate::par::map_indices(count, |i| {
                let s = Stream::new(seed, i as u64).subset(p, d_prime);
                visit(i as u128, &s)
            });
            let acc = parts.into_iter().fold(IsoAcc::empty(), IsoAcc::merge);
            (acc, count, false)
        }
    };
    if let Some(e) = acc.err {
        return Err(e);
    }
    let mut list = acc.list;
    list.sort_by_key(|(r, _)| *r);
    Ok(IsometryReport {
        d_prime,
        supports_checked: checked,
        per_support: list.into_iter().map(|(_, s)| s).collect(),
        ratio_min: acc.min,
        ratio_max: acc.max,
        delta: (acc.max - 1.0).max(1.0 - acc.min),
        exact_per_support: true,
        exhaustive,
    })
}

/// Enumerates when `C(p, d′)` is within the cap, otherwise samples supports.
pub fn auto_support_mode(p: usize, d_prime: usize, seed: u64) -> SupportMode {
    if binomial(p, d_prime) <= ISOMETRY_ENUMERATION_CAP {
        SupportMode::Enumerate
    } else {
        SupportMode::Sample {
            count: DEFAULT_SUPPORT_SAMPLES,
            seed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReductionReport {
    /// Measured sparse-isometry constant at `d′`.
    pub delta_sparse: f64,
    pub sparse_exhaustive: bool,
    pub cone_ratio_min: f64,
    pub cone_ratio_max: f64,
    pub cone_samples: usize,
    pub bound_lower: f64,
    pub bound_upper: f64,
    pub conclusion_holds: bool,
    pub k_a: ReEstimate,
    pub k_xa: ReEstimate,
    /// `K(X/√n) ≤ K(A)/(1 − δ)`.
    pub transfer_holds: bool,
    pub delta: f64,
    pub d_prime: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReductionOptions {
    pub isometry_mode: Option<SupportMode>,
    pub re_mode: ReMode,
}

impl Default for ReductionOptions {
    fn default() -> Self {
        Self {
            isometry_mode: None,
            re_mode: ReMode::ExactOracle { grid_per_axis: 180 },
        }
    }
}

pub const TRANSFER_SLACK: f64 = 1e-9;

/// `K_XA ≤ K_A/(1 − δ)` with a small absolute slack.
pub fn transfer_holds(k_a: f64, k_xa: f64, delta: f64) -> bool {
    k_xa <= k_a / (1.0 - delta) + TRANSFER_SLACK
}

/// Empirical check of the reduction principle for one `(Ψ, A)` pair.
#[allow(clippy::too_many_arguments)]
pub fn reduction_verify(
    psi: &DenseMatrix,
    a: &DenseMatrix,
    spec: &ConeSpec,
    delta: f64,
    d_prime: usize,
    cone_samples: usize,
    seed: u64,
    options: &ReductionOptions,
) -> Result<ReductionReport> {
    let x = psi.matmul(a)?;
    reduction_verify_design(&x, a, spec, delta, d_prime, cone_samples, seed, options, None)
}

/// As [`reduction_verify`] for a design `X` whose rows have second moment
/// `AᵀA`, e.g. bounded-entry rows with `A = Σ^{1/2}`.
///
/// `known_k_a` skips recomputing `K(s₀, k₀, A)` when the caller reuses `A`.
#[allow(clippy::too_many_arguments)]
pub fn reduction_verify_design(
    x: &DenseMatrix,
    a: &DenseMatrix,
    spec: &ConeSpec,
    delta: f64,
    d_prime: usize,
    cone_samples: usize,
    seed: u64,
    options: &ReductionOptions,
    known_k_a: Option<&ReEstimate>,
) -> Result<ReductionReport> {
    let p = a.cols();
    if x.cols() != p {
        return Err(Error::Dimension(format!("X has {} columns but A has {p}", x.cols())));
    }
    spec.validate_for(p)?;
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::ConfigInvalid(format!("delta {delta} outside (0, 1)")));
    }
    if cone_samples < 100 {
        return Err(Error::ConfigInvalid("at least 100 cone samples are required".into()));
    }
    if d_prime == 0 || d_prime > p {
        return Err(Error::Dimension(format!("d' = {d_prime} outside 1..={p}")));
    }
    let n = x.rows() as f64;
    let m_full = x.gram().scaled(1.0 / n);
    let g_full = a.gram();
    let iso_mode = options
        .isometry_mode
        .unwrap_or_else(|| auto_support_mode(p, d_prime, crate::rng::mix_seed(seed, 1, 0)));
    let iso = isometry_from_grams(&m_full, &g_full, d_prime, iso_mode, false)?;

    let a_scale = a.frobenius_norm();
    let mut ratio_min = f64::INFINITY;
    let mut ratio_max = f64::NEG_INFINITY;
    for v in sample_cone_batch(spec, p, cone_samples, crate::rng::mix_seed(seed, 2, 0)) {
        let av = a.matvec(&v);
        let norm_av = norm2(&av);
        if norm_av <= 1e-14 * a_scale {
            return Err(Error::ReViolatedOnSample);
        }
        let r = norm2(&x.matvec(&v)) / (n.sqrt() * norm_av);
        ratio_min = ratio_min.min(r);
        ratio_max = ratio_max.max(r);
    }
    let bound_lower = 1.0 - 5.0 * iso.delta;
    let bound_upper = 1.0 + 3.0 * iso.delta;

    let re_mode = match options.re_mode {
        ReMode::Heuristic { restarts, iters, .. } => ReMode::Heuristic {
            restarts,
            iters,
            seed: crate::rng::mix_seed(seed, 3, 0),
        },
        m => m,
    };
    let k_a = match known_k_a {
        Some(k) => k.clone(),
        None => re_constant(a, spec, re_mode)?,
    };
    let k_xa = re_constant(&x.scaled(1.0 / n.sqrt()), spec, re_mode)?;
    Ok(ReductionReport {
        delta_sparse: iso.delta,
        sparse_exhaustive: iso.exhaustive,
        cone_ratio_min: ratio_min,
        cone_ratio_max: ratio_max,
        cone_samples,
        bound_lower,
        bound_upper,
        conclusion_holds: bound_lower <= ratio_min && ratio_max <= bound_upper,
        transfer_holds: transfer_holds(k_a.k, k_xa.k, delta),
        k_a,
        k_xa,
        delta,
        d_prime,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HullReport {
    /// `max_θ (LHS(θ) − RHS(θ))`; non-positive when the inclusion is consistent.
    pub max_violation: f64,
    pub holds: bool,
    pub theta_samples: usize,
    pub cone_samples: usize,
    pub supports: usize,
    /// The left side is a maximum over sampled cone points, so `holds = false`
    /// is a counterexample only up to that sampling.
    pub note: String,
}

/// Orthonormal basis (as rows) of the column space of `A_J`.
fn column_space_basis(a: &DenseMatrix, support: &[usize]) -> Result<Vec<Vec<f64>>> {
    let aj = a.select_columns(support);
    let e = sym_eig(&aj.gram(), 1e-12)?;
    let top = e.max();
    let mut basis = Vec::new();
    if top <= 0.0 {
        return Ok(basis);
    }
    for (k, &lambda) in e.eigenvalues.iter().enumerate() {
        if lambda <= DEFAULT_DEFLATION_TOL * top {
            continue;
        }
        let coeffs = e.eigenvectors.column(k);
        let col = aj.matvec(&coeffs);
        let s = lambda.sqrt();
        basis.push(col.into_iter().map(|x| x / s).collect());
    }
    Ok(basis)
}

/// Support-function comparison of `A(Cone) ∩ S^{q−1}` against
/// `(1 − δ)^{−1} conv(⋃_{|J| = d} A E_J ∩ S^{q−1})`.
#[allow(clippy::too_many_arguments)]
pub fn hull_functional_check(
    a: &DenseMatrix,
    spec: &ConeSpec,
    d: usize,
    delta: f64,
    theta_samples: usize,
    cone_samples: usize,
    seed: u64,
) -> Result<HullReport> {
    let (q, p) = (a.rows(), a.cols());
    spec.validate_for(p)?;
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::ConfigInvalid(format!("delta {delta} outside (0, 1)")));
    }
    if d == 0 || d > p {
        return Err(Error::Dimension(format!("d = {d} outside 1..={p}")));
    }
    let supports = check_cap(p, d, HULL_ENUMERATION_CAP)? as usize;
    let thetas: Vec<Vec<f64>> = (0..theta_samples)
        .map(|i| Stream::new(crate::rng::mix_seed(seed, 4, 0), i as u64).unit_vector(q))
        .collect();

    let mut images = Vec::with_capacity(cone_samples);
    for v in sample_cone_batch(spec, p, cone_samples, crate::rng::mix_seed(seed, 5, 0)) {
        let av = a.matvec(&v);
        let norm = norm2(&av);
        if norm <= 1e-14 * a.frobenius_norm() {
            return Err(Error::ReViolatedOnSample);
        }
        images.push(av.into_iter().map(|x| x / norm).collect::<Vec<_>>());
    }
    let lhs: Vec<f64> = thetas
        .iter()
        .map(|t| images.iter().map(|y| dot(y, t)).fold(f64::NEG_INFINITY, f64::max))
        .collect();

    let rhs_raw = fold_subsets(
        p,
        d,
        vec![0.0f64; theta_samples],
        |_, s| {
            let basis = column_space_basis(a, s).unwrap_or_default();
            thetas
                .iter()
                .map(|t| basis.iter().map(|b| dot(b, t).powi(2)).sum::<f64>().sqrt())
                .collect()
        },
        |a, b| a.into_iter().zip(b).map(|(x, y)| x.max(y)).collect(),
    );
    let scale = 1.0 / (1.0 - delta);
    let max_violation = lhs
        .iter()
        .zip(&rhs_raw)
        .map(|(l, r)| l - scale * r)
        .fold(f64::NEG_INFINITY, f64::max);
    Ok(HullReport {
        max_violation,
        holds: max_violation <= 1e-9,
        theta_samples,
        cone_samples,
        supports,
        note: "left side maximized over sampled cone points only".into(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(s0: usize, k0: f64) -> ConeSpec {
        ConeSpec::new(s0, k0).unwrap()
    }

    #[test]
    fn d_dimension_examples() {
        assert_eq!(d_dimension(&spec(2, 1.0), 1.0, 1.0, 0.2).unwrap(), 28_802);
        assert_eq!(d_dimension(&spec(1, 1.0), 1.0, 1.0, 1.0).unwrap(), 577);
        let d1 = d_dimension(&spec(2, 1.0), 1.3, 0.8, 0.3).unwrap() - 2;
        let d2 = d_dimension(&spec(2, 1.0), 1.3, 0.8, 0.15).unwrap() - 2;
        assert!((d2 as f64 / d1 as f64 - 4.0).abs() < 1e-3);
    }

    #[test]
    fn identity_psi_is_isometric() {
        let n = 6;
        let psi = DenseMatrix::identity(n).scaled((n as f64).sqrt());
        let a = DenseMatrix::from_fn(6, 4, |i, j| ((i * 7 + j * 3) % 5) as f64 - 2.0);
        let r = restricted_isometry_report(&psi, &a, 2, SupportMode::Enumerate, true).unwrap();
        assert!(r.delta < 1e-12, "{}", r.delta);
        assert_eq!(r.per_support.len(), 6);
    }

    #[test]
    fn rank_one_ratio() {
        let psi = DenseMatrix::from_rows(&[vec![0.5, -2.0, 1.5]]).unwrap();
        let r = restricted_isometry_report(&psi, &DenseMatrix::identity(3), 1, SupportMode::Enumerate, true).unwrap();
        for (j, s) in r.per_support.iter().enumerate() {
            let expect = psi.get(0, j).abs();
            assert!((s.ratio_min - expect).abs() < 1e-14 && (s.ratio_max - expect).abs() < 1e-14);
        }
    }

    #[test]
    fn whole_space_hull_is_trivial() {
        let a = DenseMatrix::identity(5);
        let r = hull_functional_check(&a, &spec(1, 1.0), 5, 0.1, 50, 200, 3).unwrap();
        assert!(r.holds);
        assert!(r.max_violation <= 1.0 - 1.0 / 0.9 + 1e-12);
    }
}
