//! Covariance models and random design ensembles.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{psd_sqrt, DenseMatrix};
use crate::rng::Stream;

/// Largest supported Walsh order exponent, `2^12 = 4096`.
pub const MAX_WALSH_LOG2: u32 = 12;
pub const DEFAULT_TRUNCATION: u32 = 20;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CovarianceKind {
    Identity,
    Ar1 { rho: f64 },
    ScaledIdentity { c: f64 },
    Explicit {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        path: Option<PathBuf>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        matrix: Option<DenseMatrix>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CovarianceSpec {
    #[serde(flatten)]
    pub kind: CovarianceKind,
    pub p: usize,
}

impl CovarianceSpec {
    pub fn identity(p: usize) -> Self {
        Self {
            kind: CovarianceKind::Identity,
            p,
        }
    }

    pub fn ar1(rho: f64, p: usize) -> Self {
        Self {
            kind: CovarianceKind::Ar1 { rho },
            p,
        }
    }

    pub fn scaled_identity(c: f64, p: usize) -> Self {
        Self {
            kind: CovarianceKind::ScaledIdentity { c },
            p,
        }
    }
}

pub fn build_covariance(spec: &CovarianceSpec) -> Result<DenseMatrix> {
    let p = spec.p;
    if p == 0 {
        return Err(Error::ConfigInvalid("covariance dimension must be positive".into()));
    }
    match &spec.kind {
        CovarianceKind::Identity => Ok(DenseMatrix::identity(p)),
        CovarianceKind::Ar1 { rho } => {
            if !(rho.abs() < 1.0) {
                return Err(Error::ConfigInvalid(format!("ar1 rho {rho} outside (-1, 1)")));
            }
            Ok(DenseMatrix::from_fn(p, p, |i, j| rho.powi(i.abs_diff(j) as i32)))
        }
        CovarianceKind::ScaledIdentity { c } => {
            if !(*c > 0.0) || !c.is_finite() {
                return Err(Error::ConfigInvalid(format!("scale {c} must be positive")));
            }
            Ok(DenseMatrix::identity(p).scaled(*c))
        }
        CovarianceKind::Explicit { path, matrix } => {
            let m = match (path, matrix) {
                (_, Some(m)) => m.clone(),
                (Some(path), None) => DenseMatrix::read_path(path)?,
                (None, None) => {
                    return Err(Error::ConfigInvalid(
                        "explicit covariance needs a path or an inline matrix".into(),
                    ))
                }
            };
            if m.rows() != p || m.cols() != p {
                return Err(Error::Dimension(format!(
                    "explicit covariance is {}x{}, expected {p}x{p}",
                    m.rows(),
                    m.cols()
                )));
            }
            // psd_sqrt performs the symmetry and PSD checks
            psd_sqrt(&m)?;
            Ok(m)
        }
    }
}

/// Law of the rows of a random design.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RowDistribution {
    Gaussian,
    Rademacher,
    /// Integer lattice law `∝ exp(−m²/2)` per coordinate, truncated at `±truncation`.
    DiscreteGaussian {
        #[serde(default = "default_truncation")]
        truncation: u32,
    },
    /// Independent uniform coordinates. Without `bound` they are uniform on
    /// `[−√3, √3]` (unit variance, isotropic); with `bound = M` they are uniform
    /// on `[−M, M]` and the covariance is `M²/3 · I`.
    UniformBounded {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        bound: Option<f64>,
    },
    /// Rows of the block-diagonal matrix with `blocks` Walsh blocks of order
    /// `block_size`, each picked with probability `1/p`.
    WalshRows {
        block_size: usize,
        blocks: usize,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        psi2_alpha: Option<f64>,
    },
}

fn default_truncation() -> u32 {
    DEFAULT_TRUNCATION
}

impl RowDistribution {
    pub fn discrete_gaussian() -> Self {
        Self::DiscreteGaussian {
            truncation: DEFAULT_TRUNCATION,
        }
    }

    pub fn uniform_unit() -> Self {
        Self::UniformBounded { bound: None }
    }

    pub fn walsh(block_size: usize, blocks: usize) -> Self {
        Self::WalshRows {
            block_size,
            blocks,
            psi2_alpha: None,
        }
    }

    /// Whether rows are isotropic with independent ψ₂ coordinates.
    pub fn is_psi2(&self) -> bool {
        matches!(
            self,
            Self::Gaussian
                | Self::Rademacher
                | Self::DiscreteGaussian { .. }
                | Self::UniformBounded { bound: None }
        )
    }

    /// Almost-sure bound on `‖Y‖_∞`, when one exists.
    pub fn entry_bound(&self) -> Option<f64> {
        match self {
            Self::Rademacher => Some(1.0),
            Self::DiscreteGaussian { truncation } => Some(*truncation as f64),
            Self::UniformBounded { bound } => Some(bound.unwrap_or(3f64.sqrt())),
            Self::WalshRows { .. } => Some(1.0),
            Self::Gaussian => None,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::Gaussian => "gaussian",
            Self::Rademacher => "rademacher",
            Self::DiscreteGaussian { .. } => "discrete_gaussian",
            Self::UniformBounded { .. } => "uniform_bounded",
            Self::WalshRows { .. } => "walsh_rows",
        }
    }

    /// One scalar draw from the coordinate law of a ψ₂ kind.
    pub(crate) fn scalar(&self, table: Option<&LatticeTable>, s: &mut Stream) -> f64 {
        match self {
            Self::Gaussian => s.normal(),
            Self::Rademacher => s.sign(),
            Self::DiscreteGaussian { .. } => {
                table.expect("lattice table for discrete gaussian").sample(s)
            }
            Self::UniformBounded { bound } => {
                let b = bound.unwrap_or(3f64.sqrt());
                s.uniform_in(-b, b)
            }
            Self::WalshRows { .. } => unreachable!("walsh rows have no scalar coordinate law"),
        }
    }

    pub(crate) fn lattice_table(&self) -> Option<LatticeTable> {
        match self {
            Self::DiscreteGaussian { truncation } => Some(LatticeTable::new(*truncation)),
            _ => None,
        }
    }
}

/// Inverse-CDF table for the truncated one-dimensional discrete Gaussian.
#[derive(Debug, Clone)]
pub(crate) struct LatticeTable {
    truncation: i64,
    cdf: Vec<f64>,
}

impl LatticeTable {
    pub(crate) fn new(truncation: u32) -> Self {
        let t = truncation as i64;
        let weights: Vec<f64> = (-t..=t).map(|m| (-(m * m) as f64 / 2.0).exp()).collect();
        let total: f64 = weights.iter().sum();
        let mut acc = 0.0;
        let mut cdf: Vec<f64> = weights
            .iter()
            .map(|w| {
                acc += w / total;
                acc
            })
            .collect();
        *cdf.last_mut().unwrap() = 1.0;
        Self { truncation: t, cdf }
    }

    pub(crate) fn sample(&self, s: &mut Stream) -> f64 {
        let u = s.uniform();
        let k = self.cdf.partition_point(|&c| c <= u);
        (k as i64 - self.truncation) as f64
    }
}

/// Second moment `Σ m² e^{−m²/2} / Σ e^{−m²/2}` over `|m| ≤ truncation`.
pub fn discrete_gaussian_second_moment(truncation: u32) -> f64 {
    let t = truncation as i64;
    let (mut num, mut den) = (0.0, 0.0);
    for m in -t..=t {
        let w = (-(m * m) as f64 / 2.0).exp();
        num += (m * m) as f64 * w;
        den += w;
    }
    num / den
}

/// `n × q` matrix with i.i.d. rows; row `i` is drawn from stream `(seed, i)`.
pub fn sample_psi(dist: &RowDistribution, n: usize, q: usize, seed: u64) -> Result<DenseMatrix> {
    if !dist.is_psi2() {
        return Err(Error::Unsupported(format!(
            "{} is not an isotropic psi2 row law",
            dist.name()
        )));
    }
    if n == 0 || q == 0 {
        return Err(Error::Dimension("n and q must be positive".into()));
    }
    let table = dist.lattice_table();
    let rows: Vec<Vec<f64>> = crate::par::map_indices(n, |i| {
        let mut s = Stream::new(seed, i as u64);
        (0..q).map(|_| dist.scalar(table.as_ref(), &mut s)).collect()
    });
    DenseMatrix::new(n, q, rows.concat())
}

/// Sylvester–Walsh matrix of order `2^l`, entries `(−1)^{popcount(i & j)}`.
pub fn walsh_matrix(l: u32) -> Result<DenseMatrix> {
    if l > MAX_WALSH_LOG2 {
        return Err(Error::TooLarge(l));
    }
    let m = 1usize << l;
    Ok(DenseMatrix::from_fn(m, m, walsh_entry))
}

#[inline]
fn walsh_entry(i: usize, j: usize) -> f64 {
    if (i & j).count_ones().is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

/// Row `r` of the block-diagonal matrix with `blocks` Walsh blocks of order `m`.
pub fn walsh_master_row(m: usize, blocks: usize, r: usize) -> Vec<f64> {
    let p = m * blocks;
    let b = r / m;
    let i = r % m;
    let mut row = vec![0.0; p];
    for j in 0..m {
        row[b * m + j] = walsh_entry(i, j);
    }
    row
}

/// Block-diagonal master matrix whose rows the Walsh ensemble samples from.
pub fn walsh_block_diagonal(m: usize, blocks: usize) -> Result<DenseMatrix> {
    validate_walsh(m, blocks)?;
    let p = m * blocks;
    let rows: Vec<Vec<f64>> = (0..p).map(|r| walsh_master_row(m, blocks, r)).collect();
    DenseMatrix::from_rows(&rows)
}

fn validate_walsh(m: usize, blocks: usize) -> Result<()> {
    if m == 0 || !m.is_power_of_two() || blocks == 0 {
        return Err(Error::ConfigInvalid(format!(
            "walsh blocks need a power-of-two order and at least one block (got m={m}, k={blocks})"
        )));
    }
    if m.trailing_zeros() > MAX_WALSH_LOG2 {
        return Err(Error::TooLarge(m.trailing_zeros()));
    }
    Ok(())
}

/// A sampled design `X` together with what produced it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DesignSample {
    pub x: DenseMatrix,
    /// Isotropic factor, present when `X = Ψ A`.
    pub psi: Option<DenseMatrix>,
    /// `A` for composed designs; `Σ^{1/2}` of the row law for raw-row designs.
    pub a: DenseMatrix,
    pub seed: u64,
    pub distribution: RowDistribution,
}

/// `X = Ψ A` with `Ψ` drawn by [`sample_psi`].
pub fn sample_composed(
    dist: &RowDistribution,
    a: &DenseMatrix,
    n: usize,
    seed: u64,
) -> Result<DesignSample> {
    let psi = sample_psi(dist, n, a.rows(), seed)?;
    let x = psi.matmul(a)?;
    Ok(DesignSample {
        x,
        psi: Some(psi),
        a: a.clone(),
        seed,
        distribution: dist.clone(),
    })
}

/// `n` i.i.d. rows in `R^p` from a bounded-entry law.
pub fn sample_bounded_rows(
    dist: &RowDistribution,
    n: usize,
    p: usize,
    seed: u64,
) -> Result<DesignSample> {
    if n == 0 || p == 0 {
        return Err(Error::Dimension("n and p must be positive".into()));
    }
    let (rows, sqrt_scale): (Vec<Vec<f64>>, f64) = match dist {
        RowDistribution::WalshRows {
            block_size, blocks, ..
        } => {
            validate_walsh(*block_size, *blocks)?;
            if block_size * blocks != p {
                return Err(Error::Dimension(format!(
                    "walsh ensemble has p = {} but {p} was requested",
                    block_size * blocks
                )));
            }
            let rows = crate::par::map_indices(n, |i| {
                let mut s = Stream::new(seed, i as u64);
                walsh_master_row(*block_size, *blocks, s.index(p))
            });
            // E YYᵀ = (m/p)·I
            (rows, (*block_size as f64 / p as f64).sqrt())
        }
        RowDistribution::UniformBounded { bound } => {
            let b = bound.unwrap_or(3f64.sqrt());
            if !(b > 0.0) || !b.is_finite() {
                return Err(Error::ConfigInvalid(format!("bound {b} must be positive")));
            }
            let rows = crate::par::map_indices(n, |i| {
                let mut s = Stream::new(seed, i as u64);
                (0..p).map(|_| s.uniform_in(-b, b)).collect()
            });
            (rows, b / 3f64.sqrt())
        }
        other => {
            return Err(Error::Unsupported(format!(
                "{} is not a bounded-row law",
                other.name()
            )))
        }
    };
    Ok(DesignSample {
        x: DenseMatrix::new(n, p, rows.concat())?,
        psi: None,
        a: DenseMatrix::identity(p).scaled(sqrt_scale),
        seed,
        distribution: dist.clone(),
    })
}

/// ψ₂ constant of the coordinate law: the `t` solving `E exp(Y²/t²) = 2`.
///
/// This is the Orlicz norm of a single coordinate, which is what the scalar
/// tail bound consumes. For i.i.d. strictly sub-gaussian coordinates the
/// supremum over all marginal directions approaches the gaussian value `√(8/3)`.
pub fn psi2_constant(dist: &RowDistribution) -> Result<f64> {
    match dist {
        RowDistribution::Gaussian => Ok(bisect_psi2(gaussian_mgf2)),
        RowDistribution::Rademacher => Ok(bisect_psi2(|t| (1.0 / (t * t)).exp())),
        RowDistribution::DiscreteGaussian { truncation } => {
            let t = *truncation as i64;
            let z: f64 = (-t..=t).map(|m| (-(m * m) as f64 / 2.0).exp()).sum();
            Ok(bisect_psi2(|s| {
                let inv = 1.0 / (s * s);
                (-t..=t)
                    .map(|m| {
                        let m2 = (m * m) as f64;
                        (m2 * (inv - 0.5)).exp()
                    })
                    .sum::<f64>()
                    / z
            }))
        }
        RowDistribution::UniformBounded { bound } => {
            let b = bound.unwrap_or(3f64.sqrt());
            // ψ₂ scales linearly with the half-width
            let unit = bisect_psi2(|t| uniform_mgf2(1.0, t));
            Ok(unit * b)
        }
        RowDistribution::WalshRows { psi2_alpha, .. } => psi2_alpha
            .ok_or_else(|| Error::Unsupported("walsh rows need a declared psi2 constant".into())),
    }
}

/// `E exp(g²/t²) = (1 − 2/t²)^{−1/2}` for `t > √2`.
fn gaussian_mgf2(t: f64) -> f64 {
    let r = 1.0 - 2.0 / (t * t);
    if r <= 0.0 {
        f64::INFINITY
    } else {
        r.powf(-0.5)
    }
}

/// `E exp(U²/t²)` for `U` uniform on `[−b, b]`, composite Simpson with 4000 panels.
pub(crate) fn uniform_mgf2(b: f64, t: f64) -> f64 {
    const PANELS: usize = 4000;
    let h = b / PANELS as f64;
    let f = |u: f64| (u * u / (t * t)).exp();
    let mut acc = f(0.0) + f(b);
    for k in 1..PANELS {
        let w = if k % 2 == 1 { 4.0 } else { 2.0 };
        acc += w * f(k as f64 * h);
    }
    acc * h / 3.0 / b
}

/// Bisection for the root of a decreasing `mgf(t) = 2`, to `1e-12` absolute.
fn bisect_psi2(mgf: impl Fn(f64) -> f64) -> f64 {
    let mut hi = 1.0;
    while mgf(hi) > 2.0 {
        hi *= 2.0;
    }
    let mut lo = hi / 2.0;
    while mgf(lo) <= 2.0 && lo > 1e-12 {
        lo /= 2.0;
    }
    while hi - lo > 1e-12 {
        let mid = 0.5 * (lo + hi);
        if mgf(mid) > 2.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}
