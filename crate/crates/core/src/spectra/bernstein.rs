use serde::{Deserialize, Serialize};

use crate::ensembles::{psi2_constant, RowDistribution};
use crate::error::{Error, Result};
use crate::rng::Stream;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BernsteinReport {
    pub distribution: String,
    pub n: usize,
    pub theta: f64,
    pub reps: usize,
    pub alpha: f64,
    /// Fraction of repetitions with `|n⁻¹ Σ Y_j² − 1| > θ`.
    pub empirical_tail: f64,
    /// `2 exp(−θ² n / (10 α⁴))`.
    pub bound: f64,
    /// Binomial standard error of `empirical_tail`.
    pub std_err: f64,
    pub holds: bool,
}

pub fn bernstein_bound(theta: f64, n: usize, alpha: f64) -> f64 {
    2.0 * (-(theta * theta) * n as f64 / (10.0 * alpha.powi(4))).exp()
}

/// Empirical tail of the mean of `n` squared coordinate draws against the
/// sub-gaussian Bernstein bound.
pub fn bernstein_tail_check(
    dist: &RowDistribution,
    n: usize,
    theta: f64,
    reps: usize,
    seed: u64,
) -> Result<BernsteinReport> {
    Ok(bernstein_tail_check_many(dist, n, &[theta], reps, seed)?.remove(0))
}

/// Several thresholds evaluated on the same repetitions.
pub fn bernstein_tail_check_many(
    dist: &RowDistribution,
    n: usize,
    thetas: &[f64],
    reps: usize,
    seed: u64,
) -> Result<Vec<BernsteinReport>> {
    if !dist.is_psi2() {
        return Err(Error::Unsupported(format!(
            "{} has no unit-variance coordinate law",
            dist.name()
        )));
    }
    if n == 0 || reps == 0 {
        return Err(Error::ConfigInvalid("n and reps must be positive".into()));
    }
    if thetas.iter().any(|t| !(*t > 0.0 && *t < 1.0)) {
        return Err(Error::ConfigInvalid("theta must lie in (0, 1)".into()));
    }
    let alpha = psi2_constant(dist)?;
    let table = dist.lattice_table();
    let deviations = crate::par::map_indices(reps, |r| {
        let mut s = Stream::new(seed, r as u64);
        let mean_sq = (0..n)
            .map(|_| {
                let y = dist.scalar(table.as_ref(), &mut s);
                y * y
            })
            .sum::<f64>()
            / n as f64;
        (mean_sq - 1.0).abs()
    });
    Ok(thetas
        .iter()
        .map(|&theta| {
            let hits = deviations.iter().filter(|&&d| d > theta).count();
            let tail = hits as f64 / reps as f64;
            let std_err = (tail * (1.0 - tail) / reps as f64).sqrt();
            let bound = bernstein_bound(theta, n, alpha);
            BernsteinReport {
                distribution: dist.name().into(),
                n,
                theta,
                reps,
                alpha,
                empirical_tail: tail,
                bound,
                std_err,
                holds: tail <= bound + 3.0 * std_err,
            }
        })
        .collect())
}
