use serde::{Deserialize, Serialize};

use crate::ensembles::{sample_bounded_rows, RowDistribution};
use crate::error::{Error, Result};
use crate::numerics::norm2;
use crate::rng::{mix_seed, Stream};
use crate::solvers::{basis_pursuit, BP_DEFAULT_MAX_ITERS, BP_DEFAULT_TOL};

/// Largest `‖β̂ − β‖₂` counted as exact recovery.
pub const EXACT_RECOVERY_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WalshNecessity {
    pub p: usize,
    pub m: usize,
    pub n: usize,
    pub reps: usize,
    /// Fraction of repetitions in which every master row was drawn.
    pub all_rows_frequency: f64,
    /// Fraction recovering a planted 1-sparse signal by basis pursuit.
    pub recovery_frequency: Option<f64>,
}

pub(crate) struct WalshRep {
    pub distinct: usize,
    pub recovered: Option<bool>,
}

/// One repetition: `n` rows, row `i` from stream `(seed, i)` as in the design sampler.
pub(crate) fn walsh_rep(m: usize, blocks: usize, n: usize, seed: u64, recovery: bool) -> Result<WalshRep> {
    let p = m * blocks;
    let mut seen = vec![false; p];
    for i in 0..n {
        seen[Stream::new(seed, i as u64).index(p)] = true;
    }
    let distinct = seen.iter().filter(|&&s| s).count();
    let recovered = if recovery {
        let design = sample_bounded_rows(&RowDistribution::walsh(m, blocks), n, p, seed)?;
        let mut s = Stream::new(mix_seed(seed, 1, 0), 0);
        let mut beta = vec![0.0; p];
        beta[s.index(p)] = s.sign();
        let b = design.x.matvec(&beta);
        Some(match basis_pursuit(&design.x, &b, BP_DEFAULT_TOL, BP_DEFAULT_MAX_ITERS) {
            Ok(r) => {
                let diff: Vec<f64> = r.beta_hat.iter().zip(&beta).map(|(a, c)| a - c).collect();
                norm2(&diff) <= EXACT_RECOVERY_TOL
            }
            Err(Error::Infeasible(_)) => false,
            Err(e) => return Err(e),
        })
    } else {
        None
    };
    Ok(WalshRep { distinct, recovered })
}

/// Coupon-collector check of the Walsh ensemble: how often `n` draws see all
/// `p = m·k` master rows. Repetition `r` uses seed `mix_seed(seed, r, 0)`.
pub fn walsh_necessity(p: usize, m: usize, n: usize, reps: usize, seed: u64, recovery: bool) -> Result<WalshNecessity> {
    if m == 0 || !m.is_power_of_two() || !p.is_multiple_of(m) || p == 0 {
        return Err(Error::ConfigInvalid(format!("need p = m·k with m a power of two (p={p}, m={m})")));
    }
    if reps == 0 || n == 0 {
        return Err(Error::ConfigInvalid("n and reps must be positive".into()));
    }
    let outcomes = crate::par::map_indices(reps, |r| walsh_rep(m, p / m, n, mix_seed(seed, r as u64, 0), recovery));
    let outcomes: Vec<WalshRep> = outcomes.into_iter().collect::<Result<_>>()?;
    let all = outcomes.iter().filter(|o| o.distinct == p).count();
    let recovery_frequency = recovery.then(|| {
        outcomes.iter().filter(|o| o.recovered == Some(true)).count() as f64 / reps as f64
    });
    Ok(WalshNecessity {
        p,
        m,
        n,
        reps,
        all_rows_frequency: all as f64 / reps as f64,
        recovery_frequency,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_row_ensemble_is_always_complete() {
        let r = walsh_necessity(1, 1, 3, 20, 0, false).unwrap();
        assert_eq!(r.all_rows_frequency, 1.0);
    }

    #[test]
    fn too_few_draws_never_complete() {
        let r = walsh_necessity(8, 4, 7, 50, 1, false).unwrap();
        assert_eq!(r.all_rows_frequency, 0.0);
    }

    #[test]
    fn recovery_with_all_rows() {
        // with every row present X has full column rank, so the 1-sparse signal is recovered
        let r = walsh_necessity(4, 4, 200, 10, 2, true).unwrap();
        assert_eq!(r.all_rows_frequency, 1.0);
        assert_eq!(r.recovery_frequency, Some(1.0));
    }

    #[test]
    fn rejects_bad_shapes() {
        assert!(walsh_necessity(12, 3, 10, 10, 0, false).is_err());
        assert!(walsh_necessity(12, 8, 10, 10, 0, false).is_err());
    }
}
