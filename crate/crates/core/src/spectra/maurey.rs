//! Empirical (Maurey) sparsification of a point in a convex hull.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::norm2;
use crate::rng::Stream;

pub const SIMPLEX_TOL: f64 = 1e-10;
pub const DEFAULT_MAX_ATTEMPTS: usize = 50;
pub const MAX_DRAWS: usize = 100_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MaureyMode {
    /// `m = ⌈4·max‖u_j‖²/ε²⌉` draws per attempt, so `E err² ≤ ε²`.
    Strict,
    /// `4m` draws per attempt: `E err² ≤ ε²/4`, failure probability at most 1/4.
    Relaxed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaureyResult {
    /// Distinct indices drawn, ascending.
    pub support: Vec<usize>,
    /// Convex weights aligned with `support`.
    pub coeffs: Vec<f64>,
    pub err: f64,
    /// Draws per attempt (the cap on `|L|`).
    pub draws: usize,
    pub attempts: usize,
}

/// Number of i.i.d. draws per attempt.
pub fn maurey_draws(max_norm_sq: f64, epsilon: f64, mode: MaureyMode) -> usize {
    let m = (4.0 * max_norm_sq / (epsilon * epsilon)).ceil().clamp(1.0, 1e18) as usize;
    match mode {
        MaureyMode::Strict => m,
        MaureyMode::Relaxed => m.saturating_mul(4),
    }
}

/// Approximates `y = Σ α_j u_j` by the average of i.i.d. draws `u_{k_i}`, `P(k = j) = α_j`.
pub fn maurey_sparsify(
    points: &[Vec<f64>],
    weights: &[f64],
    epsilon: f64,
    mode: MaureyMode,
    seed: u64,
    max_attempts: usize,
) -> Result<MaureyResult> {
    if points.is_empty() || points.len() != weights.len() {
        return Err(Error::Dimension(format!(
            "{} points but {} weights",
            points.len(),
            weights.len()
        )));
    }
    let q = points[0].len();
    if points.iter().any(|u| u.len() != q) {
        return Err(Error::Dimension("points of unequal length".into()));
    }
    if !(epsilon > 0.0) {
        return Err(Error::ConfigInvalid(format!("epsilon {epsilon} must be positive")));
    }
    let total: f64 = weights.iter().sum();
    if weights.iter().any(|&w| w < -SIMPLEX_TOL || !w.is_finite()) || (total - 1.0).abs() > SIMPLEX_TOL {
        return Err(Error::ConfigInvalid("weights are not on the probability simplex".into()));
    }
    let mut y = vec![0.0; q];
    for (u, &w) in points.iter().zip(weights) {
        for (yi, ui) in y.iter_mut().zip(u) {
            *yi += w * ui;
        }
    }
    let max_norm_sq = points.iter().map(|u| norm2(u).powi(2)).fold(0.0, f64::max);
    let draws = maurey_draws(max_norm_sq, epsilon, mode);
    if draws > MAX_DRAWS {
        return Err(Error::ConfigInvalid(format!(
            "{draws} draws per attempt exceed the cap {MAX_DRAWS}; raise epsilon"
        )));
    }

    let mut cdf: Vec<f64> = weights
        .iter()
        .scan(0.0, |acc, &w| {
            *acc += w.max(0.0);
            Some(*acc)
        })
        .collect();
    let last = *cdf.last().unwrap();
    cdf.iter_mut().for_each(|c| *c /= last);

    let mut best_err = f64::INFINITY;
    for attempt in 0..max_attempts {
        let mut s = Stream::new(seed, attempt as u64);
        let mut counts = vec![0usize; points.len()];
        for _ in 0..draws {
            let u = s.uniform();
            let k = cdf.partition_point(|&c| c <= u).min(points.len() - 1);
            counts[k] += 1;
        }
        let support: Vec<usize> = (0..points.len()).filter(|&j| counts[j] > 0).collect();
        let coeffs: Vec<f64> = support
            .iter()
            .map(|&j| counts[j] as f64 / draws as f64)
            .collect();
        let mut approx = vec![0.0; q];
        for (&j, &c) in support.iter().zip(&coeffs) {
            for (a, ui) in approx.iter_mut().zip(&points[j]) {
                *a += c * ui;
            }
        }
        let err = norm2(&approx.iter().zip(&y).map(|(a, b)| a - b).collect::<Vec<_>>());
        if err <= epsilon {
            return Ok(MaureyResult {
                support,
                coeffs,
                err,
                draws,
                attempts: attempt + 1,
            });
        }
        best_err = best_err.min(err);
    }
    Err(Error::AttemptsExhausted {
        attempts: max_attempts,
        best_err,
    })
}
