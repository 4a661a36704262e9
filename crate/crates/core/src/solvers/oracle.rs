use crate::cone::{in_cone, ConeSpec};
use crate::error::{Error, Result};

/// `c·σ·√(2 ln p / n)`; `c = 2` is the usual choice.
pub fn default_lambda(multiple: f64, sigma: f64, p: usize, n: usize) -> f64 {
    multiple * sigma * (2.0 * (p as f64).ln() / n as f64).sqrt()
}

/// Smallest integer `s₀` with `Σ min(β_i², λ²σ²) ≤ s₀λ²σ²`.
pub fn oracle_s0(beta: &[f64], lambda: f64, sigma: f64) -> Result<usize> {
    let level = (lambda * sigma).powi(2);
    if !(level > 0.0) || !level.is_finite() {
        return Err(Error::ConfigInvalid("lambda·sigma must be positive".into()));
    }
    let total: f64 = beta.iter().map(|b| (b * b).min(level)).sum();
    let mut s0 = (total / level).ceil() as usize;
    // guard against the quotient rounding up past an exact multiple
    while s0 > 0 && (s0 - 1) as f64 * level >= total {
        s0 -= 1;
    }
    Ok(s0.min(beta.len()))
}

/// `‖β̂ − β‖₂² / (s₀λ²σ²)`.
pub fn oracle_rate_ratio(beta_true: &[f64], beta_hat: &[f64], s0: usize, lambda: f64, sigma: f64) -> Result<f64> {
    if beta_true.len() != beta_hat.len() {
        return Err(Error::Dimension("coefficient vectors of unequal length".into()));
    }
    if s0 == 0 {
        return Err(Error::ConfigInvalid("s0 must be at least 1".into()));
    }
    let err: f64 = beta_true.iter().zip(beta_hat).map(|(a, b)| (a - b).powi(2)).sum();
    Ok(err / (s0 as f64 * (lambda * sigma).powi(2)))
}

/// Whether `β̂ − β` lies in `Cone(|supp β|, k₀)`, with the top support as witness.
///
/// The zero error vector counts as a member of every cone.
pub fn lasso_cone_check(beta_true: &[f64], beta_hat: &[f64], k0: f64) -> Result<(bool, Vec<usize>)> {
    if beta_true.len() != beta_hat.len() {
        return Err(Error::Dimension("coefficient vectors of unequal length".into()));
    }
    let s = beta_true.iter().filter(|&&b| b != 0.0).count();
    if s == 0 {
        return Err(Error::ZeroVector);
    }
    let v: Vec<f64> = beta_hat.iter().zip(beta_true).map(|(a, b)| a - b).collect();
    match in_cone(&v, &ConeSpec::new(s, k0)?) {
        Err(Error::ZeroVector) => Ok((true, Vec::new())),
        other => other,
    }
}
