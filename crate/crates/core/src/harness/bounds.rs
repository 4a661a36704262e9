//! Sample-size bounds and probability floors, evaluated literally.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SampleSizeInputs {
    /// Sparsity level (`m`, or `d` for the bounded-entry bound).
    pub m: usize,
    pub alpha: f64,
    /// `δ`; also used as `τ` in the sparse-isometry bound.
    pub delta: f64,
    pub p: usize,
    /// Entry bound `M`.
    pub big_m: f64,
    /// `ρ_min(d, Σ^{1/2})`.
    pub rho: f64,
    pub d: usize,
    /// Leading constant of the bounded-entry and recovery bounds.
    #[serde(default = "one")]
    pub c: f64,
    /// Constant inside the logarithm of the recovery bound.
    #[serde(default = "one")]
    pub c_log: f64,
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SampleSizes {
    pub n_subgaussian: u64,
    pub n_sparse: u64,
    pub n_bounded: u64,
    pub n_recovery: u64,
}

fn ceil_count(x: f64) -> u64 {
    // float-to-int casts saturate, so astronomically large bounds stay representable
    x.max(0.0).ceil() as u64
}

/// `2000 m α⁴/δ² · ln(60ep/(mδ))`, before rounding.
pub fn subgaussian_raw(m: f64, alpha: f64, delta: f64, p: f64) -> f64 {
    2000.0 * m * alpha.powi(4) / (delta * delta) * (60.0 * std::f64::consts::E * p / (m * delta)).ln()
}

/// `80 m α⁴/τ² · ln(12ep/(mτ))`, before rounding.
pub fn sparse_raw(m: f64, alpha: f64, tau: f64, p: f64) -> f64 {
    80.0 * m * alpha.powi(4) / (tau * tau) * (12.0 * std::f64::consts::E * p / (m * tau)).ln()
}

/// `B · ln³ B` with `B = C M² d ln p/(ρδ²)`, before rounding.
pub fn bounded_raw(c: f64, big_m: f64, d: f64, p: f64, rho: f64, delta: f64) -> f64 {
    let b = c * big_m * big_m * d * p.ln() / (rho * delta * delta);
    b * b.ln().powi(3)
}

/// `C m ln(c p/m)`, before rounding.
pub fn recovery_raw(c: f64, c_log: f64, m: f64, p: f64) -> f64 {
    c * m * (c_log * p / m).ln()
}

pub fn sample_size_formulas(inputs: &SampleSizeInputs) -> Result<SampleSizes> {
    let i = inputs;
    let positive = [i.alpha, i.delta, i.big_m, i.rho, i.c, i.c_log];
    if i.m == 0 || i.p == 0 || i.d == 0 || positive.iter().any(|v| !(*v > 0.0) || !v.is_finite()) {
        return Err(Error::ConfigInvalid("sample-size inputs must be positive".into()));
    }
    let (m, p, d) = (i.m as f64, i.p as f64, i.d as f64);
    Ok(SampleSizes {
        n_subgaussian: ceil_count(subgaussian_raw(m, i.alpha, i.delta, p)),
        n_sparse: ceil_count(sparse_raw(m, i.alpha, i.delta, p)),
        n_bounded: ceil_count(bounded_raw(i.c, i.big_m, d, p, i.rho, i.delta)),
        n_recovery: ceil_count(recovery_raw(i.c, i.c_log, m, p)),
    })
}

/// `1 − 2exp(−δ²n/(2000α⁴))`.
pub fn floor_subgaussian(delta: f64, n: usize, alpha: f64) -> f64 {
    1.0 - 2.0 * (-(delta * delta) * n as f64 / (2000.0 * alpha.powi(4))).exp()
}

/// `1 − 2exp(−τ²n/(80α⁴))`.
pub fn floor_sparse(tau: f64, n: usize, alpha: f64) -> f64 {
    1.0 - 2.0 * (-(tau * tau) * n as f64 / (80.0 * alpha.powi(4))).exp()
}

/// `1 − exp(−δρn/(6M²d))`.
pub fn floor_bounded(delta: f64, rho: f64, n: usize, big_m: f64, d: usize) -> f64 {
    1.0 - (-delta * rho * n as f64 / (6.0 * big_m * big_m * d as f64)).exp()
}

/// Union bound for seeing every one of `p` equiprobable rows in `n` draws:
/// `P(miss) ≤ p(1 − 1/p)^n ≤ p·e^{−n/p}`.
pub fn floor_coupon(p: usize, n: usize) -> f64 {
    1.0 - p as f64 * (-(n as f64) / p as f64).exp()
}
