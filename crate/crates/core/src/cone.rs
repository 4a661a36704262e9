//! The cone `Cone(s₀, k₀) = {x : ∃ |I| = s₀, ‖x_{Iᶜ}‖₁ ≤ k₀‖x_I‖₁}`.
//!
//! Index sets are 0-based and sorted ascending throughout the crate.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{norm1, norm2};
use crate::rng::{mix_seed, Stream};

/// Slack on the cone inequality, relative to `‖v‖₁`.
pub const MEMBERSHIP_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConeSpec {
    pub s0: usize,
    pub k0: f64,
}

impl ConeSpec {
    pub fn new(s0: usize, k0: f64) -> Result<Self> {
        if s0 == 0 {
            return Err(Error::ConfigInvalid("s0 must be at least 1".into()));
        }
        if !(k0 > 0.0) || !k0.is_finite() {
            return Err(Error::ConfigInvalid(format!("k0 = {k0} must be positive")));
        }
        Ok(Self { s0, k0 })
    }

    /// Checks `s₀ < p` for vectors in `R^p`.
    pub fn validate_for(&self, p: usize) -> Result<()> {
        Self::new(self.s0, self.k0)?;
        if self.s0 >= p {
            return Err(Error::ConfigInvalid(format!(
                "s0 = {} must be smaller than p = {p}",
                self.s0
            )));
        }
        Ok(())
    }

    pub fn with_k0(self, k0: f64) -> Self {
        Self { k0, ..self }
    }
}

/// Indices of the `s0` largest `|v_i|`, ties broken toward the lower index.
pub fn top_support(v: &[f64], s0: usize) -> Result<Vec<usize>> {
    if v.iter().all(|&x| x == 0.0) {
        return Err(Error::ZeroVector);
    }
    if s0 > v.len() {
        return Err(Error::Dimension(format!(
            "support size {s0} exceeds length {}",
            v.len()
        )));
    }
    let mut idx: Vec<usize> = (0..v.len()).collect();
    idx.sort_by(|&i, &j| v[j].abs().total_cmp(&v[i].abs()).then(i.cmp(&j)));
    idx.truncate(s0);
    idx.sort_unstable();
    Ok(idx)
}

/// `(‖v_I‖₁, ‖v_{Iᶜ}‖₁)` for a sorted index set `I`.
pub fn split_l1(v: &[f64], support: &[usize]) -> (f64, f64) {
    let on: f64 = support.iter().map(|&i| v[i].abs()).sum();
    (on, norm1(v) - on)
}

pub fn restrict(v: &[f64], support: &[usize]) -> Vec<f64> {
    support.iter().map(|&i| v[i]).collect()
}

pub fn complement(support: &[usize], p: usize) -> Vec<usize> {
    let mut mask = vec![true; p];
    for &i in support {
        mask[i] = false;
    }
    (0..p).filter(|&i| mask[i]).collect()
}

/// Cone membership with the top-`s₀` support as witness.
///
/// The top support maximizes `‖v_I‖₁` over `|I| = s₀`, so testing it alone
/// decides whether any qualifying `I` exists.
pub fn in_cone(v: &[f64], spec: &ConeSpec) -> Result<(bool, Vec<usize>)> {
    let support = top_support(v, spec.s0)?;
    let (on, off) = split_l1(v, &support);
    let member = off <= spec.k0 * on + MEMBERSHIP_TOL * norm1(v);
    Ok((member, support))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConeRegime {
    /// Exactly `s₀` nonzeros.
    Sparse,
    /// `‖v_{Iᶜ}‖₁ = k₀‖v_I‖₁` for the planted support.
    Boundary,
    /// Off-support mass a uniform fraction of the boundary value.
    Interior,
}

impl ConeRegime {
    pub const ALL: [ConeRegime; 3] = [Self::Sparse, Self::Boundary, Self::Interior];
}

/// Unit vector in `Cone(s₀, k₀) ⊂ R^p` drawn in the given regime.
pub fn sample_cone_in(spec: &ConeSpec, p: usize, regime: ConeRegime, s: &mut Stream) -> Vec<f64> {
    assert!(p > spec.s0, "need p > s0");
    let support = s.subset(p, spec.s0);
    let off = complement(&support, p);
    let mut v = vec![0.0; p];
    for &i in &support {
        v[i] = s.normal();
    }
    let head_l1: f64 = support.iter().map(|&i| v[i].abs()).sum();
    let fraction = match regime {
        ConeRegime::Sparse => 0.0,
        ConeRegime::Boundary => 1.0,
        ConeRegime::Interior => s.uniform(),
    };
    if fraction > 0.0 {
        let tail: Vec<f64> = off.iter().map(|_| s.normal()).collect();
        let tail_l1 = norm1(&tail);
        if tail_l1 > 0.0 {
            let scale = fraction * spec.k0 * head_l1 / tail_l1;
            for (&i, t) in off.iter().zip(&tail) {
                v[i] = t * scale;
            }
        }
    }
    let norm = norm2(&v);
    if norm == 0.0 {
        // measure-zero event; fall back to a coordinate vector
        v[support[0]] = 1.0;
        return v;
    }
    v.iter_mut().for_each(|x| *x /= norm);
    v
}

/// One cone sample; the regime cycles with the seed so batches are stratified.
pub fn sample_cone(spec: &ConeSpec, p: usize, seed: u64) -> Vec<f64> {
    let regime = ConeRegime::ALL[(mix_seed(seed, 0xc0, 0) % 3) as usize];
    sample_cone_in(spec, p, regime, &mut Stream::new(seed, 0))
}

/// `count` samples, sample `i` in regime `i mod 3` from stream `(seed, i)`.
pub fn sample_cone_batch(spec: &ConeSpec, p: usize, count: usize, seed: u64) -> Vec<Vec<f64>> {
    (0..count)
        .map(|i| {
            let mut s = Stream::new(seed, i as u64);
            sample_cone_in(spec, p, ConeRegime::ALL[i % 3], &mut s)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(s0: usize, k0: f64) -> ConeSpec {
        ConeSpec::new(s0, k0).unwrap()
    }

    #[test]
    fn top_support_examples() {
        assert_eq!(top_support(&[3.0, -5.0, 1.0], 1).unwrap(), vec![1]);
        assert_eq!(top_support(&[1.0, 1.0, 0.0], 1).unwrap(), vec![0]);
        assert_eq!(top_support(&[0.1, 0.9, 0.5, 0.7], 2).unwrap(), vec![1, 3]);
        assert_eq!(top_support(&[0.0, 0.0], 1), Err(Error::ZeroVector));
    }

    #[test]
    fn membership_examples() {
        assert_eq!(
            in_cone(&[1.0, 1.0, 0.0, 0.0], &spec(1, 1.0)).unwrap(),
            (true, vec![0])
        );
        assert!(!in_cone(&[1.0, 1.0, 1.0], &spec(1, 1.0)).unwrap().0);
        assert!(in_cone(&[0.0, 4.0, 0.0, -2.0], &spec(2, 1e-6)).unwrap().0);
        assert_eq!(in_cone(&[0.0; 3], &spec(1, 1.0)), Err(Error::ZeroVector));
    }

    #[test]
    fn boundary_sample_in_two_dims() {
        let mut s = Stream::new(3, 0);
        let v = sample_cone_in(&spec(1, 1.0), 2, ConeRegime::Boundary, &mut s);
        assert!((v[0].abs() - v[1].abs()).abs() < 1e-12);
        assert!((norm2(&v) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn sparse_regime_has_s0_nonzeros() {
        let mut s = Stream::new(8, 0);
        let v = sample_cone_in(&spec(3, 2.0), 10, ConeRegime::Sparse, &mut s);
        assert_eq!(v.iter().filter(|&&x| x != 0.0).count(), 3);
    }

    #[test]
    fn spec_validation() {
        assert!(ConeSpec::new(0, 1.0).is_err());
        assert!(ConeSpec::new(1, 0.0).is_err());
        assert!(spec(3, 1.0).validate_for(3).is_err());
        assert!(spec(2, 1.0).validate_for(3).is_ok());
    }
}
