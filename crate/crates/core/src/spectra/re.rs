//! The restricted-eigenvalue constant
//!
//! ```text
//! 1/K(s₀, k₀, A) = min_{|J| = s₀} min_{‖v_{Jᶜ}‖₁ ≤ k₀‖v_J‖₁} ‖Av‖₂ / ‖v_J‖₂
//! ```
//!
//! For a fixed support `J` and a fixed direction `u = v_J` on the unit sphere
//! the remaining minimization over `w = v_{Jᶜ}` is a convex ℓ₁-constrained
//! least-squares problem. The exact oracle therefore sweeps `u` over a grid on
//! `S^{s₀−1}` (refined locally around the best grid point) and solves the
//! inner problem by accelerated projected gradient. The heuristic alternates
//! between sphere steps in `u`, inner solves in `w` and support updates, and
//! only ever reports values attained by feasible vectors, so it bounds the
//! minimum from above.

use std::f64::consts::{FRAC_PI_2, PI};

use serde::{Deserialize, Serialize};

use super::supports::{binomial, fold_subsets};
use crate::cone::{complement, sample_cone_in, top_support, ConeRegime, ConeSpec};
use crate::error::{Error, Result};
use crate::numerics::{dot, l1_ball_project, norm1, norm2, sym_eig, DenseMatrix};
use crate::rng::Stream;

/// Exact oracle limits.
pub const EXACT_MAX_S0: usize = 3;
pub const EXACT_SUPPORT_CAP: u128 = 10_000;
/// Inner solver iteration budget.
pub const INNER_MAX_ITERS: usize = 100_000;
/// Stop once the scaled gradient-mapping norm drops below this (relative to the gradient).
pub const INNER_TOL: f64 = 1e-11;
const GOLDEN_ITERS: usize = 48;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum ReMode {
    /// Sphere grid with `grid_per_axis` points per half turn of each angle.
    ExactOracle { grid_per_axis: usize },
    /// Alternating minimization from random cone starts. Never certifies RE.
    Heuristic { restarts: usize, iters: usize, seed: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReModeTag {
    ExactOracle,
    Heuristic,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReEstimate {
    /// `min ‖Av‖₂/‖v_J‖₂`, attained by the witness.
    pub inv_k: f64,
    /// `1/inv_k`; serialized as `null` when infinite.
    #[serde(with = "finite_or_null")]
    pub k: f64,
    pub witness_v: Vec<f64>,
    pub witness_j: Vec<usize>,
    pub mode: ReModeTag,
    pub spec: ConeSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid_per_axis: Option<usize>,
}

impl ReEstimate {
    /// True when the estimate can certify RE (the exact oracle was used).
    pub fn certifying(&self) -> bool {
        self.mode == ReModeTag::ExactOracle
    }
}

pub(crate) mod finite_or_null {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_f64(*v)
        } else {
            s.serialize_none()
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::INFINITY))
    }
}

/// Inner problem for one support: `min_w ‖A_J u + A_{Jᶜ} w‖² s.t. ‖w‖₁ ≤ k₀‖u‖₁`,
/// expressed through the Gram matrix `G = AᵀA`.
pub(crate) struct SupportProblem {
    pub support: Vec<usize>,
    pub rest: Vec<usize>,
    g_jj: Vec<f64>,
    g_cj: Vec<f64>,
    g_cc: Vec<f64>,
    lipschitz: f64,
}

impl SupportProblem {
    pub fn new(gram: &DenseMatrix, support: &[usize]) -> Self {
        let p = gram.cols();
        let rest = complement(support, p);
        let s = support.len();
        let c = rest.len();
        let g_jj = gram.submatrix(support, support).data().to_vec();
        let g_cj = if c > 0 {
            gram.submatrix(&rest, support).data().to_vec()
        } else {
            Vec::new()
        };
        let (g_cc, lipschitz) = if c > 0 {
            let sub = gram.submatrix(&rest, &rest);
            let top = sym_eig(&sub, 1e-12).map(|e| e.max()).unwrap_or(0.0);
            (sub.data().to_vec(), 2.0 * top.max(0.0))
        } else {
            (Vec::new(), 0.0)
        };
        debug_assert_eq!(g_jj.len(), s * s);
        Self {
            support: support.to_vec(),
            rest,
            g_jj,
            g_cj,
            g_cc,
            lipschitz,
        }
    }

    fn c(&self) -> usize {
        self.rest.len()
    }

    fn head(&self, u: &[f64]) -> f64 {
        let s = u.len();
        let mut acc = 0.0;
        for a in 0..s {
            for b in 0..s {
                acc += u[a] * self.g_jj[a * s + b] * u[b];
            }
        }
        acc
    }

    /// `h = G_{Jᶜ J} u`.
    fn cross(&self, u: &[f64]) -> Vec<f64> {
        let s = u.len();
        (0..self.c())
            .map(|i| dot(&self.g_cj[i * s..(i + 1) * s], u))
            .collect()
    }

    fn gcc_mul(&self, w: &[f64]) -> Vec<f64> {
        let c = self.c();
        (0..c).map(|i| dot(&self.g_cc[i * c..(i + 1) * c], w)).collect()
    }

    fn objective(&self, head: f64, h: &[f64], w: &[f64]) -> f64 {
        let gw = self.gcc_mul(w);
        (head + 2.0 * dot(w, h) + dot(w, &gw)).max(0.0)
    }

    /// Solves the inner problem; returns `(‖A_J u + A_{Jᶜ} w‖², w)`.
    pub fn solve(&self, u: &[f64], k0: f64, warm: Option<&[f64]>) -> (f64, Vec<f64>) {
        let head = self.head(u);
        let c = self.c();
        let radius = k0 * norm1(u);
        if c == 0 || self.lipschitz <= 1e-300 || radius == 0.0 {
            let w = vec![0.0; c];
            let h = self.cross(u);
            return (self.objective(head, &h, &w), w);
        }
        let h = self.cross(u);
        let step = 1.0 / self.lipschitz;
        let grad = |w: &[f64]| -> Vec<f64> {
            let gw = self.gcc_mul(w);
            gw.iter().zip(&h).map(|(a, b)| 2.0 * (a + b)).collect()
        };
        let pg_step = |w: &[f64], g: &[f64]| -> Vec<f64> {
            let trial: Vec<f64> = w.iter().zip(g).map(|(x, d)| x - step * d).collect();
            l1_ball_project(&trial, radius)
        };

        let mut w = match warm {
            Some(w0) if w0.len() == c => l1_ball_project(w0, radius),
            _ => vec![0.0; c],
        };
        let mut y = w.clone();
        let mut t = 1.0f64;
        for it in 0..INNER_MAX_ITERS {
            let gy = grad(&y);
            let w_next = pg_step(&y, &gy);
            // restart momentum when it points uphill
            let uphill: f64 = y
                .iter()
                .zip(&w_next)
                .zip(&w)
                .map(|((yi, wn), wi)| (yi - wn) * (wn - wi))
                .sum();
            let t_next = if uphill > 0.0 {
                1.0
            } else {
                0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt())
            };
            let beta = if uphill > 0.0 { 0.0 } else { (t - 1.0) / t_next };
            y = w_next
                .iter()
                .zip(&w)
                .map(|(wn, wi)| wn + beta * (wn - wi))
                .collect();
            w = w_next;
            t = t_next;
            if it % 8 == 7 {
                let gw = grad(&w);
                let pw = pg_step(&w, &gw);
                let gm: f64 = w.iter().zip(&pw).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt()
                    * self.lipschitz;
                if gm <= INNER_TOL * (1.0 + norm2(&gw)) {
                    break;
                }
            }
        }
        (self.objective(head, &h, &w), w)
    }

    pub fn assemble(&self, p: usize, u: &[f64], w: &[f64]) -> Vec<f64> {
        let mut v = vec![0.0; p];
        for (&i, &x) in self.support.iter().zip(u) {
            v[i] = x;
        }
        for (&i, &x) in self.rest.iter().zip(w) {
            v[i] = x;
        }
        v
    }
}

/// Direction on `S^{s−1}` (antipodal half) from angles.
fn direction(s: usize, angles: &[f64]) -> Vec<f64> {
    match s {
        1 => vec![1.0],
        2 => vec![angles[0].cos(), angles[0].sin()],
        3 => {
            let (phi, theta) = (angles[0], angles[1]);
            vec![phi.sin() * theta.cos(), phi.sin() * theta.sin(), phi.cos()]
        }
        _ => unreachable!("grid oracle supports s0 <= 3"),
    }
}

/// Angle tuples of the sphere grid with spacing `π/g`.
fn sphere_grid(s: usize, g: usize) -> Vec<Vec<f64>> {
    let h = PI / g as f64;
    match s {
        1 => vec![vec![]],
        2 => (0..g).map(|k| vec![k as f64 * h]).collect(),
        3 => {
            let mut pts = Vec::new();
            let rings = g / 2;
            for i in 0..=rings {
                let phi = (i as f64 * h).min(FRAC_PI_2);
                let count = ((2.0 * g as f64 * phi.sin()).ceil() as usize).max(1);
                for k in 0..count {
                    pts.push(vec![phi, 2.0 * PI * k as f64 / count as f64]);
                }
            }
            pts
        }
        _ => unreachable!(),
    }
}

fn golden_min(lo: f64, hi: f64, f: &mut impl FnMut(f64) -> f64) -> (f64, f64) {
    let r = 0.5 * (5f64.sqrt() - 1.0);
    let (mut a, mut b) = (lo, hi);
    let mut x1 = b - r * (b - a);
    let mut x2 = a + r * (b - a);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    for _ in 0..GOLDEN_ITERS {
        if f1 <= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - r * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + r * (b - a);
            f2 = f(x2);
        }
    }
    if f1 <= f2 {
        (x1, f1)
    } else {
        (x2, f2)
    }
}

#[derive(Clone)]
struct Candidate {
    value: f64,
    rank: u128,
    v: Vec<f64>,
    support: Vec<usize>,
}

impl Candidate {
    fn none() -> Self {
        Self {
            value: f64::INFINITY,
            rank: u128::MAX,
            v: Vec::new(),
            support: Vec::new(),
        }
    }

    fn better(self, other: Self) -> Self {
        if (other.value, other.rank) < (self.value, self.rank) {
            other
        } else {
            self
        }
    }
}

fn exact_for_support(
    gram: &DenseMatrix,
    support: &[usize],
    k0: f64,
    grid: &[Vec<f64>],
    g: usize,
) -> (f64, Vec<f64>) {
    let prob = SupportProblem::new(gram, support);
    let s = support.len();
    let p = gram.cols();
    let mut warm: Option<Vec<f64>> = None;
    let mut best = (f64::INFINITY, Vec::new(), Vec::new());
    for angles in grid {
        let u = direction(s, angles);
        let (f, w) = prob.solve(&u, k0, warm.as_deref());
        if f < best.0 {
            best = (f, angles.clone(), w.clone());
        }
        warm = Some(w);
    }
    let (mut fbest, mut angles, mut wbest) = best;
    if s >= 2 {
        let h = PI / g as f64;
        let rounds = if s == 2 { 1 } else { 3 };
        for _ in 0..rounds {
            for axis in 0..angles.len() {
                let centre = angles[axis];
                let mut warm_w = wbest.clone();
                let mut eval = |x: f64| {
                    let mut a = angles.clone();
                    a[axis] = x;
                    let (f, w) = prob.solve(&direction(s, &a), k0, Some(&warm_w));
                    warm_w = w;
                    f
                };
                let (x, _) = golden_min(centre - h, centre + h, &mut eval);
                let mut a = angles.clone();
                a[axis] = x;
                let (f, w) = prob.solve(&direction(s, &a), k0, Some(&wbest));
                if f < fbest {
                    fbest = f;
                    angles = a;
                    wbest = w;
                }
            }
        }
    }
    let u = direction(s, &angles);
    (fbest, prob.assemble(p, &u, &wbest))
}

fn finish(a: &DenseMatrix, spec: &ConeSpec, best: Candidate, mode: ReModeTag, grid: Option<usize>) -> ReEstimate {
    let av = a.matvec(&best.v);
    let head = norm2(&crate::cone::restrict(&best.v, &best.support));
    let inv_k = norm2(&av) / head;
    ReEstimate {
        inv_k,
        k: if inv_k > 0.0 { 1.0 / inv_k } else { f64::INFINITY },
        witness_v: best.v,
        witness_j: best.support,
        mode,
        spec: *spec,
        grid_per_axis: grid,
    }
}

/// Computes (exact oracle) or bounds (heuristic) the RE constant of `a`.
pub fn re_constant(a: &DenseMatrix, spec: &ConeSpec, mode: ReMode) -> Result<ReEstimate> {
    let p = a.cols();
    spec.validate_for(p)?;
    let gram = a.gram();
    match mode {
        ReMode::ExactOracle { grid_per_axis } => {
            if spec.s0 > EXACT_MAX_S0 {
                return Err(Error::InfeasibleMode(format!(
                    "exact oracle needs s0 <= {EXACT_MAX_S0}, got {}",
                    spec.s0
                )));
            }
            let count = binomial(p, spec.s0);
            if count > EXACT_SUPPORT_CAP {
                return Err(Error::InfeasibleMode(format!(
                    "{count} supports exceed the exact-oracle cap {EXACT_SUPPORT_CAP}"
                )));
            }
            if spec.s0 >= 2 && grid_per_axis < 2 {
                return Err(Error::InfeasibleMode("grid_per_axis must be at least 2".into()));
            }
            let g = grid_per_axis.max(1);
            let grid = sphere_grid(spec.s0, g);
            let best = fold_subsets(
                p,
                spec.s0,
                Candidate::none(),
                |rank, support| {
                    let (value, v) = exact_for_support(&gram, support, spec.k0, &grid, g);
                    Candidate {
                        value,
                        rank,
                        v,
                        support: support.to_vec(),
                    }
                },
                Candidate::better,
            );
            Ok(finish(a, spec, best, ReModeTag::ExactOracle, Some(grid_per_axis)))
        }
        ReMode::Heuristic {
            restarts,
            iters,
            seed,
        } => {
            if restarts == 0 {
                return Err(Error::InfeasibleMode("heuristic needs at least one restart".into()));
            }
            let runs = crate::par::map_indices(restarts, |r| {
                heuristic_run(&gram, spec, iters, &mut Stream::new(seed, r as u64), r as u128)
            });
            let best = runs.into_iter().fold(Candidate::none(), Candidate::better);
            Ok(finish(a, spec, best, ReModeTag::Heuristic, None))
        }
    }
}

fn heuristic_run(gram: &DenseMatrix, spec: &ConeSpec, iters: usize, s: &mut Stream, rank: u128) -> Candidate {
    let p = gram.cols();
    let start = sample_cone_in(spec, p, ConeRegime::ALL[(rank % 3) as usize], s);
    let mut support = top_support(&start, spec.s0).expect("cone samples are nonzero");
    let mut prob = SupportProblem::new(gram, &support);
    let mut u = normalized(&crate::cone::restrict(&start, &support));
    let (mut f, mut w) = prob.solve(&u, spec.k0, None);
    let mut step = 0.25;
    for _ in 0..iters {
        let f_before = f;
        // Riemannian gradient of ‖A_J u + A_{Jᶜ} w‖² in u
        let s0 = u.len();
        let mut g: Vec<f64> = (0..s0)
            .map(|a| {
                let jj: f64 = (0..s0).map(|b| prob.g_jj[a * s0 + b] * u[b]).sum();
                let cj: f64 = (0..prob.c()).map(|i| prob.g_cj[i * s0 + a] * w[i]).sum();
                2.0 * (jj + cj)
            })
            .collect();
        let radial = dot(&g, &u);
        g.iter_mut().zip(&u).for_each(|(gi, ui)| *gi -= radial * ui);
        if norm2(&g) > 1e-14 {
            for _ in 0..30 {
                let trial: Vec<f64> = u.iter().zip(&g).map(|(ui, gi)| ui - step * gi).collect();
                let trial = normalized(&trial);
                let (ft, wt) = prob.solve(&trial, spec.k0, Some(&w));
                if ft < f {
                    u = trial;
                    f = ft;
                    w = wt;
                    step = (step * 2.0).min(4.0);
                    break;
                }
                step *= 0.5;
            }
        }
        // move to the top support of the current vector when it changes
        let v = prob.assemble(p, &u, &w);
        let next = top_support(&v, spec.s0).expect("nonzero");
        let mut switched = false;
        if next != support {
            let head = crate::cone::restrict(&v, &next);
            let scale = norm2(&head);
            let candidate = SupportProblem::new(gram, &next);
            let u2: Vec<f64> = head.iter().map(|x| x / scale).collect();
            let w2: Vec<f64> = candidate.rest.iter().map(|&i| v[i] / scale).collect();
            let (f2, w2) = candidate.solve(&u2, spec.k0, Some(&w2));
            if f2 < f {
                support = next;
                prob = candidate;
                u = u2;
                w = w2;
                f = f2;
                switched = true;
            }
        }
        if !switched && f_before - f <= 1e-13 * f_before.max(1e-300) {
            break;
        }
    }
    Candidate {
        value: f,
        rank,
        v: prob.assemble(p, &u, &w),
        support,
    }
}

fn normalized(v: &[f64]) -> Vec<f64> {
    let n = norm2(v);
    v.iter().map(|x| x / n).collect()
}
