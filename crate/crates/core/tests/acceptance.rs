//! End-to-end checks with pinned tolerances. Each test prints one PASS/FAIL line.
//!
//! Run with `cargo test -p re-cert --test acceptance -- --nocapture`.

use std::time::{Duration, Instant};

use recert::cone::ConeSpec;
use recert::ensembles::{CovarianceSpec, RowDistribution};
use recert::harness::{run_experiment, walsh_necessity, ExperimentConfig, ExperimentKind};
use recert::numerics::DenseMatrix;
use recert::rng::Stream;
use recert::spectra::maurey::{maurey_draws, DEFAULT_MAX_ATTEMPTS};
use recert::spectra::sparse_eig::sparse_eigs_of_gram;
use recert::spectra::{
    bernstein_tail_check_many, maurey_sparsify, re_constant, rip_constant, sparse_eigs, MaureyMode, ReMode,
    SupportMode,
};

fn report(id: u32, what: &str, pass: bool, detail: String) {
    println!("[{id:>2}] {}: {what} ({detail})", if pass { "PASS" } else { "FAIL" });
}

fn gaussian_matrix(rows: usize, cols: usize, seed: u64) -> DenseMatrix {
    let mut s = Stream::new(seed, 0);
    DenseMatrix::from_fn(rows, cols, |_, _| s.normal())
}

/// Eigenvalues of `[[a, b], [b, d]]`.
fn eig2(a: f64, b: f64, d: f64) -> (f64, f64) {
    let mid = 0.5 * (a + d);
    let rad = (0.25 * (a - d) * (a - d) + b * b).sqrt();
    (mid - rad, mid + rad)
}

#[test]
fn sparse_eigenvalues_match_closed_form() {
    let start = Instant::now();
    let mut worst = 0.0f64;
    for seed in 0..20 {
        let b = gaussian_matrix(8, 8, 100 + seed);
        let s = b.gram();
        let r = sparse_eigs_of_gram(&s, 2, SupportMode::Enumerate).unwrap();
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for i in 0..8 {
            for j in i + 1..8 {
                let (l, h) = eig2(s.get(i, i), s.get(i, j), s.get(j, j));
                lo = lo.min(l);
                hi = hi.max(h);
            }
        }
        let scale = hi.max(1.0);
        worst = worst.max((r.rho_min - lo.max(0.0)).abs() / scale).max((r.rho_max - hi).abs() / scale);
    }
    let elapsed = start.elapsed();
    let pass = worst <= 1e-10 && elapsed < Duration::from_secs(1);
    report(1, "sparse eigenvalues vs 2x2 closed form", pass, format!("max rel err {worst:.2e}, {elapsed:.2?}"));
    assert!(pass);
}

#[test]
fn rip_matches_sparse_eigenvalues() {
    let mut worst = 0.0f64;
    for seed in 0..20 {
        let x = gaussian_matrix(20, 10, 200 + seed);
        let theta = rip_constant(&x, 2).unwrap();
        let r = sparse_eigs(&x.scaled(1.0 / 20f64.sqrt()), 2, SupportMode::Enumerate).unwrap();
        let expect = (r.rho_max - 1.0).max(1.0 - r.rho_min);
        worst = worst.max((theta - expect).abs());
    }
    let pass = worst <= 1e-10;
    report(2, "RIP constant vs sparse eigenvalues", pass, format!("max abs err {worst:.2e}"));
    assert!(pass);
}

#[test]
fn re_constant_exact_values() {
    let start = Instant::now();
    let mode = ReMode::ExactOracle { grid_per_axis: 720 };
    let mut worst = 0.0f64;
    for p in [4, 8] {
        for s0 in [1, 2] {
            for k0 in [1.0, 3.0] {
                let r = re_constant(&DenseMatrix::identity(p), &ConeSpec::new(s0, k0).unwrap(), mode).unwrap();
                worst = worst.max((r.k - 1.0).abs());
            }
        }
    }
    let diag = re_constant(&DenseMatrix::from_diag(&[1.0, 0.5]), &ConeSpec::new(1, 1.0).unwrap(), mode).unwrap();
    let elapsed = start.elapsed();
    let diag_err = (diag.k - 2.0).abs();
    let pass = worst <= 1e-6 && diag_err <= 1e-4 && elapsed < Duration::from_secs(120);
    report(
        3,
        "K(I) = 1 and K(diag(1, 0.5)) = 2",
        pass,
        format!("max |K(I) - 1| = {worst:.2e}, |K - 2| = {diag_err:.2e}, {elapsed:.2?}"),
    );
    assert!(pass);
}

#[test]
fn heuristic_never_undercuts_exact() {
    let spec = ConeSpec::new(1, 1.0).unwrap();
    let mut worst = f64::INFINITY;
    let mut failures = 0;
    for seed in 0..50u64 {
        let a = gaussian_matrix(6, 6, 400 + seed);
        let exact = re_constant(&a, &spec, ReMode::ExactOracle { grid_per_axis: 720 }).unwrap();
        let heur = re_constant(&a, &spec, ReMode::Heuristic { restarts: 16, iters: 200, seed }).unwrap();
        let gap = heur.inv_k - exact.inv_k;
        worst = worst.min(gap);
        if gap < -1e-6 {
            failures += 1;
        }
    }
    let pass = failures == 0;
    report(
        4,
        "heuristic inv_K >= exact inv_K - 1e-6",
        pass,
        format!("{failures}/50 violations, min gap {worst:.2e}"),
    );
    assert!(pass);
}

#[test]
fn reduction_principle_transfer() {
    let start = Instant::now();
    let mut c = ExperimentConfig::new(ExperimentKind::ReTransfer, vec![640], 50);
    c.covariance = Some(CovarianceSpec::identity(32));
    c.cone = ConeSpec::new(2, 1.0).unwrap();
    c.delta = 0.25;
    c.d_prime = Some(8);
    c.base_seed = 2024;
    let out = run_experiment(&c).unwrap();
    let cell = &out.summary.cells[0];
    let inside = out
        .records
        .iter()
        .filter(|r| {
            let d = r.delta_sparse.unwrap();
            1.0 - 5.0 * d <= r.cone_ratio_min.unwrap() && r.cone_ratio_max.unwrap() <= 1.0 + 3.0 * d
        })
        .count();
    let elapsed = start.elapsed();
    let pass = out.summary.failures.is_empty()
        && cell.frequency >= 0.95
        && inside == out.records.len()
        && elapsed < Duration::from_secs(600);
    report(
        5,
        "RE transfer K(X/sqrt n) <= K(A)/(1 - delta), cone ratios within [1 - 5d', 1 + 3d']",
        pass,
        format!(
            "transfer {}/{}, cone ratios {inside}/{}, {elapsed:.2?}",
            cell.successes,
            cell.trials,
            out.records.len()
        ),
    );
    assert!(pass);
}

#[test]
fn sparse_isometry_frequency() {
    let mut lines = Vec::new();
    let mut pass = true;
    for ensemble in [RowDistribution::Gaussian, RowDistribution::Rademacher] {
        let mut c = ExperimentConfig::new(ExperimentKind::SparseIsometry, vec![50, 100, 200, 400, 800], 200);
        c.ensemble = ensemble.clone();
        c.covariance = Some(CovarianceSpec::ar1(0.5, 24));
        c.d_prime = Some(3);
        c.tau = Some(0.3);
        c.base_seed = 606;
        let out = run_experiment(&c).unwrap();
        let cells = &out.summary.cells;
        let monotone = cells.windows(2).all(|w| {
            let noise = 3.0 * (w[0].std_err.powi(2) + w[1].std_err.powi(2)).sqrt();
            w[1].frequency >= w[0].frequency - noise
        });
        let last = cells.last().unwrap().frequency;
        pass &= monotone && last >= 0.95 && out.summary.failures.is_empty();
        let freqs: Vec<String> = cells.iter().map(|c| format!("{:.3}", c.frequency)).collect();
        lines.push(format!("{}: [{}] monotone={monotone}", ensemble.name(), freqs.join(", ")));
    }
    report(6, "sparse isometry frequency non-decreasing, >= 0.95 at n = 800", pass, lines.join("; "));
    assert!(pass);
}

#[test]
fn bernstein_bound_holds() {
    let mut cells = 0;
    let mut held = 0;
    let mut worst_margin = f64::NEG_INFINITY;
    for dist in [RowDistribution::Gaussian, RowDistribution::Rademacher, RowDistribution::uniform_unit()] {
        for (i, n) in [200usize, 1000].into_iter().enumerate() {
            let reports = bernstein_tail_check_many(&dist, n, &[0.3, 0.5], 100_000, 700 + i as u64).unwrap();
            for r in reports {
                cells += 1;
                // independent evaluation of the bound
                let bound = 2.0 * (-(r.theta * r.theta) * n as f64 / (10.0 * r.alpha.powi(4))).exp();
                let se = (r.empirical_tail * (1.0 - r.empirical_tail) / 100_000.0).sqrt();
                let ok = r.empirical_tail <= bound + 3.0 * se;
                held += ok as usize;
                worst_margin = worst_margin.max(r.empirical_tail - bound);
            }
        }
    }
    let alpha_g = recert::ensembles::psi2_constant(&RowDistribution::Gaussian).unwrap();
    let pass = held == cells && (alpha_g * alpha_g - 8.0 / 3.0).abs() < 1e-9;
    report(
        7,
        "Bernstein tail <= 2exp(-theta^2 n/(10 alpha^4)) + 3se",
        pass,
        format!("{held}/{cells} cells, max(tail - bound) = {worst_margin:.3e}"),
    );
    assert!(pass);
}

#[test]
fn maurey_sparsifier_success_rates() {
    let eps = 0.3;
    let mut strict_ok = 0;
    let mut relaxed_ok = 0;
    let mut audit_ok = true;
    for inst in 0..100u64 {
        let mut s = Stream::new(800, inst);
        let points: Vec<Vec<f64>> = (0..200)
            .map(|_| {
                let r = s.uniform();
                s.unit_vector(50).into_iter().map(|x| x * r).collect()
            })
            .collect();
        let weights = s.simplex(200);
        let max_sq = points.iter().map(|u| u.iter().map(|x| x * x).sum::<f64>()).fold(0.0, f64::max);
        let target: Vec<f64> = (0..50).map(|k| points.iter().zip(&weights).map(|(u, w)| w * u[k]).sum()).collect();
        for (mode, attempts) in [(MaureyMode::Strict, DEFAULT_MAX_ATTEMPTS), (MaureyMode::Relaxed, 5)] {
            let Ok(r) = maurey_sparsify(&points, &weights, eps, mode, inst, attempts) else {
                continue;
            };
            let approx: Vec<f64> = (0..50)
                .map(|k| r.support.iter().zip(&r.coeffs).map(|(&j, c)| c * points[j][k]).sum())
                .collect();
            let err = approx.iter().zip(&target).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
            let cap = (4.0 * max_sq / (eps * eps)).ceil() as usize * if mode == MaureyMode::Relaxed { 4 } else { 1 };
            audit_ok &= err <= eps && r.support.len() <= cap && r.draws == maurey_draws(max_sq, eps, mode);
            match mode {
                MaureyMode::Strict => strict_ok += 1,
                MaureyMode::Relaxed => relaxed_ok += 1,
            }
        }
    }
    let pass = strict_ok >= 95 && relaxed_ok >= 99 && audit_ok;
    report(
        8,
        "Maurey strict >= 95/100 in 50 attempts, relaxed >= 99/100 in 5",
        pass,
        format!("strict {strict_ok}, relaxed {relaxed_ok}, audits ok = {audit_ok}"),
    );
    assert!(pass);
}

#[test]
fn bounded_entry_walsh_ensemble() {
    let mut c = ExperimentConfig::new(ExperimentKind::BoundedRe, vec![1024], 100);
    c.ensemble = RowDistribution::walsh(8, 2);
    c.cone = ConeSpec::new(1, 1.0).unwrap();
    c.delta = 0.3;
    c.base_seed = 909;
    let out = run_experiment(&c).unwrap();
    let transfer = out.summary.cells[0].frequency;
    let k_a_ok = out.summary.k_a.is_some_and(|k| (k - 2f64.sqrt()).abs() < 1e-6);

    let p = 16usize;
    let n_hi = (p as f64 * (p as f64).ln() + 5.0 * p as f64).ceil() as usize;
    let hi = walsh_necessity(p, 8, n_hi, 200, 910, false).unwrap().all_rows_frequency;
    let lo = walsh_necessity(p, 8, p, 200, 911, false).unwrap().all_rows_frequency;
    let pass = transfer >= 0.95 && k_a_ok && hi >= 0.95 && lo <= 0.05 && out.summary.failures.is_empty();
    report(
        9,
        "Walsh ensemble RE transfer and coupon-collector necessity",
        pass,
        format!("transfer {transfer:.3}, K(A) ok = {k_a_ok}, all rows at n={n_hi}: {hi:.3}, at n={p}: {lo:.3}"),
    );
    assert!(pass);
}

#[test]
fn lasso_recovery_rates() {
    let start = Instant::now();
    let (p, s) = (64usize, 4usize);
    let n = (8.0 * s as f64 * (p as f64 / s as f64).ln()).ceil() as usize;
    let mut c = ExperimentConfig::new(ExperimentKind::RecoveryRate, vec![n, 2 * n], 200);
    c.covariance = Some(CovarianceSpec::identity(p));
    c.cone = ConeSpec::new(s, 3.0).unwrap();
    c.sigma = 0.5;
    c.lambda_multiple = 2.0;
    c.base_seed = 1010;
    let out = run_experiment(&c).unwrap();
    let cells = &out.summary.cells;
    let cone_freq = cells[0].frequency;
    let m1 = cells[0].median_recovery_ratio.unwrap_or(f64::NAN);
    let m2 = cells[1].median_recovery_ratio.unwrap_or(f64::NAN);
    let stable = m1.is_finite() && m2.is_finite() && m1 > 0.0 && m2 > 0.0 && (m1 / m2).max(m2 / m1) <= 2.0;
    let elapsed = start.elapsed();
    let pass = cone_freq >= 0.9 && stable && elapsed < Duration::from_secs(300);
    report(
        10,
        "Lasso error in Cone(s, 3) >= 90%, rate ratio stable across n and 2n",
        pass,
        format!(
            "n = {n}: cone {cone_freq:.3} (2n: {:.3}), median ratios {m1:.3} / {m2:.3}, {elapsed:.2?}",
            cells[1].frequency
        ),
    );
    assert!(pass);
}

#[test]
fn output_independent_of_thread_count() {
    let mut configs = Vec::new();
    let mut re = ExperimentConfig::new(ExperimentKind::ReTransfer, vec![40, 80], 4);
    re.covariance = Some(CovarianceSpec::ar1(0.3, 8));
    re.cone = ConeSpec::new(2, 1.0).unwrap();
    re.d_prime = Some(3);
    re.cone_samples = 100;
    re.re_mode = ReMode::Heuristic { restarts: 8, iters: 50, seed: 0 };
    re.base_seed = 11;
    configs.push(re);
    let mut iso = ExperimentConfig::new(ExperimentKind::SparseIsometry, vec![30, 60], 6);
    iso.covariance = Some(CovarianceSpec::identity(10));
    iso.ensemble = RowDistribution::Rademacher;
    iso.d_prime = Some(2);
    iso.base_seed = 12;
    configs.push(iso);
    let mut phase = ExperimentConfig::new(ExperimentKind::PhaseDiagram, vec![10, 20], 3);
    phase.covariance = Some(CovarianceSpec::identity(16));
    phase.s0_values = vec![1, 3];
    phase.base_seed = 13;
    configs.push(phase);

    let mut identical = 0;
    for c in &configs {
        let run = |k| {
            recert::par::with_threads(Some(k), || {
                let out = run_experiment(c).unwrap();
                (out.csv().unwrap(), out.json().unwrap())
            })
        };
        if run(1) == run(8) {
            identical += 1;
        }
    }
    let pass = identical == configs.len();
    report(11, "byte-identical output with 1 and 8 threads", pass, format!("{identical}/{} experiments", configs.len()));
    assert!(pass);
}
