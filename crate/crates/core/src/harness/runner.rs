use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::bounds::{
    bounded_raw, floor_bounded, floor_coupon, floor_sparse, floor_subgaussian, recovery_raw, sample_size_formulas,
    sparse_raw, subgaussian_raw, SampleSizeInputs, SampleSizes,
};
use super::config::{BoundMode, ExperimentConfig, ExperimentKind, PhaseSolver};
use super::record::{finite, records_to_csv, TrialRecord, SCHEMA_HEADER};
use super::walsh::{walsh_rep, EXACT_RECOVERY_TOL};
use crate::cone::ConeSpec;
use crate::ensembles::{build_covariance, psi2_constant, sample_bounded_rows, sample_psi, RowDistribution};
use crate::error::{Error, Result};
use crate::numerics::{norm2, psd_sqrt, DenseMatrix};
use crate::rng::{mix_seed, Stream};
use crate::solvers::{
    basis_pursuit, default_lambda, lasso_cd, lasso_cone_check, oracle_rate_ratio, oracle_s0, LassoProblem,
    BP_DEFAULT_MAX_ITERS, BP_DEFAULT_TOL,
};
use crate::spectra::{
    auto_support_mode, bernstein_tail_check_many, d_dimension, re_constant, reduction_verify_design,
    restricted_isometry_report, sparse_eigs, ReEstimate, ReductionOptions,
};

/// Frequency the empirical mode looks for.
pub const EMPIRICAL_TARGET: f64 = 0.95;
const LASSO_TOL: f64 = 1e-10;
const LASSO_MAX_SWEEPS: usize = 10_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellSummary {
    pub n: usize,
    pub s0: usize,
    pub theta: Option<f64>,
    pub trials: usize,
    pub successes: usize,
    pub frequency: f64,
    /// Binomial standard error of `frequency`.
    pub std_err: f64,
    /// Success probability guaranteed by the bound at this `n`.
    pub floor: Option<f64>,
    /// `frequency ≥ floor − 3·std_err`, checked only when the floor exceeds 1/2.
    pub floor_respected: Option<bool>,
    pub median_recovery_ratio: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalFit {
    pub target: f64,
    /// Smallest grid `n` reaching the target frequency.
    pub n_target: Option<usize>,
    /// Leading constant of the sample-size formula implied by `n_target`.
    pub implied_constant: Option<f64>,
    /// The constant as stated with the bound, where it is explicit.
    pub literal_constant: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialFailure {
    pub n: usize,
    pub s0: usize,
    pub trial: usize,
    pub seed: u64,
    pub error: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub schema: String,
    pub kind: ExperimentKind,
    pub mode: BoundMode,
    pub ensemble: String,
    pub base_seed: u64,
    pub p: usize,
    pub d_prime: Option<usize>,
    pub alpha: Option<f64>,
    pub k_a: Option<f64>,
    pub cells: Vec<CellSummary>,
    pub sample_size_inputs: Option<SampleSizeInputs>,
    pub sample_sizes: Option<SampleSizes>,
    pub empirical: EmpiricalFit,
    pub floors_respected: bool,
    /// Literal mode: every checked floor respected. Empirical mode: the target
    /// frequency was reached somewhere on the grid.
    pub verdict: bool,
    pub failures: Vec<TrialFailure>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentOutput {
    pub records: Vec<TrialRecord>,
    pub summary: Summary,
}

impl ExperimentOutput {
    pub fn csv(&self) -> Result<String> {
        records_to_csv(&self.records)
    }

    pub fn json(&self) -> Result<String> {
        serde_json::to_string_pretty(&self.summary).map_err(|e| Error::Io(e.to_string()))
    }

    /// Writes `<kind>.csv` and `<kind>.json` into `dir`, unless the config
    /// names explicit paths. Returns the paths written.
    pub fn write(&self, config: &ExperimentConfig, dir: Option<&Path>) -> Result<(PathBuf, PathBuf)> {
        let base = dir.map(Path::to_path_buf).unwrap_or_else(|| PathBuf::from("."));
        let name = config.kind.name();
        let csv_path = config.output.csv.clone().unwrap_or_else(|| base.join(format!("{name}.csv")));
        let json_path = config.output.json.clone().unwrap_or_else(|| base.join(format!("{name}.json")));
        for path in [&csv_path, &json_path] {
            if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
                std::fs::create_dir_all(parent)?;
            }
        }
        std::fs::write(&csv_path, self.csv()?)?;
        std::fs::write(&json_path, self.json()? + "\n")?;
        Ok((csv_path, json_path))
    }
}

/// Quantities fixed across trials.
struct Shared {
    p: usize,
    a: DenseMatrix,
    alpha: Option<f64>,
    k_a: Option<ReEstimate>,
    d_prime: Option<usize>,
    rho: Option<f64>,
    options: ReductionOptions,
}

fn prepare(config: &ExperimentConfig) -> Result<Shared> {
    let p = config.p()?;
    let kind = config.kind;
    let bounded = kind == ExperimentKind::BoundedRe;
    let a = if bounded || kind == ExperimentKind::WalshNecessity {
        match config.ensemble {
            RowDistribution::WalshRows { .. } | RowDistribution::UniformBounded { .. } => {
                sample_bounded_rows(&config.ensemble, 1, p, 0)?.a
            }
            _ => DenseMatrix::identity(p),
        }
    } else {
        psd_sqrt(&build_covariance(&config.covariance_spec()?)?)?
    };
    let alpha = if config.ensemble.is_psi2() {
        Some(psi2_constant(&config.ensemble)?)
    } else {
        None
    };
    let options = ReductionOptions {
        isometry_mode: config.isometry_mode,
        re_mode: config.re_mode,
    };
    let uses_re = matches!(kind, ExperimentKind::ReTransfer | ExperimentKind::BoundedRe);
    let k_a = if uses_re { Some(re_constant(&a, &config.cone, config.re_mode)?) } else { None };
    let d_prime = match kind {
        ExperimentKind::ReTransfer | ExperimentKind::BoundedRe | ExperimentKind::SparseIsometry => {
            Some(match config.d_prime {
                Some(d) => d,
                None if kind == ExperimentKind::SparseIsometry => config.cone.s0,
                None => {
                    let k3 = re_constant(&a, &config.cone.with_k0(3.0 * config.cone.k0), config.re_mode)?;
                    if !k3.k.is_finite() {
                        return Err(Error::NumericalFailure("A violates RE(s0, 3k0)".into()));
                    }
                    let d = d_dimension(&config.cone, k3.k, a.max_column_norm(), config.delta)?;
                    (d as usize).min(p)
                }
            })
        }
        _ => None,
    };
    let rho = match (bounded, d_prime) {
        (true, Some(d)) => {
            let mode = auto_support_mode(p, d, mix_seed(config.base_seed, u64::MAX, 0));
            Some(sparse_eigs(&a, d, mode)?.rho_min)
        }
        _ => None,
    };
    Ok(Shared {
        p,
        a,
        alpha,
        k_a,
        d_prime,
        rho,
        options,
    })
}

struct Job {
    n_index: usize,
    n: usize,
    s0: usize,
    trial: usize,
    seed: u64,
}

fn planted(p: usize, s: usize, signal: f64, stream: &mut Stream) -> Vec<f64> {
    let mut beta = vec![0.0; p];
    for j in stream.subset(p, s) {
        beta[j] = signal * stream.sign();
    }
    beta
}

fn reduction_trial(config: &ExperimentConfig, shared: &Shared, x: &DenseMatrix, spec: &ConeSpec, rec: &mut TrialRecord) -> Result<()> {
    let d_prime = shared.d_prime.expect("d' is set for reduction kinds");
    let k_a = match &shared.k_a {
        Some(k) if k.spec == *spec => Some(k),
        _ => None,
    };
    let r = reduction_verify_design(
        x,
        &shared.a,
        spec,
        config.delta,
        d_prime,
        config.cone_samples,
        mix_seed(rec.seed, 7, 0),
        &shared.options,
        k_a,
    )?;
    rec.delta_sparse = Some(r.delta_sparse);
    rec.cone_ratio_min = Some(r.cone_ratio_min);
    rec.cone_ratio_max = Some(r.cone_ratio_max);
    rec.k_a = finite(r.k_a.k);
    rec.k_xa = finite(r.k_xa.k);
    rec.transfer_holds = Some(r.transfer_holds);
    rec.bound = finite(r.k_a.k / (1.0 - config.delta));
    rec.success = r.transfer_holds;
    Ok(())
}

fn run_job(config: &ExperimentConfig, shared: &Shared, job: &Job) -> Result<TrialRecord> {
    let p = shared.p;
    let mut rec = TrialRecord::blank(job.trial, job.seed, job.n, p, job.s0, config.cone.k0);
    match config.kind {
        ExperimentKind::ReTransfer => {
            let psi = sample_psi(&config.ensemble, job.n, shared.a.rows(), job.seed)?;
            let x = psi.matmul(&shared.a)?;
            reduction_trial(config, shared, &x, &config.cone, &mut rec)?;
        }
        ExperimentKind::BoundedRe => {
            let x = sample_bounded_rows(&config.ensemble, job.n, p, job.seed)?.x;
            reduction_trial(config, shared, &x, &config.cone, &mut rec)?;
        }
        ExperimentKind::SparseIsometry => {
            let m = shared.d_prime.expect("sparsity level");
            let psi = sample_psi(&config.ensemble, job.n, shared.a.rows(), job.seed)?;
            let mode = config
                .isometry_mode
                .unwrap_or_else(|| auto_support_mode(p, m, mix_seed(job.seed, 1, 0)));
            let iso = restricted_isometry_report(&psi, &shared.a, m, mode, false)?;
            rec.delta_sparse = Some(iso.delta);
            rec.bound = Some(config.tau());
            rec.success = iso.delta <= config.tau();
        }
        ExperimentKind::RecoveryRate => {
            let s = job.s0;
            let psi = sample_psi(&config.ensemble, job.n, shared.a.rows(), job.seed)?;
            let x = psi.matmul(&shared.a)?;
            let mut stream = Stream::new(mix_seed(job.seed, 2, 0), 0);
            let beta = planted(p, s, config.signal, &mut stream);
            let fit = x.matvec(&beta);
            let y: Vec<f64> = fit.iter().map(|f| f + config.sigma * stream.normal()).collect();
            let lambda_n = default_lambda(config.lambda_multiple, config.sigma, p, job.n);
            let sol = lasso_cd(&LassoProblem::new(x, y, lambda_n, config.sigma)?, LASSO_TOL, LASSO_MAX_SWEEPS);
            let (in_cone, _) = lasso_cone_check(&beta, &sol.beta_hat, config.cone.k0)?;
            let lambda = default_lambda(1.0, 1.0, p, job.n);
            let s_oracle = oracle_s0(&beta, lambda, config.sigma.max(f64::MIN_POSITIVE))?.max(1);
            let ratio = oracle_rate_ratio(&beta, &sol.beta_hat, s_oracle, lambda, config.sigma)?;
            let diff: Vec<f64> = sol.beta_hat.iter().zip(&beta).map(|(a, b)| a - b).collect();
            rec.recovery_ratio = finite(ratio);
            rec.statistic = Some(norm2(&diff));
            rec.success = in_cone;
        }
        ExperimentKind::WalshNecessity => {
            let RowDistribution::WalshRows { block_size, blocks, .. } = config.ensemble else {
                unreachable!("validated")
            };
            let rep = walsh_rep(block_size, blocks, job.n, job.seed, config.recovery)?;
            rec.statistic = Some(rep.distinct as f64);
            rec.bound = Some(p as f64);
            rec.recovery_ratio = rep.recovered.map(|r| if r { 0.0 } else { 1.0 });
            rec.success = rep.distinct == p;
        }
        ExperimentKind::PhaseDiagram => match config.phase_solver {
            PhaseSolver::BasisPursuit => {
                let psi = sample_psi(&config.ensemble, job.n, shared.a.rows(), job.seed)?;
                let x = psi.matmul(&shared.a)?;
                let mut stream = Stream::new(mix_seed(job.seed, 2, 0), 0);
                let beta = planted(p, job.s0, config.signal, &mut stream);
                let b = x.matvec(&beta);
                let err = match basis_pursuit(&x, &b, BP_DEFAULT_TOL, BP_DEFAULT_MAX_ITERS) {
                    Ok(r) => norm2(&r.beta_hat.iter().zip(&beta).map(|(a, c)| a - c).collect::<Vec<_>>()),
                    Err(Error::Infeasible(_)) => f64::INFINITY,
                    Err(e) => return Err(e),
                };
                rec.statistic = finite(err);
                rec.bound = Some(EXACT_RECOVERY_TOL);
                rec.success = err <= EXACT_RECOVERY_TOL;
            }
            PhaseSolver::ReTransfer => {
                let psi = sample_psi(&config.ensemble, job.n, shared.a.rows(), job.seed)?;
                let x = psi.matmul(&shared.a)?;
                let spec = ConeSpec::new(job.s0, config.cone.k0)?;
                reduction_trial(config, shared, &x, &spec, &mut rec)?;
            }
        },
        ExperimentKind::Bernstein => unreachable!("bernstein runs per cell"),
    }
    Ok(rec)
}

fn median(mut v: Vec<f64>) -> Option<f64> {
    if v.is_empty() {
        return None;
    }
    v.sort_by(f64::total_cmp);
    let k = v.len();
    Some(if k % 2 == 1 { v[k / 2] } else { 0.5 * (v[k / 2 - 1] + v[k / 2]) })
}

fn floor_for(config: &ExperimentConfig, shared: &Shared, n: usize) -> Option<f64> {
    match config.kind {
        ExperimentKind::ReTransfer => Some(floor_subgaussian(config.delta, n, shared.alpha?)),
        ExperimentKind::SparseIsometry => Some(floor_sparse(config.tau(), n, shared.alpha?)),
        ExperimentKind::BoundedRe => Some(floor_bounded(
            config.delta,
            shared.rho?,
            n,
            config.ensemble.entry_bound()?,
            shared.d_prime?,
        )),
        ExperimentKind::WalshNecessity => Some(floor_coupon(shared.p, n)),
        _ => None,
    }
}

fn summarize_cells(config: &ExperimentConfig, shared: &Shared, records: &[TrialRecord]) -> Vec<CellSummary> {
    let mut cells: Vec<CellSummary> = Vec::new();
    let mut start = 0;
    while start < records.len() {
        let key = |r: &TrialRecord| (r.n, r.s0, r.theta.map(f64::to_bits));
        let k = key(&records[start]);
        let end = start + records[start..].iter().take_while(|r| key(r) == k).count();
        let group = &records[start..end];
        let trials = group.len();
        let successes = group.iter().filter(|r| r.success).count();
        let frequency = successes as f64 / trials as f64;
        let std_err = (frequency * (1.0 - frequency) / trials as f64).sqrt();
        let floor = floor_for(config, shared, k.0);
        let ratios: Vec<f64> = match config.kind {
            ExperimentKind::RecoveryRate => group.iter().filter_map(|r| r.recovery_ratio).collect(),
            _ => Vec::new(),
        };
        cells.push(CellSummary {
            n: k.0,
            s0: k.1,
            theta: group[0].theta,
            trials,
            successes,
            frequency,
            std_err,
            floor,
            floor_respected: floor.filter(|&f| f > 0.5).map(|f| frequency >= f - 3.0 * std_err),
            median_recovery_ratio: median(ratios),
        });
        start = end;
    }
    cells
}

fn empirical_fit(config: &ExperimentConfig, shared: &Shared, cells: &[CellSummary]) -> EmpiricalFit {
    let n_target = match config.kind {
        ExperimentKind::Bernstein | ExperimentKind::PhaseDiagram => None,
        _ => cells.iter().find(|c| c.frequency >= EMPIRICAL_TARGET).map(|c| c.n),
    };
    let p = shared.p as f64;
    let (implied, literal) = match (n_target, config.kind) {
        (Some(n), ExperimentKind::ReTransfer) => {
            let m = shared.d_prime.unwrap_or(1) as f64;
            let alpha = shared.alpha.unwrap_or(1.0);
            (Some(2000.0 * n as f64 / subgaussian_raw(m, alpha, config.delta, p)), Some(2000.0))
        }
        (Some(n), ExperimentKind::SparseIsometry) => {
            let m = shared.d_prime.unwrap_or(1) as f64;
            let alpha = shared.alpha.unwrap_or(1.0);
            (Some(80.0 * n as f64 / sparse_raw(m, alpha, config.tau(), p)), Some(80.0))
        }
        (Some(n), ExperimentKind::BoundedRe) => {
            let raw = bounded_raw(
                1.0,
                config.ensemble.entry_bound().unwrap_or(1.0),
                shared.d_prime.unwrap_or(1) as f64,
                p,
                shared.rho.unwrap_or(1.0),
                config.delta,
            );
            (Some(n as f64 / raw).filter(|c| c.is_finite() && *c > 0.0), None)
        }
        (Some(n), ExperimentKind::RecoveryRate) => {
            let raw = recovery_raw(1.0, 1.0, config.cone.s0 as f64, p);
            (Some(n as f64 / raw).filter(|c| c.is_finite() && *c > 0.0), None)
        }
        (Some(n), ExperimentKind::WalshNecessity) => (Some(n as f64 / (p * p.ln())).filter(|c| c.is_finite()), None),
        _ => (None, None),
    };
    EmpiricalFit {
        target: EMPIRICAL_TARGET,
        n_target,
        implied_constant: implied,
        literal_constant: literal,
    }
}

fn sample_size_inputs(config: &ExperimentConfig, shared: &Shared) -> Option<SampleSizeInputs> {
    let m = match config.kind {
        ExperimentKind::RecoveryRate | ExperimentKind::PhaseDiagram => config.cone.s0,
        _ => shared.d_prime?,
    };
    Some(SampleSizeInputs {
        m,
        alpha: shared.alpha.unwrap_or(1.0),
        delta: if config.kind == ExperimentKind::SparseIsometry { config.tau() } else { config.delta },
        p: shared.p,
        big_m: config.ensemble.entry_bound().unwrap_or(1.0),
        rho: shared.rho.unwrap_or(1.0),
        d: shared.d_prime.unwrap_or(m),
        c: config.constants.c,
        c_log: config.constants.c_log,
    })
}

/// Runs every trial of `config`.
///
/// Trial `t` at grid index `i` uses seed `mix_seed(base_seed, t, i)`, where the
/// grid index enumerates `n_values` (row-major over `s0_values` for the phase
/// diagram). Records are sorted by `(n, s0, θ, trial)` so output does not
/// depend on scheduling. Trials that hit a numerical error are listed in
/// `summary.failures` and count as unsuccessful.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentOutput> {
    config.validate()?;
    let shared = prepare(config)?;
    let p = shared.p;
    let mut failures = Vec::new();
    let mut records = Vec::new();

    if config.kind == ExperimentKind::Bernstein {
        for (i, &n) in config.n_values.iter().enumerate() {
            let seed = mix_seed(config.base_seed, 0, i as u64);
            let start = config.record_timing.then(std::time::Instant::now);
            let reports = bernstein_tail_check_many(&config.ensemble, n, &config.thetas, config.trials, seed)?;
            let elapsed = start.map_or(0.0, |s| s.elapsed().as_secs_f64());
            for (t, r) in reports.into_iter().enumerate() {
                let mut rec = TrialRecord::blank(t, seed, n, p, config.cone.s0, config.cone.k0);
                rec.theta = Some(r.theta);
                rec.statistic = Some(r.empirical_tail);
                rec.bound = Some(r.bound);
                rec.wall_time = elapsed;
                rec.success = r.holds;
                records.push(rec);
            }
        }
    } else {
        let s0_grid: Vec<usize> = if config.kind == ExperimentKind::PhaseDiagram {
            config.s0_values.clone()
        } else {
            vec![config.cone.s0]
        };
        let mut jobs = Vec::new();
        for (ni, &n) in config.n_values.iter().enumerate() {
            for (si, &s0) in s0_grid.iter().enumerate() {
                let cell = (ni * s0_grid.len() + si) as u64;
                for trial in 0..config.trials {
                    jobs.push(Job {
                        n_index: ni,
                        n,
                        s0,
                        trial,
                        seed: mix_seed(config.base_seed, trial as u64, cell),
                    });
                }
            }
        }
        let outcomes = crate::par::map_indices(jobs.len(), |j| {
            let start = config.record_timing.then(std::time::Instant::now);
            let out = run_job(config, &shared, &jobs[j]);
            (out, start.map_or(0.0, |s| s.elapsed().as_secs_f64()))
        });
        for (job, (out, elapsed)) in jobs.iter().zip(outcomes) {
            match out {
                Ok(mut rec) => {
                    rec.wall_time = elapsed;
                    records.push(rec);
                }
                Err(e) => {
                    let _ = job.n_index;
                    failures.push(TrialFailure {
                        n: job.n,
                        s0: job.s0,
                        trial: job.trial,
                        seed: job.seed,
                        error: e.to_string(),
                    });
                    let mut rec = TrialRecord::blank(job.trial, job.seed, job.n, p, job.s0, config.cone.k0);
                    rec.wall_time = elapsed;
                    records.push(rec);
                }
            }
        }
    }
    records.sort_by_key(TrialRecord::key);

    let cells = summarize_cells(config, &shared, &records);
    let empirical = empirical_fit(config, &shared, &cells);
    let floors_respected = cells.iter().all(|c| c.floor_respected != Some(false));
    let inputs = sample_size_inputs(config, &shared);
    let sample_sizes = inputs.as_ref().and_then(|i| sample_size_formulas(i).ok());
    let verdict = match config.mode {
        BoundMode::Literal => floors_respected,
        BoundMode::Empirical => empirical.n_target.is_some() || matches!(config.kind, ExperimentKind::Bernstein | ExperimentKind::PhaseDiagram),
    };
    let summary = Summary {
        schema: SCHEMA_HEADER.trim_start_matches("# ").to_string(),
        kind: config.kind,
        mode: config.mode,
        ensemble: config.ensemble.name().to_string(),
        base_seed: config.base_seed,
        p,
        d_prime: shared.d_prime,
        alpha: shared.alpha,
        k_a: shared.k_a.as_ref().and_then(|k| finite(k.k)),
        cells,
        sample_size_inputs: inputs,
        sample_sizes,
        empirical,
        floors_respected,
        verdict,
        failures,
    };
    Ok(ExperimentOutput { records, summary })
}

/// Success frequency per `(n, s₀)` cell: `frequency[i][j]` is for
/// `n_values[i]` and `s0_values[j]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseDiagram {
    pub n_values: Vec<usize>,
    pub s0_values: Vec<usize>,
    pub frequency: Vec<Vec<f64>>,
}

pub fn phase_diagram(config: &ExperimentConfig) -> Result<(PhaseDiagram, ExperimentOutput)> {
    if config.kind != ExperimentKind::PhaseDiagram {
        return Err(Error::ConfigInvalid("phase_diagram needs kind = \"phase_diagram\"".into()));
    }
    let out = run_experiment(config)?;
    let frequency = config
        .n_values
        .iter()
        .map(|&n| {
            config
                .s0_values
                .iter()
                .map(|&s| {
                    out.summary
                        .cells
                        .iter()
                        .find(|c| c.n == n && c.s0 == s)
                        .map_or(0.0, |c| c.frequency)
                })
                .collect()
        })
        .collect();
    Ok((
        PhaseDiagram {
            n_values: config.n_values.clone(),
            s0_values: config.s0_values.clone(),
            frequency,
        },
        out,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensembles::CovarianceSpec;
    use crate::spectra::ReMode;

    fn small_re() -> ExperimentConfig {
        let mut c = ExperimentConfig::new(ExperimentKind::ReTransfer, vec![60], 3);
        c.covariance = Some(CovarianceSpec::identity(6));
        c.cone = ConeSpec::new(1, 1.0).unwrap();
        c.d_prime = Some(3);
        c.cone_samples = 100;
        c.re_mode = ReMode::ExactOracle { grid_per_axis: 8 };
        c.base_seed = 9;
        c
    }

    #[test]
    fn re_transfer_records_are_consistent() {
        let out = run_experiment(&small_re()).unwrap();
        assert_eq!(out.records.len(), 3);
        for r in &out.records {
            let holds = r.k_xa.unwrap() <= r.k_a.unwrap() / (1.0 - 0.25) + 1e-9;
            assert_eq!(r.transfer_holds, Some(holds));
            assert_eq!(r.seed, mix_seed(9, r.trial as u64, 0));
        }
        assert!(out.summary.failures.is_empty());
        assert_eq!(out.summary.k_a, Some(1.0));
    }

    #[test]
    fn rerun_is_byte_identical() {
        let c = small_re();
        let a = run_experiment(&c).unwrap();
        let b = run_experiment(&c).unwrap();
        assert_eq!(a.csv().unwrap(), b.csv().unwrap());
        assert_eq!(a.json().unwrap(), b.json().unwrap());
    }

    #[test]
    fn bernstein_delegates() {
        let mut c = ExperimentConfig::new(ExperimentKind::Bernstein, vec![50], 200);
        c.covariance = Some(CovarianceSpec::identity(1));
        c.ensemble = RowDistribution::Rademacher;
        let out = run_experiment(&c).unwrap();
        assert_eq!(out.records.len(), 2);
        assert!(out.records.iter().all(|r| r.success && r.statistic == Some(0.0)));
    }

    #[test]
    fn phase_underdetermined_cell_fails() {
        let mut c = ExperimentConfig::new(ExperimentKind::PhaseDiagram, vec![2, 20], 4);
        c.covariance = Some(CovarianceSpec::identity(10));
        c.s0_values = vec![1, 4];
        let (pd, _) = phase_diagram(&c).unwrap();
        assert_eq!(pd.frequency[0][1], 0.0);
        assert_eq!(pd.frequency[1][0], 1.0);
    }

    #[test]
    fn walsh_kind_counts_rows() {
        let mut c = ExperimentConfig::new(ExperimentKind::WalshNecessity, vec![4, 400], 20);
        c.ensemble = RowDistribution::walsh(4, 2);
        let out = run_experiment(&c).unwrap();
        assert_eq!(out.summary.cells[0].frequency, 0.0);
        assert_eq!(out.summary.cells[1].frequency, 1.0);
        assert_eq!(out.summary.empirical.n_target, Some(400));
    }

    #[test]
    fn median_of_even_and_odd() {
        assert_eq!(median(vec![3.0, 1.0, 2.0]), Some(2.0));
        assert_eq!(median(vec![4.0, 1.0]), Some(2.5));
        assert_eq!(median(vec![]), None);
    }
}
