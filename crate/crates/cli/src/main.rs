use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use recert::cone::ConeSpec;
use recert::ensembles::RowDistribution;
use recert::harness::{
    phase_diagram, run_experiment, sample_size_formulas, walsh_necessity, ExperimentConfig, ExperimentKind,
    SampleSizeInputs,
};
use recert::spectra::maurey::DEFAULT_MAX_ATTEMPTS;
use recert::spectra::{
    bernstein_tail_check_many, hull_functional_check, maurey_sparsify, re_constant, reduction_verify,
    restricted_isometry_report, rip_constant, sparse_eigs, MaureyMode, ReMode, ReductionOptions, SupportMode,
};
use recert::solvers::{basis_pursuit, lasso_cd, LassoProblem};
use recert::{DenseMatrix, Error, Result};

mod output;

use output::{emit, Format};

#[derive(Parser, Debug)]
#[command(name = "re-cert", version, about = "Restricted-eigenvalue and restricted-isometry certification")]
struct Cli {
    /// Experiment configuration (TOML, or JSON by extension).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Base seed; overrides the config's `base_seed`.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory for reports (stdout when absent).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct ConeArgs {
    #[arg(long)]
    s0: usize,
    #[arg(long, default_value_t = 1.0)]
    k0: f64,
}

impl ConeArgs {
    fn spec(&self) -> Result<ConeSpec> {
        ConeSpec::new(self.s0, self.k0)
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ReModeArg {
    Exact,
    Heuristic,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum MaureyModeArg {
    Strict,
    Relaxed,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum DistArg {
    Gaussian,
    Rademacher,
    DiscreteGaussian,
    Uniform,
}

impl DistArg {
    fn distribution(self) -> RowDistribution {
        match self {
            Self::Gaussian => RowDistribution::Gaussian,
            Self::Rademacher => RowDistribution::Rademacher,
            Self::DiscreteGaussian => RowDistribution::discrete_gaussian(),
            Self::Uniform => RowDistribution::uniform_unit(),
        }
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// RE constant K(s0, k0, A).
    ReConstant {
        #[arg(long)]
        matrix: PathBuf,
        #[command(flatten)]
        cone: ConeArgs,
        #[arg(long, value_enum, default_value_t = ReModeArg::Exact)]
        mode: ReModeArg,
        /// Grid points per half turn of each sphere angle (exact mode).
        #[arg(long, default_value_t = 180)]
        grid: usize,
        #[arg(long, default_value_t = 32)]
        restarts: usize,
        #[arg(long, default_value_t = 200)]
        iters: usize,
    },
    /// m-sparse eigenvalues of AᵀA.
    SparseEig {
        #[arg(long)]
        matrix: PathBuf,
        #[arg(long)]
        m: usize,
        /// Sample this many supports instead of enumerating.
        #[arg(long)]
        sample: Option<usize>,
    },
    /// Restricted isometry constant of X/√n.
    Rip {
        #[arg(long)]
        matrix: PathBuf,
        #[arg(long)]
        s: usize,
    },
    /// Sparse convex combination approximating a point of a hull.
    Maurey {
        /// Points as rows of a matrix.
        #[arg(long)]
        points: PathBuf,
        /// Comma-separated convex weights; uniform when absent.
        #[arg(long, value_delimiter = ',')]
        weights: Option<Vec<f64>>,
        #[arg(long)]
        epsilon: f64,
        #[arg(long, value_enum, default_value_t = MaureyModeArg::Strict)]
        mode: MaureyModeArg,
        #[arg(long, default_value_t = DEFAULT_MAX_ATTEMPTS)]
        attempts: usize,
    },
    /// Isometry of Ψ/√n on images of d'-sparse vectors under A.
    Isometry {
        #[arg(long)]
        psi: PathBuf,
        #[arg(long)]
        a: PathBuf,
        #[arg(long)]
        d_prime: usize,
        #[arg(long)]
        sample: Option<usize>,
        /// Include per-support ratios.
        #[arg(long)]
        per_support: bool,
    },
    /// Cone-ratio bounds and RE transfer for one (Ψ, A) pair.
    ReduceVerify {
        #[arg(long)]
        psi: PathBuf,
        #[arg(long)]
        a: PathBuf,
        #[command(flatten)]
        cone: ConeArgs,
        #[arg(long)]
        delta: f64,
        #[arg(long)]
        d_prime: usize,
        #[arg(long, default_value_t = 200)]
        cone_samples: usize,
        #[arg(long, default_value_t = 180)]
        grid: usize,
    },
    /// Support-function check of the convex-hull inclusion.
    HullCheck {
        #[arg(long)]
        a: PathBuf,
        #[command(flatten)]
        cone: ConeArgs,
        #[arg(long)]
        d: usize,
        #[arg(long)]
        delta: f64,
        #[arg(long, default_value_t = 200)]
        theta_samples: usize,
        #[arg(long, default_value_t = 500)]
        cone_samples: usize,
    },
    /// Empirical Bernstein tail against its bound.
    Bernstein {
        #[arg(long, value_enum, default_value_t = DistArg::Gaussian)]
        dist: DistArg,
        #[arg(long)]
        n: usize,
        #[arg(long, value_delimiter = ',', default_value = "0.3,0.5")]
        theta: Vec<f64>,
        #[arg(long, default_value_t = 10_000)]
        reps: usize,
    },
    /// Lasso by coordinate descent.
    Lasso {
        #[arg(long)]
        x: PathBuf,
        /// Response vector, whitespace separated.
        #[arg(long)]
        y: PathBuf,
        #[arg(long)]
        lambda: f64,
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
        #[arg(long, default_value_t = 10_000)]
        max_iters: usize,
    },
    /// Basis pursuit: min ‖β‖₁ subject to Xβ = b.
    Bp {
        #[arg(long)]
        x: PathBuf,
        #[arg(long)]
        b: PathBuf,
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
        #[arg(long, default_value_t = 20_000)]
        max_iters: usize,
    },
    /// Monte Carlo experiment from --config.
    Experiment,
    /// Phase diagram from a --config with kind = "phase_diagram".
    Phase,
    /// Coupon-collector necessity of the Walsh ensemble.
    Walsh {
        #[arg(long)]
        p: usize,
        #[arg(long)]
        m: usize,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 200)]
        reps: usize,
        /// Also try basis-pursuit recovery of a planted 1-sparse signal.
        #[arg(long)]
        recovery: bool,
    },
    /// Evaluate the sample-size bounds.
    Bounds {
        #[arg(long)]
        m: usize,
        #[arg(long, default_value_t = 1.0)]
        alpha: f64,
        #[arg(long)]
        delta: f64,
        #[arg(long)]
        p: usize,
        #[arg(long = "big-m", default_value_t = 1.0)]
        big_m: f64,
        #[arg(long, default_value_t = 1.0)]
        rho: f64,
        /// Defaults to m.
        #[arg(long)]
        d: Option<usize>,
        #[arg(long, default_value_t = 1.0)]
        c: f64,
        #[arg(long, default_value_t = 1.0)]
        c_log: f64,
    },
}

fn read_vector(path: &Path) -> Result<Vec<f64>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    text.lines()
        .map(|l| l.split('#').next().unwrap_or(""))
        .flat_map(str::split_whitespace)
        .map(|t| t.parse::<f64>().map_err(|e| Error::Parse(format!("{t:?}: {e}"))))
        .collect()
}

fn matrix(path: &Path) -> Result<DenseMatrix> {
    DenseMatrix::read_path(path)
}

fn to_value<T: serde::Serialize>(v: &T) -> Result<Value> {
    serde_json::to_value(v).map_err(|e| Error::Io(e.to_string()))
}

fn load_config(cli: &Cli) -> Result<ExperimentConfig> {
    let path = cli
        .config
        .as_ref()
        .ok_or_else(|| Error::ConfigInvalid("--config is required".into()))?;
    let mut config = ExperimentConfig::from_path(path)?;
    if let Some(seed) = cli.seed {
        config.base_seed = seed;
    }
    Ok(config)
}

/// Runs the command; `Ok(false)` means it completed but some trials failed numerically.
fn run(cli: &Cli) -> Result<bool> {
    let seed = cli.seed.unwrap_or(0);
    let out = cli.out.as_deref();
    let value = match &cli.command {
        Command::ReConstant {
            matrix: m,
            cone,
            mode,
            grid,
            restarts,
            iters,
        } => {
            let mode = match mode {
                ReModeArg::Exact => ReMode::ExactOracle { grid_per_axis: *grid },
                ReModeArg::Heuristic => ReMode::Heuristic {
                    restarts: *restarts,
                    iters: *iters,
                    seed,
                },
            };
            to_value(&re_constant(&matrix(m)?, &cone.spec()?, mode)?)?
        }
        Command::SparseEig { matrix: m, m: size, sample } => {
            let mode = match sample {
                Some(count) => SupportMode::Sample { count: *count, seed },
                None => SupportMode::Enumerate,
            };
            to_value(&sparse_eigs(&matrix(m)?, *size, mode)?)?
        }
        Command::Rip { matrix: m, s } => json!({ "s": s, "theta": rip_constant(&matrix(m)?, *s)? }),
        Command::Maurey {
            points,
            weights,
            epsilon,
            mode,
            attempts,
        } => {
            let pts = matrix(points)?;
            let rows: Vec<Vec<f64>> = (0..pts.rows()).map(|i| pts.row(i).to_vec()).collect();
            let w = weights.clone().unwrap_or_else(|| vec![1.0 / rows.len() as f64; rows.len()]);
            let mode = match mode {
                MaureyModeArg::Strict => MaureyMode::Strict,
                MaureyModeArg::Relaxed => MaureyMode::Relaxed,
            };
            to_value(&maurey_sparsify(&rows, &w, *epsilon, mode, seed, *attempts)?)?
        }
        Command::Isometry {
            psi,
            a,
            d_prime,
            sample,
            per_support,
        } => {
            let a = matrix(a)?;
            let mode = match sample {
                Some(count) => SupportMode::Sample { count: *count, seed },
                None => SupportMode::Enumerate,
            };
            to_value(&restricted_isometry_report(&matrix(psi)?, &a, *d_prime, mode, *per_support)?)?
        }
        Command::ReduceVerify {
            psi,
            a,
            cone,
            delta,
            d_prime,
            cone_samples,
            grid,
        } => {
            let options = ReductionOptions {
                isometry_mode: None,
                re_mode: ReMode::ExactOracle { grid_per_axis: *grid },
            };
            let r = reduction_verify(&matrix(psi)?, &matrix(a)?, &cone.spec()?, *delta, *d_prime, *cone_samples, seed, &options)?;
            to_value(&r)?
        }
        Command::HullCheck {
            a,
            cone,
            d,
            delta,
            theta_samples,
            cone_samples,
        } => to_value(&hull_functional_check(&matrix(a)?, &cone.spec()?, *d, *delta, *theta_samples, *cone_samples, seed)?)?,
        Command::Bernstein { dist, n, theta, reps } => {
            to_value(&bernstein_tail_check_many(&dist.distribution(), *n, theta, *reps, seed)?)?
        }
        Command::Lasso {
            x,
            y,
            lambda,
            tol,
            max_iters,
        } => {
            let problem = LassoProblem::new(matrix(x)?, read_vector(y)?, *lambda, 0.0)?;
            to_value(&lasso_cd(&problem, *tol, *max_iters))?
        }
        Command::Bp { x, b, tol, max_iters } => to_value(&basis_pursuit(&matrix(x)?, &read_vector(b)?, *tol, *max_iters)?)?,
        Command::Experiment => {
            let config = load_config(cli)?;
            let result = run_experiment(&config)?;
            let ok = result.summary.failures.is_empty();
            match out {
                Some(dir) => {
                    let (csv, json) = result.write(&config, Some(dir))?;
                    eprintln!("wrote {} and {}", csv.display(), json.display());
                }
                None => match cli.format {
                    Format::Csv => print!("{}", result.csv()?),
                    Format::Json => println!("{}", result.json()?),
                },
            }
            return Ok(ok);
        }
        Command::Phase => {
            let config = load_config(cli)?;
            if config.kind != ExperimentKind::PhaseDiagram {
                return Err(Error::ConfigInvalid("phase needs kind = \"phase_diagram\"".into()));
            }
            let (diagram, result) = phase_diagram(&config)?;
            if let Some(dir) = out {
                result.write(&config, Some(dir))?;
            }
            let ok = result.summary.failures.is_empty();
            let rows: Vec<Value> = result
                .summary
                .cells
                .iter()
                .map(|c| json!({ "n": c.n, "s0": c.s0, "trials": c.trials, "frequency": c.frequency }))
                .collect();
            match cli.format {
                Format::Csv => print!("{}", output::rows_to_csv(&rows)),
                Format::Json => println!("{}", serde_json::to_string_pretty(&diagram).map_err(|e| Error::Io(e.to_string()))?),
            }
            return Ok(ok);
        }
        Command::Walsh {
            p,
            m,
            n,
            reps,
            recovery,
        } => to_value(&walsh_necessity(*p, *m, *n, *reps, seed, *recovery)?)?,
        Command::Bounds {
            m,
            alpha,
            delta,
            p,
            big_m,
            rho,
            d,
            c,
            c_log,
        } => {
            let inputs = SampleSizeInputs {
                m: *m,
                alpha: *alpha,
                delta: *delta,
                p: *p,
                big_m: *big_m,
                rho: *rho,
                d: d.unwrap_or(*m),
                c: *c,
                c_log: *c_log,
            };
            to_value(&sample_size_formulas(&inputs)?)?
        }
    };
    emit(&value, cli.format, out, command_name(&cli.command))?;
    Ok(true)
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::ReConstant { .. } => "re-constant",
        Command::SparseEig { .. } => "sparse-eig",
        Command::Rip { .. } => "rip",
        Command::Maurey { .. } => "maurey",
        Command::Isometry { .. } => "isometry",
        Command::ReduceVerify { .. } => "reduce-verify",
        Command::HullCheck { .. } => "hull-check",
        Command::Bernstein { .. } => "bernstein",
        Command::Lasso { .. } => "lasso",
        Command::Bp { .. } => "bp",
        Command::Experiment => "experiment",
        Command::Phase => "phase",
        Command::Walsh { .. } => "walsh",
        Command::Bounds { .. } => "bounds",
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match recert::par::with_threads(cli.threads, || run(&cli)) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("error: some trials failed numerically; see the summary's failures");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
