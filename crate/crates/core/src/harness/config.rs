use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::cone::ConeSpec;
use crate::ensembles::{CovarianceSpec, RowDistribution};
use crate::error::{Error, Result};
use crate::spectra::{ReMode, SupportMode};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    ReTransfer,
    SparseIsometry,
    BoundedRe,
    Bernstein,
    RecoveryRate,
    WalshNecessity,
    PhaseDiagram,
}

impl ExperimentKind {
    pub fn name(self) -> &'static str {
        match self {
            Self::ReTransfer => "re_transfer",
            Self::SparseIsometry => "sparse_isometry",
            Self::BoundedRe => "bounded_re",
            Self::Bernstein => "bernstein",
            Self::RecoveryRate => "recovery_rate",
            Self::WalshNecessity => "walsh_necessity",
            Self::PhaseDiagram => "phase_diagram",
        }
    }
}

/// How the summary judges a run.
///
/// `Literal` checks empirical frequencies against the stated probability
/// floor; `Empirical` reports the smallest `n` reaching 95% success and the
/// constant it implies in the sample-size formula. Both sets of numbers are
/// always emitted.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundMode {
    Literal,
    #[default]
    Empirical,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PhaseSolver {
    #[default]
    BasisPursuit,
    ReTransfer,
}

/// The unnamed absolute constants of the bounded-entry and recovery bounds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SampleConstants {
    #[serde(default = "one")]
    pub c: f64,
    #[serde(default = "one")]
    pub c_log: f64,
}

impl Default for SampleConstants {
    fn default() -> Self {
        Self { c: 1.0, c_log: 1.0 }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct OutputPaths {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub csv: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub json: Option<PathBuf>,
}

fn one() -> f64 {
    1.0
}
fn default_cone() -> ConeSpec {
    ConeSpec { s0: 1, k0: 1.0 }
}
fn default_delta() -> f64 {
    0.25
}
fn default_thetas() -> Vec<f64> {
    vec![0.3, 0.5]
}
fn default_cone_samples() -> usize {
    200
}
fn default_re_mode() -> ReMode {
    ReMode::ExactOracle { grid_per_axis: 180 }
}
fn default_lambda_multiple() -> f64 {
    2.0
}
fn default_sigma() -> f64 {
    0.5
}

/// One Monte Carlo campaign. Reads from TOML or JSON with these keys.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    #[serde(default = "RowDistribution::default_gaussian")]
    pub ensemble: RowDistribution,
    /// Σ of the design rows; defaults to the identity. Not used by the Walsh
    /// kinds, whose dimension comes from the ensemble.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub covariance: Option<CovarianceSpec>,
    #[serde(default = "default_cone")]
    pub cone: ConeSpec,
    #[serde(default = "default_delta")]
    pub delta: f64,
    /// Isometry tolerance for `sparse_isometry`; falls back to `delta`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tau: Option<f64>,
    pub n_values: Vec<usize>,
    /// Trials per `n` (repetitions per cell for `bernstein` and `walsh_necessity`).
    pub trials: usize,
    #[serde(default)]
    pub base_seed: u64,
    /// Sparsity level of the isometry check; derived from `d(3k₀, A)` when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d_prime: Option<usize>,
    #[serde(default)]
    pub mode: BoundMode,
    #[serde(default = "default_thetas")]
    pub thetas: Vec<f64>,
    #[serde(default = "default_cone_samples")]
    pub cone_samples: usize,
    #[serde(default = "default_re_mode")]
    pub re_mode: ReMode,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub isometry_mode: Option<SupportMode>,
    /// `λ_n = lambda_multiple · σ · √(2 ln p / n)`.
    #[serde(default = "default_lambda_multiple")]
    pub lambda_multiple: f64,
    #[serde(default = "default_sigma")]
    pub sigma: f64,
    /// Magnitude of planted nonzero coefficients.
    #[serde(default = "one")]
    pub signal: f64,
    #[serde(default)]
    pub s0_values: Vec<usize>,
    #[serde(default)]
    pub phase_solver: PhaseSolver,
    /// Also run basis pursuit on a planted 1-sparse signal in `walsh_necessity`.
    #[serde(default)]
    pub recovery: bool,
    #[serde(default)]
    pub constants: SampleConstants,
    #[serde(default)]
    pub output: OutputPaths,
    /// Measure per-trial wall time. Off by default so output is reproducible.
    #[serde(default)]
    pub record_timing: bool,
}

impl RowDistribution {
    fn default_gaussian() -> Self {
        Self::Gaussian
    }
}

impl ExperimentConfig {
    /// A config with defaults for everything but the kind, grid and trial count.
    pub fn new(kind: ExperimentKind, n_values: Vec<usize>, trials: usize) -> Self {
        Self {
            kind,
            ensemble: RowDistribution::Gaussian,
            covariance: None,
            cone: default_cone(),
            delta: default_delta(),
            tau: None,
            n_values,
            trials,
            base_seed: 0,
            d_prime: None,
            mode: BoundMode::default(),
            thetas: default_thetas(),
            cone_samples: default_cone_samples(),
            re_mode: default_re_mode(),
            isometry_mode: None,
            lambda_multiple: default_lambda_multiple(),
            sigma: default_sigma(),
            signal: 1.0,
            s0_values: Vec::new(),
            phase_solver: PhaseSolver::default(),
            recovery: false,
            constants: SampleConstants::default(),
            output: OutputPaths::default(),
            record_timing: false,
        }
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::ConfigInvalid(e.to_string()))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::ConfigInvalid(e.to_string()))
    }

    /// JSON for a `.json` extension, TOML otherwise.
    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::ConfigInvalid(format!("{}: {e}", path.display())))?;
        if path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json")) {
            Self::from_json(&text)
        } else {
            Self::from_toml(&text)
        }
    }

    pub fn tau(&self) -> f64 {
        self.tau.unwrap_or(self.delta)
    }

    /// Ambient dimension of the design.
    pub fn p(&self) -> Result<usize> {
        match (&self.ensemble, &self.covariance) {
            (RowDistribution::WalshRows { block_size, blocks, .. }, _) => Ok(block_size * blocks),
            (_, Some(c)) => Ok(c.p),
            _ => Err(Error::ConfigInvalid("covariance (with p) is required for this ensemble".into())),
        }
    }

    pub fn covariance_spec(&self) -> Result<CovarianceSpec> {
        Ok(match &self.covariance {
            Some(c) => c.clone(),
            None => CovarianceSpec::identity(self.p()?),
        })
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::ConfigInvalid(m));
        if self.trials == 0 {
            return bad("trials must be positive".into());
        }
        if self.n_values.is_empty() || self.n_values[0] == 0 {
            return bad("n_values must be non-empty and positive".into());
        }
        if self.n_values.windows(2).any(|w| w[0] >= w[1]) {
            return bad("n_values must be strictly increasing".into());
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return bad(format!("delta {} outside (0, 1)", self.delta));
        }
        if !(self.tau() > 0.0 && self.tau() < 1.0) {
            return bad(format!("tau {} outside (0, 1)", self.tau()));
        }
        if !(self.sigma >= 0.0 && self.lambda_multiple > 0.0 && self.signal > 0.0) {
            return bad("sigma must be non-negative; lambda_multiple and signal positive".into());
        }
        if !(self.constants.c > 0.0 && self.constants.c_log > 0.0) {
            return bad("sample-size constants must be positive".into());
        }
        ConeSpec::new(self.cone.s0, self.cone.k0)?;
        let p = self.p()?;
        if let Some(c) = &self.covariance {
            if c.p != p {
                return bad(format!("covariance has p = {} but the ensemble has p = {p}", c.p));
            }
        }
        if let Some(d) = self.d_prime {
            if d == 0 || d > p {
                return bad(format!("d_prime {d} outside 1..={p}"));
            }
        }
        let walsh = matches!(self.ensemble, RowDistribution::WalshRows { .. });
        match self.kind {
            ExperimentKind::ReTransfer | ExperimentKind::SparseIsometry | ExperimentKind::RecoveryRate => {
                if !self.ensemble.is_psi2() {
                    return bad(format!("{} needs an isotropic psi2 ensemble", self.kind.name()));
                }
            }
            ExperimentKind::Bernstein => {
                if !self.ensemble.is_psi2() {
                    return bad("bernstein needs an isotropic psi2 ensemble".into());
                }
                if self.thetas.is_empty() || self.thetas.iter().any(|t| !(*t > 0.0 && *t < 1.0)) {
                    return bad("thetas must be non-empty and inside (0, 1)".into());
                }
            }
            ExperimentKind::BoundedRe => {
                if !matches!(self.ensemble, RowDistribution::WalshRows { .. } | RowDistribution::UniformBounded { .. }) {
                    return bad("bounded_re needs walsh_rows or uniform_bounded rows".into());
                }
            }
            ExperimentKind::WalshNecessity => {
                if !walsh {
                    return bad("walsh_necessity needs a walsh_rows ensemble".into());
                }
            }
            ExperimentKind::PhaseDiagram => {
                if self.s0_values.is_empty() || self.s0_values.contains(&0) {
                    return bad("phase_diagram needs non-empty positive s0_values".into());
                }
                if !self.ensemble.is_psi2() {
                    return bad("phase_diagram needs an isotropic psi2 ensemble".into());
                }
            }
        }
        if matches!(
            self.kind,
            ExperimentKind::ReTransfer | ExperimentKind::BoundedRe
        ) || (self.kind == ExperimentKind::PhaseDiagram && self.phase_solver == PhaseSolver::ReTransfer)
        {
            if self.cone_samples < 100 {
                return bad("cone_samples must be at least 100".into());
            }
            let max_s0 = self.s0_values.iter().copied().max().unwrap_or(self.cone.s0).max(self.cone.s0);
            if max_s0 >= p {
                return bad(format!("s0 must be smaller than p = {p}"));
            }
        }
        if self.kind == ExperimentKind::RecoveryRate && self.cone.s0 > p {
            return bad(format!("sparsity {} exceeds p = {p}", self.cone.s0));
        }
        if self.kind == ExperimentKind::PhaseDiagram && self.s0_values.iter().any(|&s| s > p) {
            return bad(format!("s0_values exceed p = {p}"));
        }
        Ok(())
    }
}
