//! Monte Carlo experiments, sample-size bounds and report output.

mod bounds;
mod config;
mod record;
mod runner;
mod walsh;

pub use bounds::{
    floor_bounded, floor_coupon, floor_sparse, floor_subgaussian, sample_size_formulas, SampleSizeInputs,
    SampleSizes,
};
pub use config::{BoundMode, ExperimentConfig, ExperimentKind, OutputPaths, PhaseSolver, SampleConstants};
pub use record::{records_from_csv, records_to_csv, TrialRecord, SCHEMA_HEADER};
pub use runner::{
    phase_diagram, run_experiment, CellSummary, EmpiricalFit, ExperimentOutput, PhaseDiagram, Summary,
    TrialFailure, EMPIRICAL_TARGET,
};
pub use walsh::{walsh_necessity, WalshNecessity, EXACT_RECOVERY_TOL};
