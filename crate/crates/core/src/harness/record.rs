use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const SCHEMA_HEADER: &str = "# re-cert schema v1";

/// One Monte Carlo trial. Columns that do not apply to an experiment kind are
/// left empty; an infinite `K` (RE failure) is also written empty.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub trial: usize,
    pub seed: u64,
    pub n: usize,
    pub p: usize,
    pub s0: usize,
    pub k0: f64,
    pub delta_sparse: Option<f64>,
    pub cone_ratio_min: Option<f64>,
    pub cone_ratio_max: Option<f64>,
    pub k_a: Option<f64>,
    pub k_xa: Option<f64>,
    pub transfer_holds: Option<bool>,
    pub recovery_ratio: Option<f64>,
    /// Seconds; zero unless timing was requested.
    pub wall_time: f64,
    pub theta: Option<f64>,
    /// Kind-specific measurement: the Bernstein tail, `‖β̂ − β‖₂`, or the
    /// number of distinct Walsh rows seen.
    pub statistic: Option<f64>,
    /// Kind-specific threshold the statistic is judged against.
    pub bound: Option<f64>,
    pub success: bool,
}

impl TrialRecord {
    pub(crate) fn blank(trial: usize, seed: u64, n: usize, p: usize, s0: usize, k0: f64) -> Self {
        Self {
            trial,
            seed,
            n,
            p,
            s0,
            k0,
            delta_sparse: None,
            cone_ratio_min: None,
            cone_ratio_max: None,
            k_a: None,
            k_xa: None,
            transfer_holds: None,
            recovery_ratio: None,
            wall_time: 0.0,
            theta: None,
            statistic: None,
            bound: None,
            success: false,
        }
    }

    /// Sort key making output order independent of scheduling.
    pub(crate) fn key(&self) -> (usize, usize, u64, usize) {
        (self.n, self.s0, self.theta.map_or(0, f64::to_bits), self.trial)
    }
}

pub(crate) fn finite(v: f64) -> Option<f64> {
    v.is_finite().then_some(v)
}

/// Records as CSV, preceded by the schema comment line.
pub fn records_to_csv(records: &[TrialRecord]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in records {
        w.serialize(r).map_err(|e| Error::Io(e.to_string()))?;
    }
    if records.is_empty() {
        w.write_record(HEADER).map_err(|e| Error::Io(e.to_string()))?;
    }
    let body = w.into_inner().map_err(|e| Error::Io(e.to_string()))?;
    let body = String::from_utf8(body).map_err(|e| Error::Io(e.to_string()))?;
    Ok(format!("{SCHEMA_HEADER}\n{body}"))
}

const HEADER: [&str; 18] = [
    "trial",
    "seed",
    "n",
    "p",
    "s0",
    "k0",
    "delta_sparse",
    "cone_ratio_min",
    "cone_ratio_max",
    "k_a",
    "k_xa",
    "transfer_holds",
    "recovery_ratio",
    "wall_time",
    "theta",
    "statistic",
    "bound",
    "success",
];

/// Parses CSV written by [`records_to_csv`].
pub fn records_from_csv(text: &str) -> Result<Vec<TrialRecord>> {
    let body = text
        .strip_prefix(SCHEMA_HEADER)
        .ok_or_else(|| Error::Parse("missing schema header".into()))?;
    let mut r = csv::Reader::from_reader(body.trim_start_matches(['\r', '\n']).as_bytes());
    r.deserialize()
        .map(|row| row.map_err(|e| Error::Parse(e.to_string())))
        .collect()
}
