//! wasm-bindgen bindings for the static page in `www/`.
//!
//! Every export returns a JSON string; the plain `*_json` functions carry the
//! logic so they can be tested off the browser.

use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

use recert::cone::{in_cone, ConeSpec};
use recert::ensembles::RowDistribution;
use recert::harness::walsh_necessity;
use recert::numerics::norm2;
use recert::spectra::{bernstein_tail_check_many, re_constant, ReMode};
use recert::DenseMatrix;

pub const MAX_REPS: usize = 200_000;

fn err(e: impl std::fmt::Display) -> String {
    e.to_string()
}

/// Cone ratios `‖Av‖/‖v_J‖` around the unit circle for an `n × 2` matrix `A`
/// given row-major, plus the exact RE constant with `s0 = 1`.
pub fn cone_curve_json(a: &[f64], k0: f64, points: usize) -> Result<Value, String> {
    if a.is_empty() || !a.len().is_multiple_of(2) {
        return Err("matrix entries must come in pairs (two columns)".into());
    }
    if !(2..=4096).contains(&points) {
        return Err("points must lie in 2..=4096".into());
    }
    let m = DenseMatrix::new(a.len() / 2, 2, a.to_vec()).map_err(err)?;
    let spec = ConeSpec::new(1, k0).map_err(err)?;
    let mut angles = Vec::with_capacity(points);
    let mut ratios = Vec::with_capacity(points);
    for i in 0..points {
        let t = std::f64::consts::PI * i as f64 / points as f64;
        let v = [t.cos(), t.sin()];
        let (member, j) = in_cone(&v, &spec).map_err(err)?;
        angles.push(t);
        ratios.push(member.then(|| norm2(&m.matvec(&v)) / v[j[0]].abs()));
    }
    let re = re_constant(&m, &spec, ReMode::ExactOracle { grid_per_axis: 720 }).map_err(err)?;
    Ok(json!({ "angles": angles, "ratios": ratios, "re": re }))
}

pub fn bernstein_json(dist: &str, n: usize, thetas: &[f64], reps: usize, seed: u64) -> Result<Value, String> {
    let dist = match dist {
        "gaussian" => RowDistribution::Gaussian,
        "rademacher" => RowDistribution::Rademacher,
        "discrete_gaussian" => RowDistribution::discrete_gaussian(),
        other => return Err(format!("unknown distribution {other:?}")),
    };
    if reps > MAX_REPS {
        return Err(format!("at most {MAX_REPS} repetitions in the browser"));
    }
    serde_json::to_value(bernstein_tail_check_many(&dist, n, thetas, reps, seed).map_err(err)?).map_err(err)
}

/// Fraction of `reps` draws of `n` rows from the block Walsh ensemble that hit every row.
pub fn walsh_json(p: usize, m: usize, ns: &[usize], reps: usize, seed: u64) -> Result<Value, String> {
    if reps > MAX_REPS / 10 {
        return Err(format!("at most {} repetitions in the browser", MAX_REPS / 10));
    }
    let rows = ns
        .iter()
        .map(|&n| serde_json::to_value(walsh_necessity(p, m, n, reps, seed, false)?).map_err(|e| recert::Error::Io(e.to_string())))
        .collect::<recert::Result<Vec<_>>>()
        .map_err(err)?;
    Ok(Value::Array(rows))
}

fn to_js(r: Result<Value, String>) -> Result<String, JsError> {
    r.map(|v| v.to_string()).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn cone_curve(a: &[f64], k0: f64, points: usize) -> Result<String, JsError> {
    to_js(cone_curve_json(a, k0, points))
}

#[wasm_bindgen]
pub fn bernstein(dist: &str, n: usize, thetas: &[f64], reps: usize, seed: u64) -> Result<String, JsError> {
    to_js(bernstein_json(dist, n, thetas, reps, seed))
}

#[wasm_bindgen]
pub fn walsh(p: usize, m: usize, ns: &[usize], reps: usize, seed: u64) -> Result<String, JsError> {
    to_js(walsh_json(p, m, ns, reps, seed))
}
