use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_re-cert"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("spawn re-cert")
}

fn json(out: &Output) -> Value {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("json on stdout")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_owned()
}

const RE_CONFIG: &str = r#"
kind = "re_transfer"
n_values = [60]
trials = 3
base_seed = 9
d_prime = 3
cone_samples = 100

[covariance]
kind = "identity"
p = 6

[cone]
s0 = 1
k0 = 1.0

[re_mode]
mode = "exact_oracle"
grid_per_axis = 8
"#;

#[test]
fn re_constant_of_identity_is_one() {
    let dir = tempfile::tempdir().unwrap();
    let m = write(dir.path(), "id.txt", "3 3\n1 0 0\n0 1 0\n0 0 1\n");
    let v = json(&run(&["re-constant", "--matrix", &m, "--s0", "1", "--k0", "2"]));
    assert!((v["k"].as_f64().unwrap() - 1.0).abs() < 1e-9);
}

#[test]
fn bounds_match_closed_forms() {
    let v = json(&run(&["bounds", "--m", "2", "--delta", "0.2", "--p", "100"]));
    let expected = (2000.0 * 2.0 / 0.04 * (60.0 * std::f64::consts::E * 100.0 / 0.4f64).ln()).ceil();
    assert_eq!(v["n_subgaussian"].as_f64().unwrap(), expected);
    assert_eq!(v["n_recovery"].as_u64().unwrap(), (2.0 * 50f64.ln()).ceil() as u64);
}

#[test]
fn basis_pursuit_prefers_shared_column() {
    let dir = tempfile::tempdir().unwrap();
    let x = write(dir.path(), "x.txt", "2 3\n1 0 1\n0 1 1\n");
    let b = write(dir.path(), "b.txt", "# target\n1 1\n");
    let v = json(&run(&["bp", "--x", &x, "--b", &b]));
    assert!((v["objective"].as_f64().unwrap() - 1.0).abs() < 1e-6);
    assert!((v["beta_hat"][2].as_f64().unwrap() - 1.0).abs() < 1e-6);
}

#[test]
fn csv_format_flattens_report() {
    let out = run(&["bernstein", "--n", "20", "--reps", "200", "--theta", "0.5", "--format", "csv"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert!(lines.next().unwrap().contains("empirical_tail"));
    assert_eq!(lines.count(), 1);
}

#[test]
fn exit_codes() {
    assert_eq!(run(&["--version"]).status.code(), Some(0));
    assert_eq!(run(&["no-such-command"]).status.code(), Some(1));
    assert_eq!(run(&["experiment"]).status.code(), Some(1));
    assert_eq!(run(&["rip", "--matrix", "/nonexistent/m.txt", "--s", "1"]).status.code(), Some(1));

    let dir = tempfile::tempdir().unwrap();
    let x = write(dir.path(), "x.txt", "2 2\n1 0\n1 0\n");
    let b = write(dir.path(), "b.txt", "1 2\n");
    assert_eq!(run(&["bp", "--x", &x, "--b", &b]).status.code(), Some(2));
}

#[test]
fn experiment_writes_reproducible_reports() {
    let dir = tempfile::tempdir().unwrap();
    let config = write(dir.path(), "re.toml", RE_CONFIG);
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for (out, threads) in [(&a, "1"), (&b, "3")] {
        let status = run(&["experiment", "--config", &config, "--out", out.to_str().unwrap(), "--threads", threads]).status;
        assert!(status.success());
    }
    for file in ["re_transfer.csv", "re_transfer.json"] {
        let left = std::fs::read(a.join(file)).unwrap();
        assert_eq!(left, std::fs::read(b.join(file)).unwrap(), "{file}");
    }
    let csv = std::fs::read_to_string(a.join("re_transfer.csv")).unwrap();
    assert!(csv.starts_with("# re-cert schema v1"));
    assert_eq!(csv.lines().count(), 2 + 3);

    let reseeded = run(&["experiment", "--config", &config, "--seed", "10", "--format", "csv"]);
    assert!(reseeded.status.success());
    assert_ne!(String::from_utf8(reseeded.stdout).unwrap(), csv);
}

#[test]
fn phase_requires_phase_config() {
    let dir = tempfile::tempdir().unwrap();
    let config = write(dir.path(), "re.toml", RE_CONFIG);
    assert_eq!(run(&["phase", "--config", &config]).status.code(), Some(1));
}
