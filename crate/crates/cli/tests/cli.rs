use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

use serde_json::Value;

fn problem(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("problems").join(name)
}

fn selfsim(args: &[&str]) -> i32 {
    let out = Command::new(env!("CARGO_BIN_EXE_selfsim")).args(args).output().expect("binary runs");
    out.status.code().expect("exit code")
}

fn report(dir: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(dir.join("report.json")).unwrap()).unwrap()
}

fn check<'a>(r: &'a Value, name: &str) -> &'a Value {
    r["checks"].as_array().unwrap().iter().find(|c| c["name"] == name).unwrap_or_else(|| panic!("no check {name}"))
}

fn columns(path: &Path) -> Vec<Vec<f64>> {
    let mut rd = csv::Reader::from_path(path).unwrap();
    rd.records()
        .map(|r| r.unwrap().iter().map(|s| s.parse().unwrap()).collect())
        .collect()
}

#[test]
fn degen_i_profile_is_the_clamp() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let p = problem("degen_i.toml");
    assert_eq!(selfsim(&["profile-scalar", "--problem", p.to_str().unwrap(), "--out", out]), 0);
    let rows = columns(&dir.path().join("profile.csv"));
    assert_eq!(rows.len(), 2001);
    let err = rows.iter().map(|r| (r[1] - r[0].clamp(-1.0, 1.0)).abs()).fold(0.0, f64::max);
    assert!(err <= 1e-3, "sup error {err}");
    let r = report(dir.path());
    assert_eq!(r["status"], "ok");
    assert_eq!(r["seed"], 0);
}

fn round_trip(name: &str, command: &str) {
    let dir = tempfile::tempdir().unwrap();
    let (solve, check) = (dir.path().join("solve"), dir.path().join("verify"));
    let p = problem(name);
    let p = p.to_str().unwrap();
    assert_eq!(selfsim(&[command, "--problem", p, "--out", solve.to_str().unwrap()]), 0);
    let csv = solve.join("profile.csv");
    let code = selfsim(&["verify", "--profile", csv.to_str().unwrap(), "--problem", p, "--out", check.to_str().unwrap()]);
    assert_eq!(code, 0);
    let (a, b) = (report(&solve), report(&check));
    assert_eq!(a["checks"], b["checks"]);
    assert!(b["checks"].as_array().unwrap().iter().any(|c| c["name"] == "gaussian_bound" || c["name"] == "flux_envelope"));
}

#[test]
fn verify_reproduces_scalar_checks() {
    round_trip("linear.toml", "profile-scalar");
    let dir = tempfile::tempdir().unwrap();
    let p = problem("linear.toml");
    selfsim(&["profile-scalar", "--problem", p.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert_eq!(check(&report(dir.path()), "gaussian_bound")["pass"], true);
}

#[test]
fn verify_reproduces_vector_checks() {
    round_trip("matrix.toml", "profile-vector");
}

#[test]
fn monotonicity_violation_exits_nonzero() {
    let dir = tempfile::tempdir().unwrap();
    let p = problem("three_species.toml");
    let code = selfsim(&["reduce", "--check-monotonicity", "--problem", p.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert_eq!(code, 4);
    let r = report(dir.path());
    assert_eq!(check(&r, "monotonicity_bound")["pass"], false);
    assert!(r["info"]["monotonicity"].as_str().unwrap().contains("violated"));
    assert_eq!(check(&r, "psi_inverse")["pass"], true);
}

#[test]
fn monotonicity_holds_inside_the_region() {
    let dir = tempfile::tempdir().unwrap();
    let p = problem("three_species.toml");
    let code = selfsim(&[
        "reduce",
        "--check-monotonicity",
        "--problem",
        p.to_str().unwrap(),
        "--override",
        "network.diffusion=[2, 2, 10]",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
}

#[test]
fn validation_lists_every_error() {
    let dir = tempfile::tempdir().unwrap();
    let p = problem("linear.toml");
    let code = selfsim(&[
        "profile-scalar",
        "--problem",
        p.to_str().unwrap(),
        "--override",
        "grid.n_points=-5",
        "--override",
        "boundary.middle=0.5",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(code, 2);
    let r = report(dir.path());
    assert_eq!(r["error"]["category"], "validation");
    let msg = r["error"]["message"].as_str().unwrap();
    assert!(msg.contains("n_points") && msg.contains("middle"), "{msg}");
}

#[test]
fn outputs_are_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let p = problem("matrix.toml");
    let runs: Vec<PathBuf> = (0..2).map(|i| dir.path().join(i.to_string())).collect();
    for r in &runs {
        assert_eq!(selfsim(&["profile-vector", "--problem", p.to_str().unwrap(), "--out", r.to_str().unwrap()]), 0);
    }
    for f in ["profile.csv", "report.json"] {
        assert_eq!(fs::read(runs[0].join(f)).unwrap(), fs::read(runs[1].join(f)).unwrap(), "{f}");
    }
}

#[test]
fn several_problems_run_in_parallel() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (problem("linear.toml"), problem("three_species.toml"));
    let code = selfsim(&[
        "reduce",
        "--problem",
        b.to_str().unwrap(),
        "--problem",
        a.to_str().unwrap(),
        "--jobs",
        "2",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    // The linear problem has no network, so it fails validation.
    assert_eq!(code, 2);
    assert_eq!(report(&dir.path().join("000_three_species"))["status"], "ok");
    assert_eq!(report(&dir.path().join("001_linear"))["status"], "validation_failure");
}

#[test]
fn nonmonotone_case_lifts_to_the_given_limits() {
    let dir = tempfile::tempdir().unwrap();
    let p = problem("nonmonotone.toml");
    assert_eq!(selfsim(&["lift", "--problem", p.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]), 0);
    let rows = columns(&dir.path().join("lifted.csv"));
    let c3: Vec<f64> = rows.iter().map(|r| r[3]).collect();
    let peak = c3.iter().cloned().fold(f64::MIN, f64::max);
    assert!(peak > c3[0] + 0.1 && peak > c3[c3.len() - 1] + 0.1);
    assert!(dir.path().join("multipliers.csv").exists());
}

#[test]
fn oracle_without_problem_file() {
    let dir = tempfile::tempdir().unwrap();
    let code = selfsim(&["oracle", "--example", "degen_I", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(code, 0);
    assert!(dir.path().join("oracle.csv").exists());
    let code = selfsim(&["oracle", "--example", "nope", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(code, 2);
}

#[test]
fn evolve_writes_a_trajectory() {
    let dir = tempfile::tempdir().unwrap();
    let p = problem("pme_decay.toml");
    let code = selfsim(&[
        "evolve",
        "--problem",
        p.to_str().unwrap(),
        "--override",
        "grid.n_points=401",
        "--override",
        "evolution.tau_end=2",
        "--override",
        "evolution.fit_from=0.5",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    let text = fs::read_to_string(dir.path().join("trajectory.csv")).unwrap();
    assert!(text.starts_with("tau,H_phi,hellinger,moment0,moment1,sup_deviation\n"));
    assert_eq!(text.lines().count(), 22);
    let r = report(dir.path());
    assert_eq!(check(&r, "sigma_hypothesis")["pass"], true);
    assert_eq!(check(&r, "hellinger_ordering")["pass"], true);
}
