use std::fs;
use std::process::{Command, Output};

use serde_json::{json, Value};

fn hmfe(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hmfe")).args(args).output().unwrap()
}

fn report(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!("{e}: {}", String::from_utf8_lossy(&out.stderr));
    })
}

#[test]
fn ode_solve_examples() {
    let out = hmfe(&["ode", "solve", "--data", "1,1", "--a", "3", "--terms", "6"]);
    assert_eq!(out.status.code(), Some(0));
    let v = report(&out);
    assert_eq!(v["result"]["coeffs"], json!(["1/3", "1", "1", "1/3", "0", "0", "0"]));
    assert_eq!(v["tool"], "hmfe");
    assert_eq!(v["version"], env!("CARGO_PKG_VERSION"));

    assert_eq!(hmfe(&["ode", "solve", "--data", "1,1", "--a", "0"]).status.code(), Some(3));

    // S = 1, a = 1: Q = 1 + t + t^2/4 exactly
    let v = report(&hmfe(&["ode", "solve", "--data", "1", "--a", "1", "--terms", "3"]));
    assert_eq!(v["result"]["coeffs"], json!(["1", "1", "1/4", "0"]));
}

#[test]
fn ode_detect_examples() {
    let v = report(&hmfe(&["ode", "detect", "--data", "1,1"]));
    assert_eq!(v["result"]["status"], "polynomial_found");
    assert_eq!(v["result"]["roots"][0]["root"]["value"], "3");
    let v = report(&hmfe(&["ode", "detect", "--data", "1,1,1"]));
    assert_eq!(v["result"]["roots"][0]["root"]["value"], "8");
    // every a ≠ 0 works for constant data, so no single root is singled out
    let v = report(&hmfe(&["ode", "detect", "--data", "1"]));
    assert_eq!(v["result"]["status"], "every_nonzero_a");
    assert_eq!(v["result"]["roots"], json!([]));
    let v = report(&hmfe(&["ode", "detect", "--data", "1,3,3,1", "--max-degree", "6"]));
    assert_eq!(v["result"]["roots"][0]["root"]["value"], "5");
    assert_eq!(hmfe(&["ode", "detect", "--data", "0,0"]).status.code(), Some(3));
}

#[test]
fn pde_from_files() {
    let dir = tempfile::tempdir().unwrap();
    let u = dir.path().join("u.json");
    fs::write(&u, r#"[[0,0,"1/8"],[1,1,"1"],[2,2,"9/4"],[3,3,"1"],[4,4,"1/8"]]"#).unwrap();
    let sigma = r#"[[0,0,"1"],[1,1,"1"],[2,2,"1"]]"#;
    let at_u = format!("@{}", u.display());
    let v = report(&hmfe(&["pde", "residual", "--u", &at_u, "--sigma", sigma]));
    assert_eq!(v["result"]["is_zero"], true);
    let v = report(&hmfe(&["pde", "check-variety", "--u", &at_u, "--sigma", sigma]));
    assert_eq!(v["result"]["member"], true);
    assert_eq!(v["result"]["max_index"], json!([8, 8]));
    assert_eq!(hmfe(&["pde", "residual", "--u", "@/nonexistent/u.json", "--sigma", sigma]).status.code(), Some(2));
}

#[test]
fn construct_exit_codes() {
    assert_eq!(hmfe(&["mfe", "construct", "--lambda", "1,1"]).status.code(), Some(0));
    assert_eq!(hmfe(&["mfe", "construct", "--lambda", "1,0"]).status.code(), Some(3));
    let out = hmfe(&["mfe", "construct", "--lambda", "1,2,1,1"]);
    assert_eq!(out.status.code(), Some(5));
    assert_eq!(report(&out)["result"]["report"]["status"], "no_admissible_root");
}

#[test]
fn construct_with_curve_and_metric_files() {
    let dir = tempfile::tempdir().unwrap();
    let metric = dir.path().join("metric.json");
    fs::write(&metric, r#"["1", "1", "1"]"#).unwrap();
    let curve = dir.path().join("curve.json");
    fs::write(&curve, "[[1,0],[-1,0],[0,1],[0,-1],[2,2],[-2,2],[2,-2],[-2,-2]]").unwrap();
    let out = hmfe(&[
        "mfe",
        "construct",
        "--metric",
        metric.to_str().unwrap(),
        "--curve",
        curve.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let v = report(&out);
    assert_eq!(v["input"]["curve"]["genus"], 3);
    assert_eq!(v["result"]["report"]["solution"]["u_exact"], json!(["1/8", "1", "9/4", "1", "1/8"]));
    // |f(0)| = 1 · 64, u(0) = 1/8
    let phi0 = v["result"]["phi_at_chart_origins"][0].as_f64().unwrap();
    assert!((phi0 - 4.0 * 64.0 * 8.0).abs() < 1e-9);
}

#[test]
fn verify_end_to_end_and_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("report.json");
    let csv = dir.path().join("points.csv");
    let out = hmfe(&[
        "mfe",
        "verify",
        "--lambda",
        "1,1",
        "--fd-step",
        "1e-3",
        "--resolution",
        "61",
        "--mass-resolution",
        "600",
        "--seed",
        "11",
        "--csv",
        csv.to_str().unwrap(),
        "--out",
        out_path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(out.stdout.is_empty());
    let v: Value = serde_json::from_str(&fs::read_to_string(&out_path).unwrap()).unwrap();
    assert_eq!(v["result"]["passed"], true);
    assert_eq!(v["input"]["config"]["seed"], 11);
    assert_eq!(v["input"]["config"]["tolerances"]["residual_rel"].as_f64(), Some(1e-4));
    let mass = v["result"]["mass"]["mass_estimate"].as_f64().unwrap();
    assert!((mass - 75.398).abs() < 0.01);
    let lines = fs::read_to_string(&csv).unwrap();
    assert_eq!(lines.lines().next(), Some("re,im,phi,residual"));
    assert_eq!(lines.lines().count() - 1, v["result"]["residual"]["points_checked"].as_u64().unwrap() as usize);
}

#[test]
fn reports_are_deterministic() {
    let args = ["mfe", "verify", "--lambda", "1,1,1", "--resolution", "41", "--mass-resolution", "300", "--seed", "5"];
    let a = hmfe(&args);
    let b = hmfe(&args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn perturbed_solution_fails_verification() {
    let dir = tempfile::tempdir().unwrap();
    let sol = dir.path().join("perturbed.json");
    fs::write(&sol, r#"{"u": [0.3333333333333333, 1.01, 1.0, 0.3333333333333333], "sigma": [1.0, 1.0]}"#).unwrap();
    let out = hmfe(&["mfe", "verify", "--solution", sol.to_str().unwrap(), "--resolution", "61", "--mass-resolution", "300"]);
    assert_eq!(out.status.code(), Some(4));
    let v = report(&out);
    assert_eq!(v["result"]["passed"], false);
    assert!(v["result"]["residual"]["max_abs_residual"].as_f64().unwrap() > 1e-2);

    // a construction report round-trips as a solution file
    let cons = dir.path().join("construct.json");
    let c = hmfe(&["mfe", "construct", "--lambda", "1,1"]);
    fs::write(&cons, &c.stdout).unwrap();
    let out = hmfe(&["mfe", "verify", "--solution", cons.to_str().unwrap(), "--resolution", "61", "--mass-resolution", "300"]);
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn mass_command() {
    let out = hmfe(&["mfe", "mass", "--lambda", "1,1", "--resolution", "500"]);
    assert_eq!(out.status.code(), Some(0));
    let v = report(&out);
    assert!((v["result"]["mass_expected"].as_f64().unwrap() - 24.0 * std::f64::consts::PI).abs() < 1e-12);
    assert_eq!(hmfe(&["mfe", "mass", "--lambda", "1,2,1,1"]).status.code(), Some(5));
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(hmfe(&["ode"]).status.code(), Some(2));
    assert_eq!(hmfe(&["mfe", "verify", "--lambda", "1,1", "--center", "nope"]).status.code(), Some(2));
    assert_eq!(hmfe(&["--help"]).status.code(), Some(0));
}
