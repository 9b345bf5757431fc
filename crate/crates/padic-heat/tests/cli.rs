use std::path::PathBuf;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_padic-heat"))
}

fn data(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/data").join(name)
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn text(b: &[u8]) -> String {
    String::from_utf8_lossy(b).into_owned()
}

const MODEL: [&str; 8] = ["--p", "2", "--n", "1", "--alpha", "1", "--a", "1"];

fn kernel(extra: &[&str]) -> Output {
    let mut args = vec!["kernel"];
    args.extend(MODEL);
    args.extend(extra);
    run(&args)
}

#[test]
fn kernel_check_passes() {
    let out = kernel(&["--t", "1", "--check"]);
    let err = text(&out.stderr);
    assert_eq!(out.status.code(), Some(0), "{err}");
    let lines: Vec<&str> = err.lines().filter(|l| l.starts_with("PASS") || l.starts_with("FAIL")).collect();
    assert_eq!(lines.len(), 4, "{err}");
    assert!(lines.iter().all(|l| l.starts_with("PASS")));
    let summary: serde_json::Value = serde_json::from_str(err.lines().last().unwrap()).unwrap();
    assert_eq!(summary["passed"], true);
    assert_eq!(summary["exit_code"], 0);
}

#[test]
fn kernel_usage_errors() {
    let out = kernel(&["--t", "0"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(text(&out.stderr).contains("--t"));
    assert_eq!(run(&["kernel", "--p", "2"]).status.code(), Some(2));
    assert_eq!(kernel(&["--t", "1", "--frobnicate"]).status.code(), Some(2));
    assert_eq!(kernel(&["--t", "1", "--m-range", "3", "-3"]).status.code(), Some(2));
}

#[test]
fn kernel_table_shape_and_precision() {
    let out = kernel(&["--t", "1", "--m-range", "-10", "10"]);
    assert_eq!(out.status.code(), Some(0));
    let csv = text(&out.stdout);
    let rows: Vec<&str> = csv.lines().skip(1).collect();
    assert_eq!(rows.len(), 21);
    let mut last_cdf = 0.0;
    for r in &rows {
        let cols: Vec<&str> = r.split(',').collect();
        assert_eq!(cols.len(), 5);
        let mantissa = cols[2].split('e').next().unwrap();
        assert_eq!(mantissa.replace(['.', '-'], "").len(), 17, "{r}");
        let cdf: f64 = cols[4].parse().unwrap();
        assert!(cdf >= last_cdf);
        last_cdf = cdf;
    }
    let json = kernel(&["--t", "1", "--m-range", "0", "2", "--format", "json"]);
    let v: serde_json::Value = serde_json::from_slice(&json.stdout).unwrap();
    assert_eq!(v.as_array().unwrap().len(), 3);
    assert_eq!(v[0]["m"], 0);
}

#[test]
fn solve_constant_data_stays_constant() {
    let out = run(&["solve", "--problem", data("constant.json").to_str().unwrap(), "--t", "0.1", "1"]);
    assert_eq!(out.status.code(), Some(0), "{}", text(&out.stderr));
    let csv = text(&out.stdout);
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("x_id,m,t,re_u,im_u,residual"));
    let mut n = 0;
    for l in lines {
        let cols: Vec<&str> = l.split(',').collect();
        let re: f64 = cols[3].parse().unwrap();
        let im: f64 = cols[4].parse().unwrap();
        assert!((re - 1.0).abs() < 1e-12 && im.abs() < 1e-15, "{l}");
        n += 1;
    }
    assert_eq!(n, 2 * 8);
}

#[test]
fn solve_ball_indicator_residual_passes() {
    let out = run(&["solve", "-f", data("ball.json").to_str().unwrap(), "--t", "0.5", "--residual"]);
    let err = text(&out.stderr);
    assert_eq!(out.status.code(), Some(0), "{err}");
    assert!(err.contains("PASS residual"), "{err}");
    let csv = text(&out.stdout);
    for l in csv.lines().skip(1) {
        let r: f64 = l.rsplit(',').next().unwrap().parse().unwrap();
        assert!(r < 1e-5);
    }
}

#[test]
fn solve_separable_source() {
    let f = data("separable.json");
    let out = run(&["solve", "-f", f.to_str().unwrap(), "--residual", "--t", "0.25", "0.75", "--m-range", "0", "1"]);
    assert_eq!(out.status.code(), Some(0), "{}", text(&out.stderr));
    assert_eq!(text(&out.stdout).lines().count(), 1 + 2 * 3);
    // the residual at t = T would need values past the horizon
    let late = run(&["solve", "-f", f.to_str().unwrap(), "--residual"]);
    assert_eq!(late.status.code(), Some(2));
    assert!(text(&late.stderr).contains("horizon"));
}

#[test]
fn solve_rejects_fast_growth() {
    let out = run(&["solve", "-f", data("fast_growth.json").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(text(&out.stderr).contains("0 <= λ < α"), "{}", text(&out.stderr));
}

#[test]
fn solve_reports_malformed_input() {
    let out = run(&["solve", "-f", data("malformed.json").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let err = text(&out.stderr);
    assert!(err.contains("malformed.json:4:"), "{err}");
    assert!(err.contains("phi.pieces[0].radius_exp"), "{err}");
    let missing = run(&["solve", "-f", "/nonexistent/problem.json"]);
    assert_eq!(missing.status.code(), Some(2));
}

#[test]
fn simulate_is_deterministic_across_thread_counts() {
    let args = ["simulate", "--p", "3", "--n", "2", "--alpha", "1", "--a", "1", "--dt", "0.5", "--steps", "4", "--paths", "16", "--seed", "9"];
    let one = bin().args(args).env("PADIC_HEAT_THREADS", "1").output().unwrap();
    let four = bin().args(args).env("PADIC_HEAT_THREADS", "4").output().unwrap();
    assert_eq!(one.status.code(), Some(0));
    assert_eq!(one.stdout, four.stdout);
    let body = text(&one.stdout);
    assert_eq!(body.lines().count(), 16 * 5);
    let rec: serde_json::Value = serde_json::from_str(body.lines().nth(1).unwrap()).unwrap();
    for key in ["path", "step", "t", "state", "radius_exp", "clipped"] {
        assert!(rec.get(key).is_some(), "{key}");
    }
    let bad = bin().args(args).env("PADIC_HEAT_THREADS", "zero").output().unwrap();
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn simulate_writes_files_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let traj = dir.path().join("traj.jsonl");
    let summary = dir.path().join("summary.json");
    let out = run(&[
        "simulate", "--p", "2", "--n", "1", "--alpha", "2", "--a", "0.5", "--dt", "0.1", "--steps", "3", "--paths", "2",
        "--seed", "1", "--out", traj.to_str().unwrap(), "--summary", summary.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    assert_eq!(std::fs::read_to_string(&traj).unwrap().lines().count(), 8);
    let s: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&summary).unwrap()).unwrap();
    assert_eq!(s["command"], "simulate");
    assert!(s["clipped_mass"].as_f64().unwrap() < 1e-9);
    // a window too small for the law is refused
    let small = run(&["simulate", "--p", "2", "--n", "1", "--alpha", "1", "--a", "1", "--dt", "1", "--steps", "1", "--window", "-3", "3"]);
    assert_eq!(small.status.code(), Some(1));
    assert!(text(&small.stderr).contains("window too small"));
}

#[test]
fn elliptic_check_and_gen() {
    let ok = run(&["elliptic", "check", "-f", data("quadratic.json").to_str().unwrap(), "--samples", "500"]);
    assert_eq!(ok.status.code(), Some(0), "{}", text(&ok.stderr));
    let report: serde_json::Value = serde_json::from_slice(&ok.stdout).unwrap();
    assert_eq!(report["strongly_elliptic"], true);
    assert_eq!(report["norm_identity"]["violations"], 0);

    // 4 is a square mod 5, so x² - 4y² has the root (2, 1)
    let split = run(&["elliptic", "check", "-f", data("split_quadratic.json").to_str().unwrap()]);
    assert_eq!(split.status.code(), Some(1));
    let report: serde_json::Value = serde_json::from_slice(&split.stdout).unwrap();
    assert_eq!(report["strongly_elliptic"], false);
    assert!(report["witness"]["point"].is_array());

    let gen = run(&["elliptic", "gen", "--p", "5", "--n", "3", "--seed", "2"]);
    assert_eq!(gen.status.code(), Some(0));
    let poly: serde_json::Value = serde_json::from_slice(&gen.stdout).unwrap();
    assert_eq!(poly["p"], 5);
    assert_eq!(poly["n"], 3);
}

#[test]
fn check_subset() {
    let out = run(&["check", "--only", "9,10"]);
    let err = text(&out.stderr);
    assert_eq!(out.status.code(), Some(0), "{err}");
    assert!(err.lines().next().unwrap().starts_with("PASS  9"));
    assert!(err.lines().nth(1).unwrap().starts_with("PASS 10"));
    assert_eq!(run(&["check", "--only", "14"]).status.code(), Some(2));
}
