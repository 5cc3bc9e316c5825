use std::path::PathBuf;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_landmarks"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn write_temp(name: &str, contents: &str) -> PathBuf {
    let path =
        std::env::temp_dir().join(format!("landmarks-cli-test-{}-{name}", std::process::id()));
    std::fs::write(&path, contents).unwrap();
    path
}

#[test]
fn kernel_table_is_deterministic_and_matches_anchor() {
    let first = run(&[
        "kernel-table",
        "--family",
        "gaussian",
        "--scale",
        "1",
        "--rho-max",
        "4",
    ]);
    assert!(first.status.success());
    let second = run(&[
        "kernel-table",
        "--family",
        "gaussian",
        "--scale",
        "1",
        "--rho-max",
        "4",
    ]);
    assert_eq!(first.stdout, second.stdout, "byte-identical reruns");

    let text = String::from_utf8(first.stdout).unwrap();
    let mut lines = text.lines();
    let header = lines.next().unwrap();
    assert_eq!(
        header,
        "rho,gamma,dgamma,ddgamma,k1,k2,k3,k4,coefT1,coefT2,coefT3,coefT4,coefT5,K_L2R1"
    );
    let row_at_two = lines
        .map(|l| {
            l.split(',')
                .map(|v| v.parse::<f64>().unwrap())
                .collect::<Vec<_>>()
        })
        .find(|vals| (vals[0] - 2.0).abs() < 1e-12)
        .expect("rho = 2 row present");
    assert!(
        (row_at_two[4] - 0.3035).abs() < 1e-3,
        "k1 = {}",
        row_at_two[4]
    );
}

#[test]
fn curvature_reports_null_sectional_for_degenerate_section() {
    let problem = write_temp(
        "degenerate.json",
        r#"{
            "kernel": {"family": "gaussian", "scale": 1.0},
            "q": [[0.0, 0.0], [1.0, 0.0]],
            "alpha": [[1.0, 0.5], [-0.2, 0.3]],
            "beta": [[1.0, 0.5], [-0.2, 0.3]]
        }"#,
    );
    let out = run(&["curvature", "--problem", problem.to_str().unwrap()]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("\"sectional\":null"), "{text}");
    assert!(
        text.contains("\"numerator\":0.0000000000000000e0"),
        "{text}"
    );
    std::fs::remove_file(problem).ok();
}

#[test]
fn curvature_value_round_trips_through_json() {
    let problem = write_temp(
        "curvature.json",
        r#"{
            "kernel": {"family": "gaussian", "scale": 1.0},
            "q": [[0.0, 0.0], [1.3, 0.1], [-0.4, 0.8]],
            "alpha": [[1.0, 0.0], [0.0, -0.6], [0.2, 0.4]],
            "beta": [[0.0, 1.0], [0.5, 0.0], [-0.3, 0.2]]
        }"#,
    );
    let out = run(&["curvature", "--problem", problem.to_str().unwrap()]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let parsed: serde_json::Value = serde_json::from_str(&text).unwrap();
    let num = parsed["numerator"].as_f64().unwrap();
    let sum = parsed["r1"].as_f64().unwrap()
        + parsed["r2"].as_f64().unwrap()
        + parsed["r3"].as_f64().unwrap()
        + parsed["r4"].as_f64().unwrap();
    assert!((num - sum).abs() < 1e-12 * (1.0 + num.abs()));
    assert!(parsed["sectional"].is_f64());
    std::fs::remove_file(problem).ok();
}

#[test]
fn oracle_seeded_run_passes_and_is_deterministic() {
    let first = run(&["oracle", "--trials", "50", "--seed", "7"]);
    assert!(
        first.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&first.stderr)
    );
    let second = run(&["oracle", "--trials", "50", "--seed", "7"]);
    assert_eq!(first.stdout, second.stdout);
    let text = String::from_utf8(first.stdout).unwrap();
    assert!(text.contains("max residual"), "{text}");
}

#[test]
fn oracle_with_impossible_tolerance_exits_three() {
    let out = run(&["oracle", "--trials", "4", "--seed", "1", "--tol", "1e-30"]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn malformed_problem_exits_one() {
    let problem = write_temp("malformed.json", r#"{"kernel": {"family": "gaussian"#);
    let out = run(&["curvature", "--problem", problem.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    std::fs::remove_file(problem).ok();

    // unknown fields are rejected, not ignored
    let problem = write_temp(
        "unknown-field.json",
        r#"{"kernel": {"family": "gaussian", "scale": 1.0}, "qq": [[0.0]]}"#,
    );
    let out = run(&["curvature", "--problem", problem.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    std::fs::remove_file(problem).ok();
}

#[test]
fn degenerate_configuration_exits_two() {
    let problem = write_temp(
        "colliding.json",
        r#"{
            "kernel": {"family": "gaussian", "scale": 1.0},
            "q": [[0.0, 0.0], [1e-10, 0.0]],
            "alpha": [[1.0, 0.0], [0.0, 1.0]],
            "beta": [[0.0, 1.0], [1.0, 0.0]]
        }"#,
    );
    let out = run(&["curvature", "--problem", problem.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    std::fs::remove_file(problem).ok();
}

#[test]
fn geodesic_csv_has_documented_schema() {
    let problem = write_temp(
        "geodesic.json",
        r#"{
            "kernel": {"family": "gaussian", "scale": 1.0},
            "q": [[0.0, 0.0]],
            "p": [[1.0, 0.0]]
        }"#,
    );
    let out_path =
        std::env::temp_dir().join(format!("landmarks-geodesic-{}.csv", std::process::id()));
    let out = run(&[
        "geodesic",
        "--problem",
        problem.to_str().unwrap(),
        "--t-end",
        "1.0",
        "--steps",
        "10",
        "--out",
        out_path.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let summary = String::from_utf8(out.stdout).unwrap();
    assert!(summary.contains("\"h_drift\""), "{summary}");

    let csv = std::fs::read_to_string(&out_path).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), "t,q_1_1,q_1_2,p_1_1,p_1_2,H");
    assert_eq!(lines.count(), 11); // initial sample plus ten steps
    let last = csv.lines().last().unwrap();
    let vals: Vec<f64> = last.split(',').map(|v| v.parse().unwrap()).collect();
    assert!(
        (vals[1] - 1.0).abs() < 1e-12,
        "single landmark travels γ(0)·p·t"
    );
    std::fs::remove_file(problem).ok();
    std::fs::remove_file(out_path).ok();
}

#[test]
fn two_point_summary_reports_capture() {
    let problem = write_temp(
        "two-point.json",
        r#"{
            "kernel": {"family": "gaussian", "scale": 1.0},
            "q": [[1.0, 0.0], [-1.0, 0.0]],
            "p": [[-10.0, 8.6], [10.0, -8.6]]
        }"#,
    );
    let out_path =
        std::env::temp_dir().join(format!("landmarks-twopoint-{}.csv", std::process::id()));
    let out = run(&[
        "two-point",
        "--problem",
        problem.to_str().unwrap(),
        "--t-end",
        "0.5",
        "--out",
        out_path.to_str().unwrap(),
    ]);
    assert!(
        out.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    let summary = String::from_utf8(out.stdout).unwrap();
    assert!(
        summary.contains("\"classification\":\"capture_forward\""),
        "{summary}"
    );
    let parsed: serde_json::Value = serde_json::from_str(&summary).unwrap();
    assert!(parsed["quadrature_vs_ode_residual"].as_f64().unwrap() < 1e-4);
    assert!((parsed["omega"].as_f64().unwrap() - 8.6).abs() < 1e-10);

    let csv = std::fs::read_to_string(&out_path).unwrap();
    assert!(csv.starts_with("t,rho,theta,qbar_1,qbar_2\n"));
    std::fs::remove_file(problem).ok();
    std::fs::remove_file(out_path).ok();
}

#[test]
fn advect_grid_emits_long_format() {
    let problem = write_temp(
        "advect.json",
        r#"{
            "kernel": {"family": "gaussian", "scale": 1.5},
            "q": [[0.0, 0.0]],
            "p": [[2.7, 1.8]],
            "grid": {"x_min": -2.0, "x_max": 2.0, "y_min": -2.0, "y_max": 2.0, "nx": 3, "ny": 3}
        }"#,
    );
    let out = run(&[
        "advect",
        "--problem",
        problem.to_str().unwrap(),
        "--t-end",
        "1.0",
        "--steps",
        "20",
    ]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "id,t,x_1,x_2");
    assert_eq!(lines.count(), 9 * 21); // nine grid points, 21 samples
    std::fs::remove_file(problem).ok();
}

#[test]
fn inline_kernel_json_overrides_problem() {
    let problem = write_temp(
        "override.json",
        r#"{
            "kernel": {"family": "gaussian", "scale": 1.0},
            "q": [[0.0], [1.0]],
            "alpha": [[1.0], [0.0]],
            "beta": [[0.0], [1.0]]
        }"#,
    );
    let gaussian = run(&["curvature", "--problem", problem.to_str().unwrap()]);
    let matern = run(&[
        "curvature",
        "--problem",
        problem.to_str().unwrap(),
        "--kernel-json",
        r#"{"family":"matern","scale":1.0,"order":"3/2"}"#,
    ]);
    assert!(gaussian.status.success() && matern.status.success());
    assert_ne!(gaussian.stdout, matern.stdout);
    std::fs::remove_file(problem).ok();
}
