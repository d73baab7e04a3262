//! End-to-end checks of the command-line surface: flag parsing, output
//! formats, scenario files, and exit codes.

use std::path::PathBuf;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_spectral-lab"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("spawn spectral-lab")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

#[test]
fn thresholds_fibonacci_json() {
    let out = run(&["thresholds", "--model", "sturmian-fibonacci", "--lambda", "1"]);
    assert!(out.status.success());
    let doc: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    let p = doc["report"]["threshold_p"].as_f64().unwrap();
    assert!((21.55..=21.70).contains(&p), "threshold_p = {p}");
    assert_eq!(doc["seed"], 0);
}

#[test]
fn thresholds_sparse_and_csv_format() {
    let out = run(&["thresholds", "--model", "sparse", "--alpha", "0.5", "--format", "csv"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.starts_with("# seed=0\n"));
    assert!(text.contains("model,gamma1_sup,gamma2_inf,threshold_p"));
    assert!(text.contains("sparse,1,1.5,4"));
}

#[test]
fn solve_default_schedule_has_64_rows() {
    let out = run(&[
        "solve",
        "--potential",
        "free",
        "--energy",
        "0",
        "--phi",
        "0",
        "--L-max",
        "1000",
    ]);
    assert!(out.status.success());
    let text = stdout(&out);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "# seed=0");
    assert_eq!(lines[1], "L,norm_u1,norm_u2,wronskian");
    assert_eq!(lines.len(), 2 + 64);
    // free case at E=0: ‖u₁‖₁₀₀ = √50 and the Wronskian stays 1
    let first: Vec<&str> = lines[2].split(',').collect();
    assert_eq!(first[0], "100");
    let n1: f64 = first[1].parse().unwrap();
    assert!((n1 - 50f64.sqrt()).abs() < 1e-12);
    let w: f64 = first[3].parse().unwrap();
    assert!((w - 1.0).abs() < 1e-12);
}

#[test]
fn solve_missing_energy_is_usage_error() {
    let out = run(&["solve", "--potential", "free"]);
    assert!(!out.status.success());
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("--energy"), "stderr: {err}");
}

#[test]
fn potential_perturbed_free_values() {
    let out = run(&[
        "potential",
        "--potential",
        "free",
        "--perturb-c",
        "1",
        "--perturb-p",
        "1",
        "--n-min",
        "0",
        "--n-max",
        "3",
    ]);
    assert!(out.status.success());
    let text = stdout(&out);
    let mut lines = text.lines().skip(2);
    assert_eq!(lines.next().unwrap(), "0,1");
    assert_eq!(lines.next().unwrap(), "1,0.5");
}

#[test]
fn cf_golden_mean_all_ones() {
    let out = run(&["cf", "--theta", "golden", "--terms", "6"]);
    assert!(out.status.success());
    let text = stdout(&out);
    for (i, line) in text.lines().skip(2).enumerate() {
        assert_eq!(line, format!("{},1,1", i + 1));
    }
}

#[test]
fn cf_rational_theta_rejected() {
    let out = run(&["cf", "--theta", "0.5", "--terms", "2"]);
    assert!(!out.status.success());
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("rational"), "stderr: {err}");
}

#[test]
fn oracle_abel_bound_columns() {
    let out = run(&["oracle", "abel", "--a", "2", "--b", "1", "--L", "100"]);
    assert!(out.status.success());
    let text = stdout(&out);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[1], "n,lhs_partial,rhs_partial");
    assert_eq!(lines.len(), 2 + 100);
    for line in &lines[2..] {
        let cols: Vec<f64> = line.split(',').skip(1).map(|x| x.parse().unwrap()).collect();
        assert!(cols[0] <= cols[1], "lhs exceeds the bound in {line}");
    }
}

#[test]
fn stability_scenario_file_sweep() {
    let dir = std::env::temp_dir().join("spectral-lab-cli-test-sweep");
    std::fs::create_dir_all(&dir).unwrap();
    let scenario = dir.join("scenario.json");
    let report = dir.join("report.json");
    let curves = dir.join("curves.csv");
    std::fs::write(
        &scenario,
        r#"{
  "potential": {"family": "free"},
  "perturbation": {"C": 1.0, "p": 4.0, "sign_pattern": "plus"},
  "energies": [0.0, 0.5, -0.5],
  "phases": [0.0, 0.7],
  "checkpoints": {"l_max": 2000.0, "count": 16},
  "seed": 11
}"#,
    )
    .unwrap();
    let out = run(&[
        "--config",
        scenario.to_str().unwrap(),
        "stability",
        "--out",
        report.to_str().unwrap(),
        "--curves",
        curves.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    // one summary line per grid point
    let summary = stdout(&out);
    assert_eq!(summary.lines().filter(|l| l.starts_with("E=")).count(), 6);
    let doc: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(doc["seed"], 11);
    assert_eq!(doc["results"].as_array().unwrap().len(), 6);
    for r in doc["results"].as_array().unwrap() {
        assert_eq!(r["verdict"], "stable-like");
    }
    let csv = std::fs::read_to_string(&curves).unwrap();
    assert!(csv.starts_with("# seed=11\n"));
    assert!(csv.lines().nth(1).unwrap().starts_with("energy,phi,L,"));
}

#[test]
fn stability_scenario_rejects_unknown_keys() {
    let dir = std::env::temp_dir().join("spectral-lab-cli-test-unknown");
    std::fs::create_dir_all(&dir).unwrap();
    let scenario = dir.join("bad.json");
    std::fs::write(
        &scenario,
        r#"{
  "potential": {"family": "free"},
  "perturbation": {"C": 1.0, "p": 4.0},
  "energies": [0.0],
  "checkpoints": {"l_max": 500.0},
  "bogus_key": 1
}"#,
    )
    .unwrap();
    let out = run(&["--config", scenario.to_str().unwrap(), "stability"]);
    assert!(!out.status.success());
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("bogus_key"), "stderr: {err}");
}

#[test]
fn stability_records_per_point_failures_with_exit_2() {
    // second energy far outside the spectrum: dense solution overflow is a
    // per-point failure, not an abort
    let out = run(&[
        "stability",
        "--potential",
        "free",
        "--energy",
        "0",
        "25",
        "--perturbation-c",
        "1",
        "--perturbation-p",
        "4",
        "--L-max",
        "2000",
    ]);
    assert_eq!(out.status.code(), Some(2));
    let text = stdout(&out);
    assert!(text.contains("error"), "stdout: {text}");
    let json_start = text.find('{').unwrap();
    let doc: serde_json::Value = serde_json::from_str(&text[json_start..]).unwrap();
    let results = doc["results"].as_array().unwrap();
    assert_eq!(results.len(), 2);
    assert_eq!(results[0]["verdict"], "stable-like");
    assert!(results[1]["error"].is_string());
}

#[test]
fn stability_zero_perturbation_gives_unit_ratio_curves() {
    let dir = std::env::temp_dir().join("spectral-lab-cli-test-zero-p");
    std::fs::create_dir_all(&dir).unwrap();
    let curves = dir.join("curves.csv");
    let out = run(&[
        "stability",
        "--potential",
        "free",
        "--energy",
        "0.1",
        "--perturbation-c",
        "0",
        "--perturbation-p",
        "4",
        "--L-max",
        "1500",
        "--curves",
        curves.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(&curves).unwrap();
    for line in csv.lines().skip(2) {
        let cols: Vec<&str> = line.split(',').collect();
        assert_eq!(cols[3], "1", "ratio_v1_u1 row: {line}");
        assert_eq!(cols[4], "1", "ratio_v2_u2 row: {line}");
        assert_eq!(cols[5], "0", "eqlimites_dev row: {line}");
    }
}

#[test]
fn site_budget_env_cap() {
    let out = bin()
        .env("SPECTRAL_LAB_SITE_BUDGET", "500")
        .args(["solve", "--potential", "free", "--energy", "0", "--L-max", "1000"])
        .output()
        .unwrap();
    assert!(!out.status.success());
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("budget"), "stderr: {err}");
}

#[test]
fn subordinacy_emits_verdict_metadata() {
    let out = run(&[
        "subordinacy",
        "--potential",
        "free",
        "--energy",
        "0",
        "--phi",
        "0.5",
        "--kappa",
        "1",
        "--L-max",
        "5000",
    ]);
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let text = stdout(&out);
    assert!(text.lines().nth(1).unwrap().starts_with("L,ratio"));
    let last = text.lines().last().unwrap();
    assert!(last.starts_with("# kappa=1 verdict="), "last line: {last}");
}

#[test]
fn spec_file_round_trip_through_cli() {
    let dir = std::env::temp_dir().join("spectral-lab-cli-test-spec");
    std::fs::create_dir_all(&dir).unwrap();
    let spec_path: PathBuf = dir.join("spec.json");
    std::fs::write(
        &spec_path,
        r#"{"family":"sturmian","lambda":2.0,"theta":"golden","rho":"0"}"#,
    )
    .unwrap();
    let out = run(&[
        "potential",
        "--spec",
        spec_path.to_str().unwrap(),
        "--n-min",
        "1",
        "--n-max",
        "5",
    ]);
    assert!(out.status.success());
    let text = stdout(&out);
    let values: Vec<&str> = text.lines().skip(2).collect();
    assert_eq!(values, vec!["1,2", "2,0", "3,2", "4,2", "5,0"]);
}
