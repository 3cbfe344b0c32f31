//! End-to-end CLI tests: exit codes, report shape, and determinism.

use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn lipgame(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lipgame"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout_json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!(
            "stdout is not JSON ({e}): {}\nstderr: {}",
            String::from_utf8_lossy(&out.stdout),
            String::from_utf8_lossy(&out.stderr)
        )
    })
}

fn write_constant_game(dir: &Path) -> std::path::PathBuf {
    let path = dir.join("constant.json");
    let spec = serde_json::json!({
        "kind": "explicit",
        "n": 2,
        "strategies": [2, 2],
        "payoffs": [[1.5, 1.5, 1.5, 1.5], [1.5, 1.5, 1.5, 1.5]],
    });
    std::fs::write(&path, spec.to_string()).unwrap();
    path
}

#[test]
fn lipschitz_of_constant_game_is_zero_with_exit_zero() {
    let dir = tempfile::tempdir().unwrap();
    let game = write_constant_game(dir.path());
    let out = lipgame(&["lipschitz", "--game", game.to_str().unwrap()]);
    assert!(out.status.success());
    let report = stdout_json(&out);
    assert_eq!(report["command"], "lipschitz");
    assert_eq!(report["results"]["delta"], 0.0);
}

#[test]
fn find_pure_on_gb_k7_returns_count_zero_and_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let spec_path = dir.path().join("gb_k7.json");
    // Generate a verified matrix spec through the example subcommand.
    let out = lipgame(&["example", "--kind", "gb", "--k", "7", "--seed", "3"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let report = stdout_json(&out);
    std::fs::write(&spec_path, report["results"].to_string()).unwrap();

    let out = lipgame(&[
        "find-pure",
        "--game",
        spec_path.to_str().unwrap(),
        "--eps",
        "0.333333",
    ]);
    assert_eq!(out.status.code(), Some(1));
    let report = stdout_json(&out);
    assert_eq!(report["results"]["count"], "0");
    assert!(report["results"]["first"].is_null());
}

#[test]
fn certificate_command_matches_library() {
    let out = lipgame(&[
        "certificate", "--eps", "0.3", "--n", "12", "--m", "2", "--delta", "0.004",
    ]);
    assert!(out.status.success());
    let report = stdout_json(&out);
    let cert = lipgame::purification::certificate(0.3, 0.004, 12, 2).unwrap();
    assert_eq!(
        report["results"]["success_lower_bound"].as_f64().unwrap(),
        cert.success_lower_bound
    );
}

#[test]
fn thresholds_match_formulas() {
    let out = lipgame(&["thresholds", "--eps", "0.3", "--n", "100", "--m", "2"]);
    assert!(out.status.success());
    let report = stdout_json(&out);
    let main = report["results"]["delta_main"].as_f64().unwrap();
    assert!((main - 0.00433).abs() < 5e-5);
    assert_eq!(report["results"]["delta_trivial"], 0.3 / 200.0);
    assert_eq!(report["results"]["delta_anonymous"], 0.3 / 4.0);
}

#[test]
fn verify_discrepancy_reports_worst_vector() {
    let dir = tempfile::tempdir().unwrap();
    let spec_path = dir.path().join("gb.json");
    // All-ones matrices fail discrepancy: x̄ orthogonal to half the rows
    // zeroes every column sum.
    let spec = serde_json::json!({
        "kind": "gale_berlekamp", "k": 4,
        "matrix": [[1, 1, 1, 1], [1, 1, 1, 1], [1, 1, 1, 1], [1, 1, 1, 1]],
    });
    std::fs::write(&spec_path, spec.to_string()).unwrap();
    let out = lipgame(&["verify-discrepancy", "--game", spec_path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let report = stdout_json(&out);
    assert_eq!(report["results"]["ok"], false);
    assert_eq!(report["results"]["worst_count"], 0);
}

#[test]
fn replicate_search_recovers_pure_equilibrium() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("coordination.json");
    let spec = serde_json::json!({
        "kind": "explicit", "n": 2, "strategies": [2, 2],
        "payoffs": [[1.0, 0.0, 0.0, 1.0], [1.0, 0.0, 0.0, 1.0]],
    });
    std::fs::write(&path, spec.to_string()).unwrap();
    let out = lipgame(&[
        "replicate", "--game", path.to_str().unwrap(),
        "--L", "2", "--eps", "0.0", "--method", "search", "--seed", "1",
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let report = stdout_json(&out);
    assert_eq!(report["results"]["mixed_regret"], 0.0);
}

#[test]
fn purify_is_deterministic_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("polymatrix.json");
    let spec = serde_json::json!({
        "kind": "polymatrix", "n": 6, "m": 2, "delta": 0.02, "seed": 9,
    });
    std::fs::write(&path, spec.to_string()).unwrap();
    let args = [
        "purify", "--game", path.to_str().unwrap(),
        "--eps", "0.3", "--seed", "4",
    ];
    let a = lipgame(&args);
    let b = lipgame(&args);
    assert!(a.status.success(), "{}", String::from_utf8_lossy(&a.stderr));
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn anonymous_purify_meets_bound_on_restaurant_spec() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("restaurant.json");
    let spec = serde_json::json!({"kind": "restaurant", "n": 12, "delta": 0.05});
    std::fs::write(&path, spec.to_string()).unwrap();
    let out = lipgame(&[
        "anonymous-purify", "--game", path.to_str().unwrap(), "--seed", "2",
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let report = stdout_json(&out);
    assert_eq!(report["results"]["meets_bound"], true);
}

#[test]
fn out_flag_writes_report_file() {
    let dir = tempfile::tempdir().unwrap();
    let game = write_constant_game(dir.path());
    let report_path = dir.path().join("report.json");
    let out = lipgame(&[
        "eta", "--game", game.to_str().unwrap(),
        "--out", report_path.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let report: Value =
        serde_json::from_str(&std::fs::read_to_string(&report_path).unwrap()).unwrap();
    assert_eq!(report["results"]["eta"], 0.0);
}

#[test]
fn missing_game_file_exits_two() {
    let out = lipgame(&["lipschitz", "--game", "/nonexistent/game.json"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn malformed_spec_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    std::fs::write(&path, r#"{"kind": "explicit", "bogus": 1}"#).unwrap();
    let out = lipgame(&["lipschitz", "--game", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn exhausted_budget_exits_three() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("mass_mp.json");
    std::fs::write(&path, r#"{"kind": "mass_mp", "k": 3}"#).unwrap();
    let out = lipgame(&[
        "find-pure", "--game", path.to_str().unwrap(),
        "--eps", "0.125", "--budget", "1000",
    ]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn budget_env_variable_is_honored() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("mass_mp.json");
    std::fs::write(&path, r#"{"kind": "mass_mp", "k": 3}"#).unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_lipgame"))
        .args(["find-pure", "--game", path.to_str().unwrap(), "--eps", "0.125"])
        .env("LIPGAME_BUDGET", "1000")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn unknown_experiment_exits_two() {
    let out = lipgame(&["experiment", "unheard-of"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn experiment_prop1_passes_and_prints_line() {
    let out = lipgame(&["experiment", "prop1"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let lines = String::from_utf8_lossy(&out.stderr);
    assert!(lines.contains("1-prop1-construction: PASS"), "{lines}");
    let report = stdout_json(&out);
    assert_eq!(report["results"][0]["pass"], true);
}

#[test]
fn thread_cap_does_not_change_results() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("polymatrix.json");
    let spec = serde_json::json!({
        "kind": "polymatrix", "n": 8, "m": 2, "delta": 0.05, "seed": 3,
    });
    std::fs::write(&path, spec.to_string()).unwrap();
    let base = ["find-pure", "--game", path.to_str().unwrap(), "--eps", "0.2"];
    let a = lipgame(&base);
    let mut with_threads: Vec<&str> = base.to_vec();
    with_threads.extend_from_slice(&["--threads", "1"]);
    let b = lipgame(&with_threads);
    assert_eq!(a.stdout, b.stdout);
}
