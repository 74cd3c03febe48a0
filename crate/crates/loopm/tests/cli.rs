//! Black-box tests of the command-line binary: flag spellings, output
//! formats, exit codes, and determinism.

use std::path::PathBuf;
use std::process::{Command, Output};

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_loopm")
}

fn prog(name: &str) -> String {
    format!("{}/../../programs/{}", env!("CARGO_MANIFEST_DIR"), name)
}

fn run(args: &[&str]) -> Output {
    Command::new(bin()).args(args).output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

#[test]
fn default_goals_and_invariants() {
    let out = run(&[&prog("rw.prob"), "--invariants"]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("E(x) = 1/2*n"), "{}", text);
    assert!(text.contains("E(y) = -1/2*n"), "{}", text);
    assert!(text.contains("E(x) + E(y) = 0"), "{}", text);
}

#[test]
fn goal_selection_and_after_loop() {
    let out = run(&[
        &prog("geometric.prob"),
        "--goals",
        "E(count)",
        "E(stop)",
        "--after_loop",
    ]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("E(count) [after loop] = 2"), "{}", text);
    assert!(text.contains("E(stop) [after loop] = 1"), "{}", text);
}

#[test]
fn after_loop_needs_a_guard() {
    let out = run(&[&prog("walk2d.prob"), "--after_loop"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn sensitivity_flags_accept_one_dash() {
    let out = run(&[&prog("walk2d.prob"), "--goals", "E(x**2)", "-sens_diff", "p"]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr(&out));
    assert!(stdout(&out).contains("d/dp E(x**2) = -2*n"), "{}", stdout(&out));

    let out = run(&[&prog("defective.prob"), "--goals", "E(u)", "-sens", "p"]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr(&out));
    assert!(stdout(&out).contains("d/dp E(u) ="), "{}", stdout(&out));
}

#[test]
fn synthesis_flags() {
    let out = run(&[&prog("squares.prob"), "--synth_unsolv_inv", "--inv_deg", "1"]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr(&out));
    assert!(stdout(&out).contains("E(x + y) satisfies s' = 2*s"), "{}", stdout(&out));

    let out = run(&[&prog("squares.prob"), "--synth_solv_loop"]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("while true:"), "{}", text);
    assert!(text.contains("s = 2*s"), "{}", text);
}

#[test]
fn analysis_errors_exit_one() {
    let out = run(&[&prog("defective.prob"), "--goals", "E(u)"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("error[DefectiveDependency]"), "{}", stderr(&out));
}

#[test]
fn usage_errors_exit_two() {
    let out = run(&["/nonexistent/benchmark.prob"]);
    assert_eq!(out.status.code(), Some(2));

    let out = run(&[&prog("rw.prob"), "--goals", "not a goal"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn json_output_is_deterministic_and_well_formed() {
    let args = [
        prog("rw.prob"),
        "--invariants".into(),
        "--format".into(),
        "json".into(),
    ];
    let argrefs: Vec<&str> = args.iter().map(|s| s.as_str()).collect();
    let a = run(&argrefs);
    let b = run(&argrefs);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let v: serde_json::Value = serde_json::from_str(&stdout(&a)).unwrap();
    for key in ["program", "goals", "invariants", "sensitivities", "diagnostics"] {
        assert!(v.get(key).is_some(), "missing {}", key);
    }
    assert!(v["goals"].as_array().unwrap().iter().any(|g| {
        g["goal"] == "E(x)" && g["closed_form_terms"].is_array()
    }));
}

#[test]
fn simulation_with_bindings_and_trace_export() {
    let csv = std::env::temp_dir().join("loopm_cli_traces.csv");
    let _ = std::fs::remove_file(&csv);
    let args: Vec<String> = vec![
        prog("walk2d.prob"),
        "--goals".into(),
        "E(x**2)".into(),
        "--simulate".into(),
        "5".into(),
        "--samples".into(),
        "200".into(),
        "--seed".into(),
        "3".into(),
        "--bind".into(),
        "p=1/2".into(),
        "--export_traces".into(),
        csv.to_string_lossy().into_owned(),
    ];
    let argrefs: Vec<&str> = args.iter().map(|s| s.as_str()).collect();
    let a = run(&argrefs);
    assert_eq!(a.status.code(), Some(0), "stderr: {}", stderr(&a));
    assert!(stdout(&a).contains("E(x**2) ~"), "{}", stdout(&a));
    let b = run(&argrefs);
    assert_eq!(a.stdout, b.stdout);

    let contents = std::fs::read_to_string(PathBuf::from(&csv)).unwrap();
    let mut lines = contents.lines();
    assert_eq!(lines.next(), Some("sample,iteration,variable,value"));
    assert!(lines.next().is_some());
    let _ = std::fs::remove_file(&csv);
}

#[test]
fn unbound_parameter_in_simulation_is_an_analysis_error() {
    let out = run(&[&prog("walk2d.prob"), "--goals", "E(x)", "--simulate", "3"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("error["), "{}", stderr(&out));
}
