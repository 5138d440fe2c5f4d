use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn statfrob(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_statfrob"))
        .args(args)
        .output()
        .unwrap()
}

fn json(args: &[&str]) -> (i32, Value) {
    let mut full = vec!["--format", "json"];
    full.extend_from_slice(args);
    let out = statfrob(&full);
    let code = out.status.code().unwrap();
    assert!(
        code != 2,
        "{args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    (code, serde_json::from_slice(&out.stdout).unwrap())
}

fn scratch(name: &str, contents: &str) -> PathBuf {
    let dir = PathBuf::from(env!("CARGO_TARGET_TMPDIR"));
    let path = dir.join(name);
    std::fs::write(&path, contents).unwrap();
    path
}

#[test]
fn model_info() {
    let (code, r) = json(&["model", "info", "bernoulli.json"]);
    assert_eq!(code, 0);
    assert_eq!(r["result"]["n"], 1);
    assert_eq!(r["result"]["rank"]["rank"], 1);
    let psi = r["result"]["psi_at_origin"].as_f64().unwrap();
    assert!((psi - 2f64.ln()).abs() < 1e-15);
    assert!(r["wall_time_ms"].is_number());
    assert_eq!(r["config"]["kappa"], -2.0);
}

#[test]
fn e_flat_curvature_on_independence() {
    let (code, r) = json(&[
        "geom",
        "curvature",
        "independence.json",
        "--alpha",
        "-1",
        "--theta",
        "0.3,0.7",
    ]);
    assert_eq!(code, 0);
    assert_eq!(r["pass"], true);
    assert!(r["result"]["curvature"]["max_abs"].as_f64().unwrap() < 1e-6);
    assert_eq!(r["tolerances"]["flatness"], 1e-6);
}

#[test]
fn toric_verify_on_independence() {
    let (code, r) = json(&["toric", "verify", "independence.json", "--samples", "100"]);
    assert_eq!(code, 0);
    assert!(r["result"]["max_residual"].as_f64().unwrap() < 1e-12);
    assert_eq!(r["config"]["samples"], 100);
}

#[test]
fn toric_ideal_lists_binomials() {
    let (_, r) = json(&["toric", "ideal", "independence-2x2"]);
    assert_eq!(r["result"]["binomials"][0], "y1*y4 - y2*y3");
    assert_eq!(
        r["result"]["lattice"]["basis"][0],
        serde_json::json!(["1", "-1", "-1", "1"])
    );
}

#[test]
fn frobenius_check_fields() {
    let (code, r) = json(&[
        "frobenius",
        "check",
        "random-n3m6-seed0",
        "--theta",
        "0.1,-0.2,0.3",
    ]);
    assert_eq!(code, 0);
    for key in [
        "kappa",
        "metric_invariance",
        "associativity",
        "potentiality",
        "pencil_match",
    ] {
        assert!(r["result"][key].is_number(), "{key}");
    }
}

#[test]
fn model_file_on_disk() {
    let path = scratch(
        "weighted.json",
        r#"{"name":"weighted","m":3,"n":1,"Q":[[0,1,2]],"base_measure":[1,2,1]}"#,
    );
    let (code, r) = json(&["toric", "verify", path.to_str().unwrap()]);
    assert_eq!(code, 0);
    assert_eq!(r["result"]["rescaled_by_base_measure"], true);
    let (_, info) = json(&["model", "info", path.to_str().unwrap()]);
    assert_eq!(info["result"]["name"], "weighted");
}

#[test]
fn malformed_inputs_exit_2() {
    let bad = scratch("bad.json", r#"{"name":"x","m":2,"n":1,"Q":[[0,1.5]]}"#);
    for args in [
        vec!["model", "info", bad.to_str().unwrap()],
        vec!["model", "info", "nonexistent"],
        vec!["geom", "tensors", "trinomial", "--theta", "1"],
        vec!["web", "fields", "--point", "1,0,0"],
        vec![
            "web", "hexagon", "--web", "sum", "--center", "0.5,0.5", "--eps", "0.7",
        ],
        vec!["algebra", "cr", "--map", "log"],
        vec!["frobenius"],
        vec!["--format", "xml", "model", "info", "bernoulli"],
    ] {
        let out = statfrob(&args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
        assert!(!out.stderr.is_empty());
    }
}

#[test]
fn tolerance_failure_exits_1() {
    let out = statfrob(&["web", "ceva", "--point", "0.2,0.3,0.5", "--perturb", "0.01"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn custom_web_file() {
    let path = scratch(
        "web.json",
        r#"{"name":"shifted-cubic","terms":[[1,1,0],[1,0,1],[1,1,2]],"domain":{"x_lo":0.5,"x_hi":2,"y_lo":0.5,"y_hi":2}}"#,
    );
    let (_, r) = json(&[
        "web",
        "curvature",
        "--web",
        path.to_str().unwrap(),
        "--at",
        "1,1",
    ]);
    let k = r["result"]["curvature"].as_f64().unwrap();
    assert!((k - 1.0 / 27.0).abs() < 1e-7);
}

#[test]
fn hexagon_report_columns() {
    let (_, r) = json(&[
        "web",
        "hexagon",
        "--web",
        "cubic",
        "--center",
        "1,1",
        "--eps",
        "0.02,0.01",
    ]);
    let entries = r["result"]["hexagon"]["entries"].as_array().unwrap();
    assert_eq!(entries.len(), 2);
    assert_eq!(entries[0]["vertices"].as_array().unwrap().len(), 7);
    assert!(entries[1]["defect_over_eps3"].as_f64().unwrap() > 1e-4);
}

#[test]
fn algebra_commands() {
    let (_, swap) = json(&["algebra", "cr", "--map", "swap", "--at", "1,2"]);
    assert!(swap["result"]["residual"].as_f64().unwrap() > 0.5);
    let (_, sub) = json(&["algebra", "subweb", "--web", "mixed"]);
    assert!(sub["result"]["minus"]["curvature"].as_f64().unwrap().abs() < 1e-12);
    assert!(sub["result"]["plus"]["curvature"].as_f64().unwrap() > 1e-3);
}

#[test]
fn text_format_is_default() {
    let out = statfrob(&["web", "sphere", "--point", "0.25,0.25,0.5"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("statfrob web sphere"));
    assert!(text.contains("metric_residual"));
}

#[test]
fn global_flags_after_subcommand() {
    let (_, a) = json(&["toric", "verify", "trinomial", "--seed", "5"]);
    assert_eq!(a["config"]["seed"], 5);
    let (_, b) = json(&["frobenius", "check", "trinomial", "--kappa", "2"]);
    assert_eq!(b["result"]["kappa"], 2.0);
}
