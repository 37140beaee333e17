use std::path::PathBuf;
use std::process::Command;

use fcolor::cli::{run, EXIT_VIOLATION};
use fcolor::codec::unpack_bits;
use serde_json::Value;

fn fixture() -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("fixtures/example1.json")
        .display()
        .to_string()
}

fn call(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let mut full = vec!["fcolor"];
    full.extend_from_slice(args);
    let code = run(full, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn json(args: &[&str]) -> Value {
    let mut full = vec!["--json"];
    full.extend_from_slice(args);
    let (code, out, err) = call(&full);
    assert_eq!(code, 0, "{err}");
    serde_json::from_str(&out).unwrap()
}

#[test]
fn build_reports_counts_and_writes_dot() {
    let f = fixture();
    let (code, out, _) = call(&["build", &f]);
    assert_eq!(code, 0);
    assert!(out.contains("5 vertices, 5 edges"), "{out}");
    let dir = tempfile::tempdir().unwrap();
    let dot = dir.path().join("g2.dot");
    let (code, out, _) = call(&["build", &f, "--n", "2", "--dot", dot.to_str().unwrap()]);
    assert_eq!(code, 0);
    assert!(out.contains("25 vertices"), "{out}");
    let text = std::fs::read_to_string(&dot).unwrap();
    assert!(text.starts_with("graph") && text.matches(" -- ").count() == 200, "{text}");
}

#[test]
fn documents_carry_schema_and_exact_rationals() {
    let d = json(&["build", &fixture(), "--dump-lp"]);
    assert_eq!(d["schema"], "fcolor/1");
    assert_eq!(d["command"], "build");
    assert_eq!(d["lp"]["lp"]["optimum"], "5/2");
    assert_eq!(d["lp"]["ilp"]["optimum"], "3");
    assert!(d.get("meta").is_none());
    let m = json(&["--meta", "build", &fixture()]);
    assert!(m["meta"]["version"].is_string());
}

#[test]
fn color_chromatic_palettes() {
    let f = fixture();
    assert_eq!(json(&["color", &f, "--chromatic"])["a"], 3);
    let d = json(&["color", &f, "--n", "2", "--b", "2", "--chromatic"]);
    assert_eq!(d["a"], 13);
    assert_eq!(d["chi_b"], 13);
}

#[test]
fn color_min_entropy_rate() {
    let d = json(&["color", &fixture(), "--min-entropy"]);
    assert!((d["entropy_bits"].as_f64().unwrap() - 1.5219).abs() < 5e-4);
    assert_eq!(d["optimal"], true);
    let r = json(&["color", &fixture(), "--min-entropy", "--b", "2", "--replica-ordered"]);
    assert_eq!(r["objective"], "replica-ordered");
}

#[test]
fn usage_errors_exit_nonzero() {
    let f = fixture();
    let (code, _, err) = call(&["color", &f, "--b", "0", "--chromatic"]);
    assert_eq!(code, 2);
    assert!(err.contains("--b"), "{err}");
    assert_eq!(call(&["color", &f]).0, 2);
    assert_ne!(call(&["rates", "/nonexistent/instance.json"]).0, 0);
}

#[test]
fn malformed_instance_names_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    let text = std::fs::read_to_string(fixture()).unwrap();
    let mut broken: Value = serde_json::from_str(&text).unwrap();
    broken["joint_pmf"][2] = serde_json::json!(["1/10"]);
    std::fs::write(&bad, broken.to_string()).unwrap();
    let (code, _, err) = call(&["build", bad.to_str().unwrap()]);
    assert_eq!(code, 1);
    assert!(err.contains("joint_pmf[2]"), "{err}");
}

#[test]
fn rates_single_letter_gap() {
    let d = json(&["rates", &fixture(), "--n", "1", "--b-max", "2"]);
    let g = &d["gap"];
    assert!((g["traditional_rate"].as_f64().unwrap() - 1.5219).abs() < 5e-4);
    assert!((g["fractional_rate"].as_f64().unwrap() - 1.1610).abs() < 5e-4);
    assert!((g["ig"].as_f64().unwrap() - 1.311).abs() < 2e-3);
    assert_eq!(g["chi_f"], "5/2");
    let one = json(&["rates", &fixture(), "--n", "2", "--b-max", "1"]);
    assert_eq!(one["gap"]["rows"].as_array().unwrap().len(), 1);
    assert_eq!(one["gap"]["ig"], 1.0);
}

#[test]
fn codec_transcript_and_binary() {
    let dir = tempfile::tempdir().unwrap();
    let bin = dir.path().join("bits.bin");
    let d = json(&[
        "codec", &fixture(), "--n", "2", "--side=-1,1", "--replicas=-2,2", "--verify",
        "--binary", bin.to_str().unwrap(),
    ]);
    let t = &d["transcript"];
    assert_eq!(t["outcomes"], serde_json::json!(["-3", "3"]));
    assert_eq!(d["verify"]["mismatches"], 0);
    assert_eq!(d["kraft_sum"], "1");
    let bits = unpack_bits(&std::fs::read(&bin).unwrap()).unwrap();
    assert_eq!(bits, t["encoded"]["codeword"].as_str().unwrap());
    let (code, out, _) = call(&["codec", &fixture(), "--n", "2", "--side=-1,1", "--replicas=-2,2"]);
    assert_eq!(code, 0);
    assert!(out.trim_end().ends_with("outcomes: -3, 3"), "{out}");
}

#[test]
fn codec_rejects_unknown_side_symbol() {
    let (code, _, err) = call(&["codec", &fixture(), "--side=7", "--replicas=-2"]);
    assert_eq!(code, 1);
    assert!(err.contains('7'), "{err}");
}

#[test]
fn output_is_deterministic_across_thread_counts() {
    let f = fixture();
    let args = ["rates", &f, "--n", "2", "--b-max", "2", "--table"];
    let (c1, a, _) = call(&args);
    let mut seq = vec!["--sequential"];
    seq.extend_from_slice(&args);
    let (c2, b, _) = call(&seq);
    let mut two = vec!["--threads", "2"];
    two.extend_from_slice(&args);
    let (c3, c, _) = call(&two);
    assert_eq!((c1, c2, c3), (0, 0, 0));
    assert_eq!(a, b);
    assert_eq!(a, c);
}

#[test]
fn binary_exit_codes() {
    let exe = env!("CARGO_BIN_EXE_fcolor");
    let ok = Command::new(exe).args(["build", &fixture()]).output().unwrap();
    assert!(ok.status.success());
    assert_eq!(String::from_utf8_lossy(&ok.stdout).lines().next(), Some("n = 1: 5 vertices, 5 edges"));
    let bad = Command::new(exe).args(["color", &fixture(), "--b", "0", "--chromatic"]).output().unwrap();
    assert_eq!(bad.status.code(), Some(2));
    let budget = Command::new(exe)
        .env("FCOLOR_BUDGET", "power_vertices=10")
        .args(["build", &fixture(), "--n", "2"])
        .output()
        .unwrap();
    assert_eq!(budget.status.code(), Some(1));
    assert_ne!(EXIT_VIOLATION, 0);
}
