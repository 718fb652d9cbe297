use std::process::Command;

use serde_json::Value;
use tempfile::TempDir;

fn run(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("triplekit").chain(args.iter().copied());
    let code = triplekit::cli::run(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn json(args: &[&str]) -> Value {
    let (code, out, err) = run(args);
    assert_eq!(code, 0, "{args:?}: {err}");
    serde_json::from_str(&out).unwrap()
}

fn write(dir: &TempDir, name: &str, body: &str) -> String {
    let p = dir.path().join(name);
    std::fs::write(&p, body).unwrap();
    p.to_str().unwrap().to_string()
}

const E11: &str = r#"{"factor":{"kind":"type1","m":2,"n":2},"coords":[[1,0],[0,0],[0,0],[0,0]]}"#;
const FLIP: &str = r#"{"factor":{"kind":"type1","m":2,"n":2},"coords":[[0,0],[1,0],[1,0],[0,0]]}"#;

#[test]
fn suite_exit_codes() {
    assert_eq!(run(&["suite", "axioms", "--seed", "7"]).0, 0);
    assert_eq!(run(&["suite", "axioms", "--seed", "7", "--tol", "1e-30"]).0, 1);
    let (code, _, err) = run(&["suite", "no-such-suite"]);
    assert_eq!(code, 2);
    assert!(err.contains("unknown suite"));
    assert_eq!(run(&["suite", "axioms", "--frobnicate"]).0, 2);
}

#[test]
fn suite_json_report() {
    let v = json(&["suite", "hilbert", "--seed", "3", "--json"]);
    assert_eq!(v["suite"], "hilbert");
    assert_eq!(v["pass"], true);
    assert!(v["checks"].as_array().unwrap().iter().all(|c| c["pass"] == true));
}

#[test]
fn runs_are_deterministic_per_seed() {
    let a = run(&["suite", "lemma", "--seed", "11", "--json"]);
    let b = run(&["suite", "lemma", "--seed", "11", "--json"]);
    assert_eq!(a, b);
    let r1 = run(&["preserver", "random", "--seed", "5"]);
    let r2 = run(&["preserver", "random", "--seed", "5"]);
    assert_eq!(r1, r2);
    assert_ne!(r1.1, run(&["preserver", "random", "--seed", "6"]).1);
}

#[test]
fn range_of_a_diagonal_matrix_is_the_identity() {
    let dir = TempDir::new().unwrap();
    let a = write(&dir, "a.json", r#"{"factor":{"kind":"type1","m":2,"n":2},"coords":[[2,0],[0,0],[0,0],[1,0]]}"#);
    let r = json(&["element", "range", &a]);
    let coords: Vec<[f64; 2]> = serde_json::from_value(r["coords"].clone()).unwrap();
    let expected = [[1.0, 0.0], [0.0, 0.0], [0.0, 0.0], [1.0, 0.0]];
    for (c, e) in coords.iter().zip(expected) {
        assert!((c[0] - e[0]).abs() < 1e-12 && (c[1] - e[1]).abs() < 1e-12);
    }
}

#[test]
fn truncation_check_float_and_exact() {
    let dir = TempDir::new().unwrap();
    let e = write(&dir, "e.json", E11);
    let w = write(&dir, "w.json", FLIP);
    for backend in ["float", "exact"] {
        let v = json(&["trunc", "check", &e, &w, "--backend", backend, "--json"]);
        assert_eq!(v["a_truncation_of_b"], false, "{backend}");
        assert_eq!(v["b_truncation_of_a"], false, "{backend}");
        assert_eq!(v["b_in_annihilator_of_a"], true, "{backend}");
        assert_eq!(v["a_in_annihilator_of_b"], false, "{backend}");
    }
}

#[test]
fn synthesized_operator_decomposes_and_verifies() {
    let dir = TempDir::new().unwrap();
    let (code, spec, _) = run(&["preserver", "random", "--seed", "2", "--max-factors", "2"]);
    assert_eq!(code, 0);
    let spec_path = write(&dir, "spec.json", &spec);
    let (code, op, _) = run(&["preserver", "synth", &spec_path]);
    assert_eq!(code, 0);
    let op_path = write(&dir, "op.json", &op);
    assert_eq!(run(&["preserver", "verify", &op_path, "--trials", "40"]).0, 0);
    let (code, recovered, err) = run(&["preserver", "decompose", &op_path]);
    assert_eq!(code, 0, "{err}");
    let rec_path = write(&dir, "rec.json", &recovered);
    let (_, op2, _) = run(&["preserver", "synth", &rec_path]);
    let m1: Value = serde_json::from_str(&op).unwrap();
    let m2: Value = serde_json::from_str(&op2).unwrap();
    let flat = |v: &Value| -> Vec<f64> { serde_json::from_value(v["matrix"].clone()).unwrap() };
    let (a, b) = (flat(&m1), flat(&m2));
    assert_eq!(a.len(), b.len());
    let diff: f64 = a.iter().zip(&b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
    let norm: f64 = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    assert!(diff <= 1e-6 * norm, "{diff}");
}

#[test]
fn certificates_are_rational() {
    for which in ["lemma-quadrangle", "lemma-trangle", "wild-demo", "annihilator-example"] {
        let (code, out, _) = run(&["certify", which, "--json"]);
        assert_eq!(code, 0, "{which}");
        let v: Value = serde_json::from_str(&out).unwrap();
        let ok = if which == "wild-demo" { &v["pass"] } else { &v["certified"] };
        assert_eq!(ok, true, "{which}");
    }
    let (_, out, _) = run(&["certify", "lemma-quadrangle", "--json"]);
    assert!(out.contains("1/2"));
}

#[test]
fn malformed_input_is_a_usage_error() {
    let dir = TempDir::new().unwrap();
    let bad = write(&dir, "bad.json", "{not json");
    let (code, _, err) = run(&["element", "norm", &bad]);
    assert_eq!(code, 2);
    assert!(err.starts_with("triplekit element:"));
    let wrong_dim = write(&dir, "dim.json", r#"{"factor":{"kind":"spin","n":3},"coords":[[1,0]]}"#);
    assert_eq!(run(&["element", "norm", &wrong_dim]).0, 2);
    assert_eq!(run(&["element", "norm", "/nonexistent/x.json"]).0, 2);
}

#[test]
fn binary_reads_stdin() {
    let mut child = Command::new(env!("CARGO_BIN_EXE_triplekit"))
        .args(["element", "norm", "-"])
        .stdin(std::process::Stdio::piped())
        .stdout(std::process::Stdio::piped())
        .spawn()
        .unwrap();
    use std::io::Write;
    child.stdin.take().unwrap().write_all(FLIP.as_bytes()).unwrap();
    let out = child.wait_with_output().unwrap();
    assert!(out.status.success());
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    let norm = v.as_f64().or_else(|| v["norm"].as_f64()).unwrap();
    assert!((norm - 1.0).abs() < 1e-12);
}
