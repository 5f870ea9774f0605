use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_unitindex"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn stdout_json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn example(dir: &TempDir, name: &str, seed: u64) -> PathBuf {
    let path = dir.path().join(format!("{name}-{seed}.json"));
    let out = run(&["examples", name, "--seed", &seed.to_string(), "--out", path_str(&path)]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    path
}

fn write(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let path = dir.path().join(name);
    std::fs::write(&path, text).unwrap();
    path
}

fn rank(file: &Path, exprs: &[&str]) -> u64 {
    let mut args = vec!["index", path_str(file)];
    if !exprs.is_empty() {
        args.push("--exprs");
        args.extend_from_slice(exprs);
    }
    let out = run(&args);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    stdout_json(&out)["numerical_rank"].as_u64().unwrap()
}

fn small_ce(dir: &TempDir, name: &str, seed: u64) -> PathBuf {
    let text = format!(
        r#"{{"schema_version": 1, "algebra": [2], "reference": "w",
            "generator": {{"random_ce": {{"fock_dim": 2, "unit_count": 2, "seed": {seed}}}}}}}"#
    );
    write(dir, name, &text)
}

fn scalar_kernels(wx: f64, xw: f64) -> String {
    format!(
        r#"{{"schema_version": 1, "algebra": [1], "reference": "w",
            "kernels": {{"labels": ["w", "x"], "table": [
              {{"x": "w", "y": "w", "matrix": [[[0.0, 0.0]]]}},
              {{"x": "w", "y": "x", "matrix": [[[{wx}, 0.0]]]}},
              {{"x": "x", "y": "w", "matrix": [[[{xw}, 0.0]]]}},
              {{"x": "x", "y": "x", "matrix": [[[0.0, 0.0]]]}}]}}}}"#
    )
}

#[test]
fn fock_demo_validates_and_has_rank_two() {
    let dir = TempDir::new().unwrap();
    let f = example(&dir, "fock-demo", 0);
    let out = run(&["validate", path_str(&f)]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let report = stdout_json(&out);
    assert_eq!(report["pass"], Value::Bool(true));
    assert_eq!(report["module_axioms"]["checks"].as_array().unwrap().len(), 9);
    assert_eq!(rank(&f, &[]), 2);

    let out = run(&["index", path_str(&f)]);
    let report = stdout_json(&out);
    assert_eq!(report["null_mask"], serde_json::json!([true, false, false]));
    assert!(String::from_utf8_lossy(&out.stderr).contains("numerical rank 2"));
}

#[test]
fn shifting_an_expression_keeps_the_rank() {
    let dir = TempDir::new().unwrap();
    let f = example(&dir, "fock-demo", 0);
    let plain = rank(&f, &["(base x)", "(base y)"]);
    let shifted = rank(&f, &["(shift (base x) [[[[0.3, -1.2]]]])", "(base y)"]);
    assert_eq!(plain, 2);
    assert_eq!(shifted, plain);
}

#[test]
fn twisted_demo_has_rank_zero() {
    let dir = TempDir::new().unwrap();
    for seed in [0, 7] {
        let f = example(&dir, "twisted-demo", seed);
        assert_eq!(rank(&f, &[]), 0);
    }
}

#[test]
fn random_ce_is_deterministic() {
    let dir = TempDir::new().unwrap();
    let a = std::fs::read(example(&dir, "random-ce", 3)).unwrap();
    let b_path = dir.path().join("again.json");
    assert_eq!(code(&run(&["examples", "random-ce", "--seed", "3", "--out", path_str(&b_path)])), 0);
    assert_eq!(a, std::fs::read(&b_path).unwrap());
    let c = std::fs::read(example(&dir, "random-ce", 4)).unwrap();
    assert_ne!(a, c);
}

#[test]
fn index_reports_are_deterministic() {
    let dir = TempDir::new().unwrap();
    let f = example(&dir, "random-ce", 11);
    let a = run(&["index", path_str(&f)]);
    let b = run(&["index", path_str(&f)]);
    assert_eq!(code(&a), 0);
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn tensor_output_validates() {
    let dir = TempDir::new().unwrap();
    let a = small_ce(&dir, "a.json", 1);
    let b = small_ce(&dir, "b.json", 2);
    let t = dir.path().join("t.json");
    assert_eq!(code(&run(&["tensor", path_str(&a), path_str(&b), "--out", path_str(&t)])), 0);
    let file: Value = serde_json::from_str(&std::fs::read_to_string(&t).unwrap()).unwrap();
    assert_eq!(file["algebra"], serde_json::json!([4]));
    assert_eq!(file["reference"], Value::String("w⊗w".into()));
    assert_eq!(file["kernels"]["labels"].as_array().unwrap().len(), 4);
    let out = run(&["validate", path_str(&t), "--samples", "50"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn zero_tensor_zero_is_zero() {
    let dir = TempDir::new().unwrap();
    let z = write(&dir, "z.json", &scalar_kernels(0.0, 0.0));
    let t = dir.path().join("t.json");
    assert_eq!(code(&run(&["tensor", path_str(&z), path_str(&z), "--out", path_str(&t)])), 0);
    let file: Value = serde_json::from_str(&std::fs::read_to_string(&t).unwrap()).unwrap();
    let table = file["kernels"]["table"].as_array().unwrap();
    assert_eq!(table.len(), 16);
    for entry in table {
        assert_eq!(entry["matrix"], serde_json::json!([[[0.0, 0.0]]]));
    }
}

#[test]
fn broken_symmetry_fails_with_witness() {
    let dir = TempDir::new().unwrap();
    let f = write(&dir, "bad.json", &scalar_kernels(0.0, 1.0));
    let out = run(&["validate", path_str(&f)]);
    assert_eq!(code(&out), 1);
    let report = stdout_json(&out);
    assert_eq!(report["pass"], Value::Bool(false));
    let w = &report["symmetry"]["witness"];
    let pair = [w["x"].as_str().unwrap(), w["y"].as_str().unwrap()];
    assert!(pair == ["w", "x"] || pair == ["x", "w"], "{pair:?}");
    assert!(w["residual"].as_f64().unwrap() > 0.5);
}

#[test]
fn consistent_explicit_kernels_validate() {
    let dir = TempDir::new().unwrap();
    let f = write(&dir, "ok.json", &scalar_kernels(0.0, 0.0));
    assert_eq!(code(&run(&["validate", path_str(&f), "--samples", "20"])), 0);
}

#[test]
fn input_errors_exit_two() {
    let dir = TempDir::new().unwrap();
    let malformed = write(&dir, "m.json", "{\"schema_version\": 1,\n \"algebra\": [2");
    let out = run(&["validate", path_str(&malformed)]);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 2"));

    let version = write(&dir, "v.json", &scalar_kernels(0.0, 0.0).replace("\"schema_version\": 1", "\"schema_version\": 9"));
    assert_eq!(code(&run(&["validate", path_str(&version)])), 2);

    let fock = example(&dir, "fock-demo", 0);
    let out = run(&["index", path_str(&fock), "--exprs", "(base nobody)"]);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("nobody"));

    assert_eq!(code(&run(&["examples", "no-such-example", "--out", "x.json"])), 2);
    assert_eq!(code(&run(&["validate"])), 2);
}

#[test]
fn io_errors_exit_three() {
    let dir = TempDir::new().unwrap();
    let missing = dir.path().join("missing.json");
    assert_eq!(code(&run(&["validate", path_str(&missing)])), 3);
    assert_eq!(code(&run(&["index", path_str(&missing)])), 3);

    let fock = example(&dir, "fock-demo", 0);
    let unwritable = dir.path().join("no-dir").join("t.json");
    let out = run(&["tensor", path_str(&fock), path_str(&fock), "--out", path_str(&unwritable)]);
    assert_eq!(code(&out), 3);
}
