use std::path::{Path, PathBuf};
use std::process::Command;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use realform::grouprep::{matrix_to_value, save_representation};
use realform::harness;
use realform::matcore::{self, c};
use realform::{ComplexMatrix, Family, GroupKind, RealFormTag, Representation};
use realform_cli::{run_with_env, EXIT_INVALID_INPUT, EXIT_OK, EXIT_PRECONDITION};
use serde_json::Value;
use tempfile::TempDir;

fn write_rep(dir: &Path, name: &str, rep: &Representation) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, save_representation(rep)).unwrap();
    path
}

fn write_json(dir: &Path, name: &str, v: &Value) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, serde_json::to_vec(v).unwrap()).unwrap();
    path
}

fn su2_scrambled(dir: &Path) -> PathBuf {
    let rep = harness::sample_real_form(RealFormTag::Su(2, 0), 2, 17).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let (scrambled, _) = harness::scramble(&rep, &mut rng).unwrap();
    write_rep(dir, "su2_scrambled.json", &scrambled)
}

fn cli(args: &[&str]) -> realform_cli::Outcome {
    let argv: Vec<&str> = std::iter::once("realform").chain(args.iter().copied()).collect();
    run_with_env(argv, None)
}

fn stdout_json(out: &realform_cli::Outcome) -> Value {
    assert_eq!(out.code, EXIT_OK, "stderr: {}", out.stderr);
    serde_json::from_str(&out.stdout).unwrap()
}

fn stderr_json(out: &realform_cli::Outcome) -> Value {
    assert!(out.stdout.is_empty());
    serde_json::from_str(out.stderr.trim()).unwrap()
}

#[test]
fn classify_scrambled_su2() {
    let dir = TempDir::new().unwrap();
    let path = su2_scrambled(dir.path());
    let v = stdout_json(&cli(&["classify", path.to_str().unwrap(), "--involution", "phi2"]));
    assert_eq!(v["tag"], "SU");
    assert_eq!(v["params"], serde_json::json!([2, 0]));
    assert!(v["lambda_sign"].is_null());
    assert!(v["residuals"].as_array().unwrap().iter().all(|r| r.as_f64().unwrap() < 1e-9));
}

#[test]
fn coords_of_identity_are_dimension() {
    let dir = TempDir::new().unwrap();
    let rep = Representation::unchecked(
        GroupKind::new(Family::GL, 3).unwrap(),
        vec![matcore::identity(3), matcore::identity(3)],
    );
    let path = write_rep(dir.path(), "identity_rep.json", &rep);
    let v = stdout_json(&cli(&["coords", path.to_str().unwrap()]));
    let traces = v["traces"].as_array().unwrap();
    assert!(!traces.is_empty());
    for t in traces {
        assert_eq!(t, &serde_json::json!([3.0, 0.0]));
    }
}

#[test]
fn generic_complex_rep_is_not_phi1_fixed() {
    let dir = TempDir::new().unwrap();
    let a = matcore::from_rows(&[&[c(1.0, 0.7), c(0.2, -0.3)], &[c(0.5, 0.1), c(-0.4, 1.1)]]);
    let b = matcore::from_rows(&[&[c(0.3, -0.2), c(1.0, 0.4)], &[c(-0.9, 0.0), c(0.6, 0.8)]]);
    let rep = Representation::unchecked(GroupKind::new(Family::GL, 2).unwrap(), vec![a, b]);
    let path = write_rep(dir.path(), "generic_complex.json", &rep);
    let out = cli(&["classify", path.to_str().unwrap(), "--involution", "phi1"]);
    assert_eq!(out.code, EXIT_PRECONDITION);
    let e = stderr_json(&out);
    assert_eq!(e["error"], "not-applicable");
    assert!(e["message"].as_str().unwrap().contains("not fixed"));
}

#[test]
fn check_reports_residuals() {
    let dir = TempDir::new().unwrap();
    let rep = harness::sample_real_form(RealFormTag::SpR(4), 2, 1).unwrap();
    let path = write_rep(dir.path(), "spr.json", &rep);
    let v = stdout_json(&cli(&["check", path.to_str().unwrap(), "--target", "Sp_R(4)"]));
    assert_eq!(v["passed"], true);
    assert_eq!(v["generators"].as_array().unwrap().len(), 2);
    let v = stdout_json(&cli(&["check", path.to_str().unwrap(), "--target", "Sp(4,0)"]));
    assert_eq!(v["passed"], false);
}

#[test]
fn reducible_classification() {
    let dir = TempDir::new().unwrap();
    let rep = Representation::unchecked(
        GroupKind::new(Family::GL, 2).unwrap(),
        vec![matcore::real_diag(&[2.0, 0.5])],
    );
    let path = write_rep(dir.path(), "split.json", &rep);
    let out = cli(&["classify", path.to_str().unwrap(), "--involution", "phi2"]);
    assert_eq!(out.code, EXIT_PRECONDITION);
    let v = stdout_json(&cli(&["classify", path.to_str().unwrap(), "--involution", "phi2", "--reducible"]));
    assert_eq!(v["tag"], "U");
    assert_eq!(v["params"], serde_json::json!([1, 1]));
    assert_eq!(v["blocks"].as_array().unwrap().len(), 1);
}

#[test]
fn decompose_hilbert90_and_kpq() {
    let dir = TempDir::new().unwrap();
    let h = matcore::from_real_rows(&[&[0.0, 1.0], &[1.0, 0.0]]);
    let path = write_json(dir.path(), "h.json", &serde_json::json!({"n": 2, "matrix": matrix_to_value(&h)}));
    let v = stdout_json(&cli(&["decompose", "hilbert90", path.to_str().unwrap()]));
    assert_eq!(v["c"], serde_json::json!([1.0, 1.0]));

    let k = matcore::real_diag(&[4.0, 0.25]);
    let path = write_json(dir.path(), "k.json", &serde_json::json!({"n": 2, "matrix": matrix_to_value(&k)}));
    let v = stdout_json(&cli(&["decompose", "kpq", path.to_str().unwrap()]));
    assert_eq!(v["signature"], serde_json::json!([2, 0]));

    let m: ComplexMatrix = matcore::real_diag(&[2.0, 0.5]);
    let path = write_json(
        dir.path(),
        "m.json",
        &serde_json::json!({"n": 2, "kind": "Sp", "matrix": matrix_to_value(&m)}),
    );
    let v = stdout_json(&cli(&["decompose", "polar", path.to_str().unwrap()]));
    assert_eq!(v["H"], matrix_to_value(&m));
}

#[test]
fn decompose_rejects_contract_violation() {
    let dir = TempDir::new().unwrap();
    let path = write_json(
        dir.path(),
        "bad.json",
        &serde_json::json!({"n": 2, "matrix": matrix_to_value(&matcore::identity(2))}),
    );
    let out = cli(&["decompose", "antisymp", path.to_str().unwrap()]);
    assert_eq!(out.code, EXIT_INVALID_INPUT);
    assert_eq!(stderr_json(&out)["error"], "contract");
}

#[test]
fn parse_errors_carry_pointers() {
    let dir = TempDir::new().unwrap();
    let path = write_json(
        dir.path(),
        "broken.json",
        &serde_json::json!({"kind": "GL", "n": 2, "generators": [[[1, 0], [0, 0], [0, 0], [1, "x"]]]}),
    );
    let out = cli(&["coords", path.to_str().unwrap()]);
    assert_eq!(out.code, EXIT_INVALID_INPUT);
    let e = stderr_json(&out);
    assert_eq!(e["error"], "parse");
    assert!(e["message"].as_str().unwrap().contains("/generators/0/3/1"));

    let out = cli(&["coords", dir.path().join("missing.json").to_str().unwrap()]);
    assert_eq!(out.code, EXIT_INVALID_INPUT);
    assert_eq!(stderr_json(&out)["error"], "io");
}

#[test]
fn tolerance_environment_and_flag() {
    let dir = TempDir::new().unwrap();
    let path = su2_scrambled(dir.path());
    let p = path.to_str().unwrap();
    let bad = run_with_env(["realform", "classify", p, "--involution", "phi2"], Some("nope"));
    assert_eq!(bad.code, EXIT_INVALID_INPUT);
    let ok = run_with_env(
        ["realform", "classify", p, "--involution", "phi2", "--tol", "1e-8"],
        Some("nope"),
    );
    assert_eq!(ok.code, EXIT_OK);
}

fn strip_elapsed(out: &str) -> Vec<Value> {
    out.lines()
        .map(|l| {
            let mut v: Value = serde_json::from_str(l).unwrap();
            v.as_object_mut().unwrap().remove("elapsed_ms");
            v
        })
        .collect()
}

#[test]
fn roundtrip_is_ordered_and_reproducible() {
    let args = ["roundtrip", "--tag", "SO_pq(2,1)", "--trials", "6", "--seed", "42"];
    let one = cli(&args);
    assert_eq!(one.code, EXIT_OK, "{}", one.stderr);
    let mut parallel_args = args.to_vec();
    parallel_args.extend(["--jobs", "3"]);
    let three = cli(&parallel_args);
    let a = strip_elapsed(&one.stdout);
    let b = strip_elapsed(&three.stdout);
    assert_eq!(a.len(), 6);
    assert_eq!(a, b);
    for v in &a {
        assert_eq!(v["status"], "pass");
    }
    assert_eq!(strip_elapsed(&cli(&args).stdout), a);
}

#[test]
fn binary_keeps_streams_separate() {
    let dir = TempDir::new().unwrap();
    let path = su2_scrambled(dir.path());
    let out = Command::new(env!("CARGO_BIN_EXE_realform"))
        .args(["classify", path.to_str().unwrap(), "--involution", "phi2"])
        .env_remove("REALFORM_TOL")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stderr.is_empty());
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["tag"], "SU");

    let out = Command::new(env!("CARGO_BIN_EXE_realform"))
        .args(["check", path.to_str().unwrap(), "--target", "bogus"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(EXIT_INVALID_INPUT));
    assert!(out.stdout.is_empty());
    let e: Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(e["exit_code"], EXIT_INVALID_INPUT);
}
