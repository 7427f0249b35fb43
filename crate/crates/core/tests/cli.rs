use std::path::{Path, PathBuf};
use std::process::Command;

use cic_core::cli::main_with_args;
use cic_core::incsim::SwitchedSystem;
use cic_core::json;
use cic_core::matrix::c;
use cic_core::ratfun::{Polynomial, Rational, RationalMatrixFunction};
use cic_core::realize::{r_h, RealizationArray};
use cic_core::ComplexMatrix;
use serde_json::Value;
use tempfile::TempDir;

fn write<T: serde::Serialize>(dir: &Path, name: &str, v: &T) -> String {
    let path = dir.join(name);
    std::fs::write(&path, json::to_string(v).unwrap()).unwrap();
    path.to_string_lossy().into_owned()
}

fn run(dir: &Path, args: &[&str]) -> (i32, Value) {
    let out: PathBuf = dir.join("out.json");
    let mut full = vec!["cic", "--out", out.to_str().unwrap()];
    full.extend_from_slice(args);
    let code = main_with_args(full);
    let text = std::fs::read_to_string(&out).unwrap();
    (code, serde_json::from_str(&text).unwrap())
}

fn status(v: &Value) -> &str {
    v["status"].as_str().unwrap()
}

fn real(rows: usize, cols: usize, data: &[f64]) -> ComplexMatrix {
    ComplexMatrix::from_real_rows(rows, cols, data).unwrap()
}

#[test]
fn sign_payload_round_trips() {
    let dir = TempDir::new().unwrap();
    let a = real(2, 2, &[1.0, 3.0, 0.0, -2.0]);
    let m = write(dir.path(), "a.json", &a);
    let (code, v) = run(dir.path(), &["sign", "--matrix", &m]);
    assert_eq!(code, 0);
    assert_eq!(status(&v), "ok");
    let e: ComplexMatrix = serde_json::from_value(v["payload"].clone()).unwrap();
    let want = real(2, 2, &[1.0, 2.0, 0.0, -1.0]);
    assert!(e.max_abs_diff(&want) < 1e-12);
}

#[test]
fn cone_check_and_witness() {
    let dir = TempDir::new().unwrap();
    let inside = write(dir.path(), "in.json", &real(2, 2, &[1.0, 5.0, -5.0, 1.0]));
    let outside = write(
        dir.path(),
        "out_b.json",
        &real(2, 2, &[-1.0, 0.0, 0.0, 2.0]),
    );
    let (_, v) = run(dir.path(), &["cone", "check", "--matrix", &inside]);
    assert_eq!(status(&v), "ok");
    let (_, v) = run(dir.path(), &["cone", "check", "--matrix", &outside]);
    assert_eq!(status(&v), "refuted");
    let (code, v) = run(dir.path(), &["cone", "witness", "--matrix", &outside]);
    assert_eq!(code, 0);
    assert_eq!(status(&v), "ok");
}

#[test]
fn kyp_verify_search_and_refute() {
    let dir = TempDir::new().unwrap();
    let rh = write(dir.path(), "rh.json", &r_h(1.0, 4.0, 2.0).unwrap());
    let (_, v) = run(dir.path(), &["real", "kyp", "--realization", &rh]);
    assert_eq!(status(&v), "ok");
    let (_, v) = run(
        dir.path(),
        &["real", "kyp", "--realization", &rh, "--search"],
    );
    assert_eq!(status(&v), "ok");
    // (1 - s)/(1 + s) is not positive real
    let allpass = RealizationArray::from_real(1, 1, &[-1.0], &[1.0], &[2.0], &[-1.0]).unwrap();
    let ap = write(dir.path(), "ap.json", &allpass);
    let (code, v) = run(
        dir.path(),
        &["real", "kyp", "--realization", &ap, "--search"],
    );
    assert_eq!(code, 0);
    assert_eq!(status(&v), "infeasible");
}

#[test]
fn pr_check_and_eval() {
    let dir = TempDir::new().unwrap();
    let f = RationalMatrixFunction::scalar(
        Rational::new(
            Polynomial::new(vec![1.0, -1.0]),
            Polynomial::new(vec![1.0, 1.0]),
        )
        .unwrap(),
    );
    let path = write(dir.path(), "f.json", &f);
    let (_, v) = run(dir.path(), &["pr", "check", "--function", &path]);
    assert_eq!(status(&v), "refuted");

    let rh = write(dir.path(), "rh.json", &r_h(1.0, 4.0, 2.0).unwrap());
    let (_, v) = run(
        dir.path(),
        &["real", "eval", "--realization", &rh, "--at", "1,0"],
    );
    let fs: ComplexMatrix = serde_json::from_value(v["payload"].clone()).unwrap();
    assert!((fs[(0, 0)] - c(4.0, 0.0)).norm() < 1e-12);
}

#[test]
fn cic_sample_is_deterministic() {
    let dir = TempDir::new().unwrap();
    let args = [
        "--seed",
        "17",
        "pr",
        "cic-sample",
        "--depth",
        "4",
        "--count",
        "3",
    ];
    let (_, a) = run(dir.path(), &args);
    let (_, b) = run(dir.path(), &args);
    assert_eq!(status(&a), "ok");
    assert_eq!(a["payload"], b["payload"]);
}

#[test]
fn simulation_writes_csv() {
    let dir = TempDir::new().unwrap();
    let sys = SwitchedSystem::new(
        vec![
            real(2, 2, &[-1.0, 2.0, -2.0, -1.0]),
            real(2, 2, &[-0.5, 0.0, 0.0, -3.0]),
        ],
        None,
    )
    .unwrap();
    let s = write(dir.path(), "sys.json", &sys);
    let csv = dir.path().join("traj.csv");
    let (code, v) = run(
        dir.path(),
        &[
            "sim",
            "run",
            "--system",
            &s,
            "--x0",
            "1,-1",
            "--horizon",
            "1",
            "--dt",
            "0.01",
            "--csv",
            csv.to_str().unwrap(),
        ],
    );
    assert_eq!(code, 0, "{v}");
    assert_eq!(status(&v), "ok");
    let text = std::fs::read_to_string(&csv).unwrap();
    assert!(text.starts_with("t,"));
    assert_eq!(text.lines().count(), 102);
}

#[test]
fn runtime_and_parse_errors() {
    let dir = TempDir::new().unwrap();
    let (code, v) = run(dir.path(), &["sign", "--matrix", "/nonexistent.json"]);
    assert_eq!(code, 1);
    assert_eq!(status(&v), "error");

    let bin = env!("CARGO_BIN_EXE_cic");
    let out = Command::new(bin)
        .args(["cone", "--bogus"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(status(&v), "error");
}

#[test]
fn binary_prints_envelope() {
    let dir = TempDir::new().unwrap();
    let m = write(dir.path(), "a.json", &real(1, 1, &[-2.0]));
    let out = Command::new(env!("CARGO_BIN_EXE_cic"))
        .args(["sign", "--matrix", &m])
        .output()
        .unwrap();
    assert!(out.status.success());
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["payload"]["rows"], 1);
}
