//! End-to-end checks of the qrkit binary: exit codes, file formats,
//! determinism, and the sweep row-count contract.

use std::path::Path;
use std::process::{Command, Output};

fn qrkit(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qrkit"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn read(path: &Path) -> String {
    std::fs::read_to_string(path).expect("output file exists")
}

#[test]
fn gen_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.mtx");
    let b = dir.path().join("b.mtx");
    for out in [&a, &b] {
        let st = qrkit(&[
            "gen", "--kind", "svd", "--m", "64", "--n", "8", "--kappa", "1e6", "--seed", "7",
            "--out", out.to_str().unwrap(),
        ]);
        assert!(st.status.success());
    }
    assert_eq!(read(&a), read(&b));
    assert!(read(&a).starts_with("%%MatrixMarket matrix array real general"));
}

#[test]
fn gen_hilbert_has_all_entries() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("h12.mtx");
    let st = qrkit(&["gen", "--kind", "hilbert", "--n", "12", "--out", out.to_str().unwrap()]);
    assert!(st.status.success());
    let body = read(&out);
    let values = body
        .lines()
        .filter(|l| !l.starts_with('%'))
        .skip(1)
        .count();
    assert_eq!(values, 144);
}

#[test]
fn gen_rejects_wide() {
    let st = qrkit(&[
        "gen", "--kind", "svd", "--m", "4", "--n", "8", "--kappa", "1e4", "--out", "/tmp/x.mtx",
    ]);
    assert_eq!(st.status.code(), Some(2));
    let err = String::from_utf8_lossy(&st.stderr);
    assert!(err.contains("m must be >= n"), "stderr: {err}");
}

#[test]
fn run_unknown_algorithm_exits_3() {
    let st = qrkit(&["run", "--kind", "hilbert", "--n", "4", "--algo", "xyz"]);
    assert_eq!(st.status.code(), Some(3));
}

#[test]
fn run_missing_file_exits_2() {
    let st = qrkit(&["run", "--kind", "file", "--in", "/nonexistent/m.mtx", "--algo", "iscqr3"]);
    assert_eq!(st.status.code(), Some(2));
}

#[test]
fn run_breakdown_is_exit_zero_with_status() {
    // plain CholeskyQR must break down at kappa 1e12
    let st = qrkit(&[
        "run", "--kind", "svd", "--m", "128", "--n", "16", "--kappa", "1e12", "--seed", "1",
        "--algo", "cholqr2", "--repeats", "3",
    ]);
    assert!(st.status.success());
    let out = String::from_utf8_lossy(&st.stdout);
    assert!(out.contains("breakdown_stage1"), "stdout: {out}");
}

#[test]
fn run_roundtrips_through_matrix_market() {
    let dir = tempfile::tempdir().unwrap();
    let mtx = dir.path().join("m.mtx");
    assert!(qrkit(&[
        "gen", "--kind", "svd", "--m", "48", "--n", "6", "--kappa", "1e4", "--seed", "3",
        "--out", mtx.to_str().unwrap(),
    ])
    .status
    .success());
    let st = qrkit(&[
        "run", "--kind", "file", "--in", mtx.to_str().unwrap(), "--algo", "iscqr3",
        "--repeats", "3", "--json",
    ]);
    assert!(st.status.success());
    let line = String::from_utf8_lossy(&st.stdout);
    let v: serde_json::Value = serde_json::from_str(line.trim()).expect("valid json line");
    assert_eq!(v["status"], "ok");
    assert_eq!(v["m"], 48);
    assert!(v["orth_fro"].as_f64().unwrap() < 1e-12);
}

#[test]
fn csv_header_is_pinned() {
    let st = qrkit(&[
        "run", "--kind", "hilbert", "--n", "6", "--algo", "hhqr", "--repeats", "3",
    ]);
    assert!(st.status.success());
    let out = String::from_utf8_lossy(&st.stdout);
    assert_eq!(
        out.lines().next().unwrap(),
        "algorithm,m,n,kappa_target,seed,shift_s,p,orth_fro,resid_fro,kappa_q,time_ms,status,trial_index"
    );
}

#[test]
fn sweep_row_count_is_exact_despite_failures() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("sweep.csv");
    // kappa 1e12 makes cholqr2 break down; rows must still appear
    let st = qrkit(&[
        "sweep", "--vary", "kappa", "--values", "1e4,1e12", "--m", "96", "--n", "8",
        "--algos", "iscqr3,cholqr2", "--trials", "3", "--base-seed", "5", "--repeats", "3",
        "--out", out.to_str().unwrap(),
    ]);
    assert!(st.status.success());
    let body = read(&out);
    let rows: Vec<&str> = body.lines().skip(1).collect();
    assert_eq!(rows.len(), 2 * 2 * 3);
    assert!(rows.iter().any(|r| r.contains("breakdown_stage1")));
    // per-trial seeds are base_seed + trial_index
    assert!(rows.iter().any(|r| r.starts_with("iscqr3") && r.contains(",7,")));
}

#[test]
fn sweep_empty_values_exits_2() {
    let st = qrkit(&[
        "sweep", "--vary", "kappa", "--values", "", "--algos", "iscqr3",
    ]);
    assert_eq!(st.status.code(), Some(2));
}

#[test]
fn sweep_unknown_algo_exits_3() {
    let st = qrkit(&[
        "sweep", "--vary", "kappa", "--values", "1e4", "--algos", "iscqr3,bogus",
    ]);
    assert_eq!(st.status.code(), Some(3));
}

#[test]
fn pvalue_all_ones_is_half() {
    let dir = tempfile::tempdir().unwrap();
    let mtx = dir.path().join("ones.mtx");
    let mut text = String::from("%%MatrixMarket matrix array real general\n100 4\n");
    for _ in 0..400 {
        text.push_str("1.0\n");
    }
    std::fs::write(&mtx, text).unwrap();
    let st = qrkit(&["pvalue", "--kind", "file", "--in", mtx.to_str().unwrap()]);
    assert!(st.status.success());
    let out = String::from_utf8_lossy(&st.stdout);
    assert!(out.contains("p       = 0.500000"), "stdout: {out}");
}

#[test]
fn pvalue_identity_is_one() {
    let dir = tempfile::tempdir().unwrap();
    let mtx = dir.path().join("eye.mtx");
    let mut text = String::from("%%MatrixMarket matrix coordinate real general\n5 5 5\n");
    for i in 1..=5 {
        text.push_str(&format!("{i} {i} 1.0\n"));
    }
    std::fs::write(&mtx, text).unwrap();
    let st = qrkit(&["pvalue", "--kind", "file", "--in", mtx.to_str().unwrap()]);
    assert!(st.status.success());
    let out = String::from_utf8_lossy(&st.stdout);
    assert!(out.contains("p       = 1.000000"), "stdout: {out}");
}

#[test]
fn bounds_prints_report() {
    let st = qrkit(&["bounds", "--m", "2048", "--n", "64", "--kappa", "1e12", "--p", "0.25"]);
    assert!(st.status.success());
    let out = String::from_utf8_lossy(&st.stdout);
    assert!(out.contains("kappa_sufficient"));
    assert!(out.contains("orth_bound_scqr3"));
}

#[test]
fn thread_cap_env_is_honored() {
    let st = Command::new(env!("CARGO_BIN_EXE_qrkit"))
        .env("QRKIT_THREADS", "1")
        .args(["run", "--kind", "hilbert", "--n", "8", "--algo", "iscqr3", "--repeats", "3"])
        .output()
        .unwrap();
    assert!(st.status.success());
    let bad = Command::new(env!("CARGO_BIN_EXE_qrkit"))
        .env("QRKIT_THREADS", "zero")
        .args(["run", "--kind", "hilbert", "--n", "8", "--algo", "iscqr3"])
        .output()
        .unwrap();
    assert_eq!(bad.status.code(), Some(2));
}
