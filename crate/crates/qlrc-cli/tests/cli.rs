//! End-to-end runs of the binary: exit codes, certificate files, tables.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use qlrc::certificate::{canonical_json, certificate_from_json, validate_certificate};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qlrc"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout_of(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).expect("utf-8 stdout")
}

fn stderr_of(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).expect("utf-8 stderr")
}

fn write_code(dir: &Path, name: &str, json: &str) -> String {
    let path = dir.join(name);
    fs::write(&path, json).unwrap();
    path.to_str().unwrap().to_string()
}

const EVEN_CODE: &str = r#"{"q": 2, "generator": [[1,1,0,0],[0,1,1,0],[0,0,1,1]]}"#;
const SELF_DUAL_CODE: &str = r#"{"q": 2, "generator": [[1,1,0,0],[0,0,1,1]]}"#;

#[test]
fn build_writes_a_valid_canonical_certificate() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("cert.json");
    let out = run(&[
        "build",
        "cyclic-1",
        "--q",
        "13",
        "--u",
        "1",
        "--r",
        "3",
        "--l",
        "1",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "stderr: {}", stderr_of(&out));
    let text = fs::read_to_string(&path).unwrap();
    let cert = certificate_from_json(&text).unwrap();
    validate_certificate(&cert).unwrap();
    let quantum = cert.quantum.as_ref().unwrap();
    assert_eq!(
        (quantum.n, quantum.kappa, quantum.delta),
        (4, 2, 2),
        "cyclic-1 at q=13, u=1, r=3, l=1"
    );
    assert_eq!(canonical_json(&cert).unwrap(), text, "on-disk form is canonical");
}

#[test]
fn build_emits_to_stdout() {
    let out = run(&[
        "build", "grs-pair", "--q", "7", "--d", "3", "--u", "1", "--r", "4",
    ]);
    assert!(out.status.success(), "stderr: {}", stderr_of(&out));
    let cert = certificate_from_json(&stdout_of(&out)).unwrap();
    validate_certificate(&cert).unwrap();
    let quantum = cert.quantum.as_ref().unwrap();
    assert_eq!((quantum.n, quantum.kappa, quantum.delta), (5, 1, 3));
    assert_eq!(cert.parameters["d"], 3);
    assert!(!cert.reports.is_empty(), "certified build carries reports");
}

#[test]
fn build_guard_failure_exits_two() {
    let out = run(&["build", "cyclic-2", "--q", "13", "--u", "3", "--r", "5"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr_of(&out).contains("guard"), "stderr: {}", stderr_of(&out));
}

#[test]
fn usage_error_exits_one() {
    let out = run(&["build", "grs-pair", "--q", "7"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn certify_classical_code() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_code(dir.path(), "even.json", EVEN_CODE);
    let out = run(&["certify", &path, "--r", "3"]);
    assert!(out.status.success(), "stderr: {}", stderr_of(&out));
    let cert = certificate_from_json(&stdout_of(&out)).unwrap();
    validate_certificate(&cert).unwrap();
    assert!(cert.quantum.is_none(), "classical run has no quantum section");
    assert_eq!(cert.codes.len(), 1);
    assert_eq!(cert.locality[0].r, 3);
    assert!(!cert.reports.is_empty());
}

#[test]
fn certify_refuses_unreachable_locality() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_code(dir.path(), "even.json", EVEN_CODE);
    let out = run(&["certify", &path, "--r", "1"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr_of(&out).contains("no repair set"));
}

#[test]
fn certify_self_composes_one_code() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_code(dir.path(), "even.json", EVEN_CODE);
    let out = run(&["certify", &path, "--r", "3", "--quantum"]);
    assert!(out.status.success(), "stderr: {}", stderr_of(&out));
    let cert = certificate_from_json(&stdout_of(&out)).unwrap();
    validate_certificate(&cert).unwrap();
    let quantum = cert.quantum.as_ref().unwrap();
    assert_eq!((quantum.n, quantum.kappa, quantum.delta), (4, 2, 2));
    assert!(cert.optimal.is_some(), "pure certified run reports optimality");
}

#[test]
fn certify_composes_two_codes() {
    let dir = tempfile::tempdir().unwrap();
    let first = write_code(dir.path(), "c1.json", SELF_DUAL_CODE);
    let second = write_code(dir.path(), "c2.json", EVEN_CODE);
    let out = run(&["certify", &first, &second, "--r", "3", "--quantum"]);
    assert!(out.status.success(), "stderr: {}", stderr_of(&out));
    let cert = certificate_from_json(&stdout_of(&out)).unwrap();
    validate_certificate(&cert).unwrap();
    let quantum = cert.quantum.as_ref().unwrap();
    assert_eq!((quantum.n, quantum.kappa, quantum.delta), (4, 1, 2));
}

#[test]
fn certify_rejects_malformed_json() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_code(dir.path(), "bad.json", "not json");
    let out = run(&["certify", &path, "--r", "3"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr_of(&out).contains("bad.json"));
}

#[test]
fn exhausted_budget_exits_three() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_code(dir.path(), "even.json", EVEN_CODE);
    let out = run(&["certify", &path, "--r", "3", "--budget", "4"]);
    assert_eq!(out.status.code(), Some(3));
    assert!(stderr_of(&out).contains("budget"));
}

#[test]
fn config_file_sets_the_budget() {
    let dir = tempfile::tempdir().unwrap();
    let code = write_code(dir.path(), "even.json", EVEN_CODE);
    let config = write_code(dir.path(), "qlrc.conf", "budget=4\nthreads=1\n");
    let out = run(&["certify", &code, "--r", "3", "--config", &config]);
    assert_eq!(out.status.code(), Some(3), "config budget of 4 words starves the oracle");
}

#[test]
fn config_rejects_unknown_keys() {
    let dir = tempfile::tempdir().unwrap();
    let code = write_code(dir.path(), "even.json", EVEN_CODE);
    let config = write_code(dir.path(), "qlrc.conf", "color=always\n");
    let out = run(&["certify", &code, "--r", "3", "--config", &config]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr_of(&out).contains("unknown key"));
}

#[test]
fn bounds_eval_prints_the_quantum_table() {
    let out = run(&["bounds", "eval", "--n", "12", "--kappa", "6", "--r", "5"]);
    assert!(out.status.success());
    let text = stdout_of(&out);
    assert!(text.contains("2 delta <= 6, delta <= 3"), "stdout: {text}");
    assert!(text.contains("Q-Singleton-dim: delta 1"));
    assert!(text.contains("Q-Singleton-dim: delta 3"));
}

#[test]
fn bounds_eval_prints_classical_reports() {
    let out = run(&[
        "bounds", "eval", "--n", "4", "--k", "3", "--r", "3", "--q", "13", "--d", "2",
    ]);
    assert!(out.status.success());
    let text = stdout_of(&out);
    assert!(text.contains("C-Singleton: n 4 k 3 r 3 -> d <= 2"), "stdout: {text}");
    assert!(text.contains("meets-with-equality"));
    assert!(text.contains("C-CM"));
    assert!(text.contains("k <= 3"));
}

#[test]
fn bounds_eval_needs_a_dimension() {
    let out = run(&["bounds", "eval", "--n", "12", "--r", "5"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn bounds_asymptotic_emits_the_default_grid() {
    let out = run(&["bounds", "asymptotic", "--r", "2", "--q", "2"]);
    assert!(out.status.success());
    let text = stdout_of(&out);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 52, "header plus 51 grid rows");
    assert_eq!(lines[0], "delta,r_dim,r_dist,r_cm");
    assert_eq!(
        lines[1],
        "0.000000000000,0.444444444444,0.500000000000,0.500000000000"
    );
}

#[test]
fn selftest_passes() {
    let out = run(&["selftest"]);
    assert!(out.status.success(), "stderr: {}", stderr_of(&out));
    let text = stdout_of(&out);
    assert!(text.contains("all self-checks passed"), "stdout: {text}");
}
