//! End-to-end CLI behavior: file formats and exit codes.

use std::process::Command;

fn lastpc(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_lastpc")).args(args).output().unwrap()
}

#[test]
fn empty_csv_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("empty.csv");
    std::fs::write(&path, "").unwrap();
    let out = lastpc(&["discover", "tabular", "--input", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn malformed_csv_reports_line_number() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.csv");
    std::fs::write(&path, "x,y\n1.0,2.0\n3.0,oops\n").unwrap();
    let out = lastpc(&["discover", "tabular", "--input", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains(":3"), "stderr: {err}");
}

#[test]
fn planted_law_csv_recovers_two_to_one() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("law.csv");
    let mut csv = String::from("x,y\n");
    for i in 0..20 {
        let x = 0.3 * i as f64 + 1.0;
        csv.push_str(&format!("{x},{}\n", 2.0 * x));
    }
    std::fs::write(&path, csv).unwrap();
    let out = lastpc(&["discover", "tabular", "--input", path.to_str().unwrap()]);
    assert!(out.status.success());
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let rounded = &report["selected"]["integerized"]["rounded"];
    assert_eq!(rounded[0].as_i64().unwrap(), 2);
    assert_eq!(rounded[1].as_i64().unwrap(), -1);
    let sd = report["selected"]["constant"]["per_case_sd"].as_f64().unwrap();
    assert!(sd < 1e-9, "constant dispersion {sd}");
}

#[test]
fn scale_line_and_labels_are_parsed() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("scaled.csv");
    std::fs::write(&path, "x,y\n#scale: 10, 1\nfirst,1.0,2.0\nsecond,2.0,3.5\nthird,3.0,5.2\n")
        .unwrap();
    let out = lastpc(&[
        "discover", "tabular", "--input", path.to_str().unwrap(), "--log-si",
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn missing_pair_field_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let stack = dir.path().join("stack");
    let gen = lastpc(&["gen-stack", stack.to_str().unwrap(), "--nlat", "3", "--nlon", "4", "--ntime", "20"]);
    assert!(gen.status.success());
    let out = lastpc(&[
        "discover", "gridded", stack.to_str().unwrap(), "--pair", "T_v,Nope",
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn unknown_plot_kind_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("r.json");
    let demo = lastpc(&["demo", "--seed", "1", "--out", report.to_str().unwrap()]);
    assert!(demo.status.success());
    let out = lastpc(&[
        "emit-plotdata", report.to_str().unwrap(), "--which", "volcano",
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn log_si_rejects_nonpositive_values_with_case_context() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("neg.csv");
    std::fs::write(&path, "x,y\n1.0,2.0\n-3.0,4.0\n").unwrap();
    let out = lastpc(&["discover", "tabular", "--input", path.to_str().unwrap(), "--log-si"]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains('x'), "stderr: {err}");
}
