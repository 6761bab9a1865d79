use std::path::Path;
use std::process::{Command, Output};

use qnm_core::evolution::Snapshot;

const BIN: &str = env!("CARGO_BIN_EXE_qnm");

fn qnm(args: &[&str]) -> Output {
    Command::new(BIN).args(args).env_remove("QNM_THREADS").output().unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn unknown_command_prints_usage_and_exits_2() {
    let o = qnm(&["frobnicate"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("Usage"));
}

#[test]
fn invalid_config_gives_a_line_numbered_diagnostic() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    std::fs::write(&cfg, "[blackhole]\nmass = 1.0\n\n[solver]\nmethod = \"newton\"\n").unwrap();
    let o = qnm(&[
        "--config",
        cfg.to_str().unwrap(),
        "horizons",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("run.toml:5:"), "{}", stderr(&o));

    std::fs::write(&cfg, "[blackhole]\ncharge = 1.2\n").unwrap();
    let o = qnm(&[
        "--config",
        cfg.to_str().unwrap(),
        "horizons",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("run.toml:2:"), "{}", stderr(&o));
}

#[test]
fn bad_thread_cap_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = Command::new(BIN)
        .args(["horizons", "--out", dir.path().to_str().unwrap()])
        .env("QNM_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
    let o = Command::new(BIN)
        .args(["horizons", "--out", dir.path().to_str().unwrap()])
        .env("QNM_THREADS", "1")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0));
}

#[test]
fn numerical_failure_exits_1_and_still_writes_a_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let o = qnm(&[
        "evolve",
        "--bump",
        "5000:2",
        "--T",
        "1",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(1), "{}", stderr(&o));
    let m: serde_json::Value =
        serde_json::from_slice(&std::fs::read(dir.path().join("evolve.manifest.json")).unwrap()).unwrap();
    assert!(m["summary"]["error"].is_string());
}

#[test]
fn config_file_values_reach_the_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    std::fs::write(&cfg, "[blackhole]\nmass = 1.0\ncharge = 0.3\nlambda = 0.04\n").unwrap();
    let o = qnm(&[
        "--config",
        cfg.to_str().unwrap(),
        "--json",
        "horizons",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let m: serde_json::Value =
        serde_json::from_slice(&std::fs::read(dir.path().join("horizons.manifest.json")).unwrap()).unwrap();
    assert_eq!(m["config"]["blackhole"]["charge"], 0.3);
    assert_eq!(m["version"], env!("CARGO_PKG_VERSION"));
    assert_eq!(m["outputs"], serde_json::json!(["horizons.csv", "horizons.json"]));
    let rows: serde_json::Value =
        serde_json::from_slice(&std::fs::read(dir.path().join("horizons.json")).unwrap()).unwrap();
    assert_eq!(rows.as_array().unwrap().len(), 4);
}

fn read_lines(path: &Path) -> Vec<String> {
    std::fs::read_to_string(path)
        .unwrap()
        .lines()
        .map(str::to_string)
        .collect()
}

#[test]
fn asymptotic_lattice_has_mirror_pairs() {
    let dir = tempfile::tempdir().unwrap();
    let o = qnm(&[
        "asymptotic-qnm",
        "--two_l",
        "1..19",
        "--k",
        "0..2",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert!(o.status.success());
    let lines = read_lines(&dir.path().join("asymptotic.csv"));
    assert_eq!(lines[0], "k,two_l,order,re,im,mirror,multiplicity");
    assert_eq!(lines.len(), 1 + 60);
}

#[test]
fn evolve_writes_trace_and_snapshots() {
    let dir = tempfile::tempdir().unwrap();
    let o = qnm(&[
        "evolve",
        "--two_l",
        "19",
        "--T",
        "10",
        "--dx",
        "0.1",
        "--snapshots",
        "50",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let trace = read_lines(&dir.path().join("trace.csv"));
    assert_eq!(trace[0], "t,global,local");
    let bytes = std::fs::read(dir.path().join("snapshot_0001.bin")).unwrap();
    assert_eq!(&bytes[..8], b"QNMSNAP1");
    let snap = Snapshot::from_bytes(&bytes).unwrap();
    assert!((snap.t - 5.0).abs() < 1e-9 && snap.dx == 0.1);
    assert_eq!(bytes.len(), 32 + 32 * snap.field.len());
}
