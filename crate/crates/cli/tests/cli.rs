use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use std::sync::atomic::{AtomicUsize, Ordering};

static COUNTER: AtomicUsize = AtomicUsize::new(0);

fn scratch(tag: &str) -> PathBuf {
    let n = COUNTER.fetch_add(1, Ordering::SeqCst);
    let dir = std::env::temp_dir().join(format!("boussinesq-cli-{}-{tag}-{n}", std::process::id()));
    let _ = fs::remove_dir_all(&dir);
    fs::create_dir_all(&dir).unwrap();
    dir
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_boussinesq")).args(args).arg("--quiet").output().unwrap()
}

fn write_config(dir: &Path, json: &str) -> String {
    let p = dir.join("config.in.json");
    fs::write(&p, json).unwrap();
    p.to_string_lossy().into_owned()
}

const SMALL: &str = r#"{
  "schema": "boussinesq-run/1",
  "grid": { "dim": 2, "n": 16, "box_length": 6.283185307179586 },
  "data": {
    "temperature": { "kind": "zero" },
    "velocity": { "kind": "zero" },
    "truncation": null,
    "cutoff": null
  },
  "solver": { "c_r": 1e-7, "time": { "horizon": 1.0, "intervals": 16, "graded": true } },
  "probes": { "n": 16, "horizon": 1.0, "intervals": 8, "ensemble": 4, "lambdas": [1.0, 2.0, 4.0, 8.0, 16.0] },
  "besov": { "corpus": 3, "p": 3.0, "r": 2.0, "s": [] }
}"#;

#[test]
fn inadmissible_exponents_exit_one() {
    let dir = scratch("inadmissible");
    let cfg = write_config(&dir, r#"{ "schema": "boussinesq-run/1", "solver": { "p": 1.5 } }"#);
    let out = run(&["simulate", "--config", &cfg, "--out", dir.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("p < dr/(2r-1)"), "{err}");
}

#[test]
fn coarse_probe_grid_exits_one() {
    let dir = scratch("coarse");
    let cfg = write_config(&dir, r#"{ "schema": "boussinesq-run/1", "probes": { "n": 8 } }"#);
    let out = run(&["verify-ops", "--config", &cfg, "--out", dir.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("cannot resolve ensemble modes"), "{err}");
}

#[test]
fn unknown_key_exits_one() {
    let dir = scratch("unknown");
    let cfg = write_config(&dir, r#"{ "schema": "boussinesq-run/1", "grdi": {} }"#);
    let out = run(&["config", "--config", &cfg]);
    assert_eq!(out.status.code(), Some(1));
    let missing = dir.join("absent.json");
    let out = run(&["config", "--config", missing.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn config_round_trips() {
    let out = run(&["config", "--seed", "9"]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["seed"], 9);
    assert_eq!(v["schema"], "boussinesq-run/1");
}

#[test]
fn simulate_zero_data_then_report() {
    let dir = scratch("simulate");
    let cfg = write_config(&dir, SMALL);
    let out_dir = dir.join("sim");
    let out = run(&["simulate", "--config", &cfg, "--out", out_dir.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8_lossy(&out.stdout).contains("status: converged"));
    for f in ["history.json", "convergence.csv", "ledger.csv", "theorem_ledger.csv", "config.json", "snapshots/u_T.bin"] {
        assert!(out_dir.join(f).exists(), "{f}");
    }
    let mut rdr = csv::Reader::from_path(out_dir.join("theorem_ledger.csv")).unwrap();
    let mut rows = 0;
    for rec in rdr.records() {
        let rec = rec.unwrap();
        assert_eq!(rec[2].parse::<f64>().unwrap(), 0.0);
        assert_eq!(rec[4].parse::<f64>().unwrap(), 0.0);
        rows += 1;
    }
    assert_eq!(rows, 4);
    let out = run(&["report", "--out", dir.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    for f in ["report/runs.csv", "report/constants.csv", "report/constants.gp"] {
        assert!(dir.join(f).exists(), "{f}");
    }
}

#[test]
fn verify_ops_is_deterministic() {
    let dir = scratch("verify");
    let cfg = write_config(&dir, SMALL);
    let (a, b) = (dir.join("a"), dir.join("b"));
    for d in [&a, &b] {
        let out = run(&["verify-ops", "--config", &cfg, "--out", d.to_str().unwrap()]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    }
    for f in ["checks.csv", "probes.csv", "slopes.csv", "damped.csv"] {
        assert_eq!(fs::read(a.join(f)).unwrap(), fs::read(b.join(f)).unwrap(), "{f}");
    }
}

#[test]
fn besov_corpus_runs() {
    let dir = scratch("besov");
    let cfg = write_config(&dir, SMALL);
    let out = run(&["besov", "--config", &cfg, "--out", dir.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let mut rdr = csv::Reader::from_path(dir.join("besov.csv")).unwrap();
    let n = rdr.records().count();
    assert_eq!(n, 9);
}
