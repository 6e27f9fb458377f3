use std::fs;
use std::path::Path;
use std::process::{Command, Output};

const BIN: &str = env!("CARGO_BIN_EXE_ernst-theta");

const GENUS1: &str = "E1 = -1+2i\nF1 = -1-2i\np = 0\nq = 0.2i\n\
                      rho_min = 0.2\nrho_max = 3\nzeta_min = -2.5\nzeta_max = 2.5\nn_rho = 6\nn_zeta = 7\n";

fn run(args: &[&str], dir: &Path) -> Output {
    Command::new(BIN)
        .args(args)
        .current_dir(dir)
        .env_remove("ERNST_THETA_THREADS")
        .output()
        .unwrap()
}

fn config(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

#[test]
fn grid_csv_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(dir.path(), "g1.cfg", GENUS1);
    let a = run(&["--config", &cfg, "--grid", "--out", "a.csv", "--threads", "1"], dir.path());
    assert_eq!(a.status.code(), Some(0), "{}", String::from_utf8_lossy(&a.stderr));
    let b = Command::new(BIN)
        .args(["--config", &cfg, "--grid", "--out", "b.csv"])
        .env("ERNST_THETA_THREADS", "4")
        .current_dir(dir.path())
        .output()
        .unwrap();
    assert_eq!(b.status.code(), Some(0));
    let (a, b) = (
        fs::read(dir.path().join("a.csv")).unwrap(),
        fs::read(dir.path().join("b.csv")).unwrap(),
    );
    assert_eq!(a, b);
    let text = String::from_utf8(a).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("rho,zeta,re_E,im_E,e2U,A,k,ernst_residual,mask"));
    let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 42);
    for r in &rows {
        assert_eq!(r.len(), 9);
        assert_eq!(r[8], "0");
        assert!(r[7].parse::<f64>().unwrap() < 1e-7);
        assert_eq!(r[2], r[4], "e2U is the real part of E");
    }
    // ρ outer, ζ inner
    assert_eq!(rows[0][0], rows[6][0]);
    assert_ne!(rows[0][0], rows[7][0]);
}

#[test]
fn grid_to_stdout() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(dir.path(), "g1.cfg", GENUS1);
    let out = run(&["--config", &cfg], dir.path());
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(String::from_utf8(out.stdout).unwrap().lines().count(), 43);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let bad = config(dir.path(), "bad.cfg", "E1 = -1+2i\nF1 = -1-2i\nrho_min = 0\n");
    assert_eq!(run(&["--config", &bad, "--grid"], dir.path()).status.code(), Some(1));
    assert_eq!(run(&["--config", "missing.cfg"], dir.path()).status.code(), Some(1));
    let unreal = config(dir.path(), "unreal.cfg", "E1 = -1+2i\nF1 = -1-2i\np = 0.3i\nq = 0.2\n");
    assert_eq!(run(&["--config", &unreal], dir.path()).status.code(), Some(1));
    assert_eq!(run(&["--check", "--only", "nope"], dir.path()).status.code(), Some(1));

    let cfg = config(dir.path(), "g1.cfg", GENUS1);
    let strict = run(&["--config", &cfg, "--grid", "--tolerance", "1e-30", "--out", "s.csv"], dir.path());
    assert_eq!(strict.status.code(), Some(2));
}

#[test]
fn check_report() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["--check", "--out", "r.json"], dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let report: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join("r.json")).unwrap()).unwrap();
    assert_eq!(report["seed"], 42);
    assert_eq!(report["failed"], 0);
    let checks = report["checks"].as_array().unwrap();
    for name in ernst_theta::verify::CHECK_NAMES {
        assert!(checks.iter().any(|c| c["name"] == *name), "{name}");
    }
    for c in checks {
        assert!(c["residual"].as_f64().unwrap() >= 0.0);
        assert!(c["tolerance"].as_f64().unwrap() > 0.0);
        assert!(c["runtime"].as_f64().is_some());
    }
    let neg = checks.iter().find(|c| c["name"] == "negative_control").unwrap();
    assert!(neg["residual"].as_f64().unwrap() > 1e-4);
}

#[test]
fn single_check() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["--only", "fay_trisecant", "--seed", "9"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["seed"], 9);
    let checks = report["checks"].as_array().unwrap();
    assert!(!checks.is_empty());
    assert!(checks.iter().all(|c| c["name"] == "fay_trisecant"));
}

#[test]
fn check_report_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let strip = |o: Output| -> Vec<(String, f64)> {
        let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
        v["checks"]
            .as_array()
            .unwrap()
            .iter()
            .map(|c| (c["name"].to_string(), c["residual"].as_f64().unwrap()))
            .collect()
    };
    let a = strip(run(&["--check", "--seed", "5", "--threads", "2"], dir.path()));
    let b = strip(run(&["--check", "--seed", "5", "--threads", "3"], dir.path()));
    assert_eq!(a, b);
}
