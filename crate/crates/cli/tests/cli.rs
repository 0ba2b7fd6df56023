use std::fs;
use std::path::Path;
use std::process::Command;

use salt_cli::{dispatch, EXIT_FAIL, EXIT_PASS, EXIT_USAGE};

fn run(args: &[&str], out: &Path) -> i32 {
    let mut argv = vec!["salt", "-q"];
    argv.extend_from_slice(args);
    argv.extend_from_slice(&["--out", out.to_str().unwrap()]);
    dispatch(argv)
}

fn write_config(dir: &Path, text: &str) -> String {
    let p = dir.join("run.toml");
    fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

fn json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn usage_errors_exit_two() {
    let tmp = tempfile::tempdir().unwrap();
    assert_eq!(dispatch(["salt", "bogus"]), EXIT_USAGE);
    assert_eq!(dispatch(["salt", "info", "--monitor", "W"]), EXIT_USAGE);
    let cfg = write_config(tmp.path(), "resolution = 32\nturbulence = 3\n");
    assert_eq!(run(&["info", "--config", &cfg], &tmp.path().join("a")), EXIT_USAGE);
    let cfg = write_config(tmp.path(), "threshold = 0.5\n");
    assert_eq!(run(&["simulate", "--config", &cfg], &tmp.path().join("b")), EXIT_USAGE);
    assert_eq!(run(&["info", "--config", "/nonexistent/run.toml"], &tmp.path().join("c")), EXIT_USAGE);
    assert!(!tmp.path().join("a").exists());
}

#[test]
fn help_and_version_exit_zero() {
    assert_eq!(dispatch(["salt", "--help"]), EXIT_PASS);
    assert_eq!(dispatch(["salt", "--version"]), EXIT_PASS);
}

#[test]
fn taylor_green_passes_and_writes_artifacts() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "horizon = 0.3\nthreshold = 2.0\ninitial_amplitude = 3.0\nsnapshot_every = 100\n");
    let out = tmp.path().join("tg");
    assert_eq!(run(&["taylor-green", "--config", &cfg], &out), EXIT_PASS);
    let report = json(&out.join("report.json"));
    assert_eq!(report["pass"], true);
    let s = report["analytic_crossing"].as_f64().unwrap();
    let t = report["trigger_time"].as_f64().unwrap();
    assert!((s - t).abs() <= 2e-3);
    let norms = fs::read_to_string(out.join("norms.csv")).unwrap();
    assert!(norms.starts_with("# salt-csv v1 norms\ntime,n0,"));
    assert!(norms.lines().last().unwrap().ends_with(",1"));
    let manifest = json(&out.join("manifest.json"));
    let listed: Vec<&str> = manifest["files"]
        .as_array()
        .unwrap()
        .iter()
        .map(|f| f["path"].as_str().unwrap())
        .collect();
    for f in ["config.resolved.toml", "ensemble.bin", "norms.csv", "snapshots/step_00000000.bin", "summary.txt"] {
        assert!(listed.contains(&f), "{f} missing from {listed:?}");
    }
    let echoed = fs::read_to_string(out.join("config.resolved.toml")).unwrap();
    assert!(echoed.contains("initial_amplitude = 3.0"));
    assert!(echoed.contains("paths = 16"));
}

#[test]
fn resolved_config_reruns_identically() {
    let tmp = tempfile::tempdir().unwrap();
    let a = tmp.path().join("a");
    let cfg = write_config(tmp.path(), "horizon = 0.05\nxi_count = 2\ninitial = \"random\"\n");
    assert_eq!(run(&["simulate", "--config", &cfg, "--seed", "3"], &a), EXIT_PASS);
    let b = tmp.path().join("b");
    let resolved = a.join("config.resolved.toml");
    assert_eq!(run(&["simulate", "--config", resolved.to_str().unwrap()], &b), EXIT_PASS);
    for f in ["norms.csv", "report.json", "ensemble.bin", "manifest.json", "config.resolved.toml"] {
        assert_eq!(fs::read(a.join(f)).unwrap(), fs::read(b.join(f)).unwrap(), "{f}");
    }
    let c = tmp.path().join("c");
    assert_eq!(run(&["simulate", "--config", &cfg, "--seed", "4"], &c), EXIT_PASS);
    assert_ne!(fs::read(a.join("norms.csv")).unwrap(), fs::read(c.join("norms.csv")).unwrap());
}

#[test]
fn info_describes_levels() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("info");
    assert_eq!(run(&["info"], &out), EXIT_PASS);
    let info = json(&out.join("info.json"));
    assert_eq!(info["cutoff"], 10);
    let levels = info["levels"].as_array().unwrap();
    assert_eq!(levels[0]["max_eigenvalue"], 2);
    assert_eq!(levels[1]["max_eigenvalue"], 8);
    assert_eq!(levels[2]["mu"], "inf");
}

#[test]
fn failing_audit_exits_one() {
    // With an unreachable coercivity floor the suite must report failure.
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "samples = 8\nkappa_min = 100.0\n");
    let out = tmp.path().join("a");
    assert_eq!(run(&["assumptions", "--config", &cfg], &out), EXIT_FAIL);
    let csv = fs::read_to_string(out.join("assumptions.csv")).unwrap();
    assert!(csv.lines().any(|l| l.contains(",coercive_h,") && l.ends_with(",0")));
}

#[test]
fn binary_reports_exit_codes() {
    let bin = env!("CARGO_BIN_EXE_salt");
    let tmp = tempfile::tempdir().unwrap();
    let status = Command::new(bin).arg("nonsense").status().unwrap();
    assert_eq!(status.code(), Some(EXIT_USAGE));
    let out = Command::new(bin)
        .args(["taylor-green", "--out", tmp.path().join("tg").to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(EXIT_PASS));
    assert!(String::from_utf8_lossy(&out.stdout).contains("decay: max relative error"));
}
