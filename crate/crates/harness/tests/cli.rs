use std::path::Path;
use std::process::{Command, Output};

fn pathlab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pathlab")).args(args).output().expect("pathlab binary runs")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.display().to_string()
}

#[test]
fn validate_prints_normalized_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "ok.cfg", "# comment\nexperiment = qform\n seed=7 \nmodel = s2\n");
    let out = pathlab(&["validate", &cfg]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("experiment = qform"), "{text}");
    assert!(text.contains("seed = 7"), "{text}");
}

#[test]
fn validate_reports_every_bad_key() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "bad.cfg", "experiment = simulate\nmodel = klein\npaths = 0\nspeed = 3\n");
    let out = pathlab(&["validate", &cfg]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8(out.stderr).unwrap();
    for key in ["model", "paths", "speed"] {
        assert!(err.contains(&format!("config error: {key}:")), "{key} missing from {err}");
    }
}

#[test]
fn subcommand_must_match_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "theta.cfg", "experiment = theta\n");
    let out = pathlab(&["chaos", "--config", &cfg]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn chaos_run_writes_outputs_and_passes() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("run");
    let out = pathlab(&["chaos", "--seed", "5", "--N", "3", "--order", "4", "--out", out_dir.to_str().unwrap()]);
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(out.status.success(), "{stdout}");
    assert!(!stdout.contains("FAIL"), "{stdout}");
    for f in ["manifest.json", "verdict.json", "timings.json", "identities.csv"] {
        assert!(out_dir.join(f).is_file(), "{f} missing");
    }
    let manifest: serde_json::Value = serde_json::from_slice(&std::fs::read(out_dir.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["config"]["chaos.n"], "3");
    assert!(manifest["config"].get("out").is_none());
}
