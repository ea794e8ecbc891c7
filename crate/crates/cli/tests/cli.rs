use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn ontokge(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ontokge"))
        .args(args)
        .env("RUST_LOG", "warn")
        .output()
        .unwrap()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn synth_then_run_all() {
    let tmp = TempDir::new().unwrap();
    let dir = tmp.path();
    let synth = ontokge(&["synth", "--out", path(dir)]);
    assert!(synth.status.success(), "{}", String::from_utf8_lossy(&synth.stderr));
    let config = dir.join("config.json");
    assert!(config.is_file());

    let out = dir.join("out");
    let run = ontokge(&["run-all", "--config", path(&config), "--out", path(&out), "--deterministic"]);
    assert!(run.status.success(), "{}", String::from_utf8_lossy(&run.stderr));
    let stdout = String::from_utf8_lossy(&run.stdout);
    for stage in ["ingest", "build-kg", "baseline", "embed", "pair", "train", "evaluate", "report"] {
        assert!(stdout.lines().any(|l| l.starts_with(&format!("{stage}:"))), "{stdout}");
        assert!(out.join(stage).join("manifest.json").is_file());
    }
    let report = std::fs::read_to_string(out.join("report/report.md")).unwrap();
    assert!(report.contains("HP_GO_LD__walk__hadamard__random_forest"), "{report}");
}

#[test]
fn stage_without_config_fails() {
    let run = ontokge(&["ingest"]);
    assert!(!run.status.success());
    assert!(String::from_utf8_lossy(&run.stderr).contains("--config"));
}

#[test]
fn missing_upstream_stage_is_reported() {
    let tmp = TempDir::new().unwrap();
    let dir = tmp.path();
    assert!(ontokge(&["synth", "--out", path(dir)]).status.success());
    let config = dir.join("config.json");
    let out = dir.join("out");
    let run = ontokge(&["train", "--config", path(&config), "--out", path(&out)]);
    assert!(!run.status.success());
    let stderr = String::from_utf8_lossy(&run.stderr);
    assert!(stderr.contains("stage train failed"), "{stderr}");
    assert!(stderr.contains("ingest"), "{stderr}");
}

#[test]
fn unknown_config_fields_are_rejected() {
    let tmp = TempDir::new().unwrap();
    let config = tmp.path().join("config.json");
    std::fs::write(&config, r#"{"seeds": {"sampling": 1, "split": 1, "embedding": 1, "training": 1}, "typo": 1}"#)
        .unwrap();
    let run = ontokge(&["ingest", "--config", path(&config)]);
    assert!(!run.status.success());
    assert!(String::from_utf8_lossy(&run.stderr).contains("typo"));
}
