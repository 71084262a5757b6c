//! Exit-status contract of the binary: 0 iff every assertion passes,
//! 2 on schema violations, 1 on numerical failure.

use std::fs;
use std::path::PathBuf;
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_csgs"))
}

fn temp_dir(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join("csgs_cli_tests").join(name);
    let _ = fs::remove_dir_all(&dir);
    fs::create_dir_all(&dir).unwrap();
    dir
}

#[test]
fn townes_run_exits_zero_and_writes_manifest() {
    let dir = temp_dir("townes");
    let config = dir.join("config.json");
    fs::write(&config, r#"{"command": "townes"}"#).unwrap();
    let out = bin()
        .arg("--config")
        .arg(&config)
        .arg("--output")
        .arg(dir.join("out"))
        .output()
        .unwrap();
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("PASS townes.norm_band"), "stdout: {stdout}");
    let manifest: serde_json::Value =
        serde_json::from_slice(&fs::read(dir.join("out/manifest.json")).unwrap()).unwrap();
    assert!(manifest["assertions"].as_array().unwrap().len() >= 4);
    assert!(dir.join("out/townes_profile.txt").exists());
}

#[test]
fn schema_violation_exits_two_naming_the_key() {
    let dir = temp_dir("schema");
    let config = dir.join("config.json");
    fs::write(&config, r#"{"command": "townes", "grid": {"n": 100}}"#).unwrap();
    let out = bin().arg("--config").arg(&config).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("grid.n"), "stderr: {stderr}");
}

#[test]
fn failed_assertion_exits_one_with_manifest() {
    let dir = temp_dir("failing");
    let config = dir.join("config.json");
    // one iteration cannot converge: minimize.converged must fail
    fs::write(
        &config,
        r#"{
            "command": "minimize",
            "grid": {"n": 64, "box_length": 14.0},
            "solver": {"max_iters": 1}
        }"#,
    )
    .unwrap();
    let out = bin()
        .arg("--config")
        .arg(&config)
        .arg("--output")
        .arg(dir.join("out"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("FAIL minimize.converged"), "stdout: {stdout}");
    // the manifest still records the failed assertion
    let manifest: serde_json::Value =
        serde_json::from_slice(&fs::read(dir.join("out/manifest.json")).unwrap()).unwrap();
    let failed = manifest["assertions"]
        .as_array()
        .unwrap()
        .iter()
        .any(|a| a["name"] == "minimize.converged" && a["passed"] == false);
    assert!(failed);
}

#[test]
fn missing_config_file_exits_one() {
    let out = bin().arg("--config").arg("/nonexistent/config.json").output().unwrap();
    assert_eq!(out.status.code(), Some(1));
}
