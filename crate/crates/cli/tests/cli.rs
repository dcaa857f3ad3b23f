use std::fs;
use std::path::Path;
use std::process::Command;

fn write_config(dir: &Path, experiment: &str, lambda_k: usize, samples: usize) -> std::path::PathBuf {
    let path = dir.join(format!("{experiment}.json"));
    let text = format!(
        r#"{{"ensemble": {{"n": 32, "m": 1.0, "metric": {{"type": "signature", "k": {lambda_k}, "n": 32}},
            "master_seed": 5, "num_samples": {samples}}}, "experiment": "{experiment}"}}"#
    );
    fs::write(&path, text).unwrap();
    path
}

fn phspec(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_phspec")).args(args).output().unwrap()
}

#[test]
fn compare_writes_report_and_exits_zero_on_pass() {
    let tmp = tempfile::tempdir().unwrap();
    let config = write_config(tmp.path(), "gap_grid", 8, 1);
    let out = tmp.path().join("out");
    let o = phspec(&["compare", "--config", config.to_str().unwrap(), "--out-dir", out.to_str().unwrap(), "--threads", "2"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stdout));
    let report: serde_json::Value = serde_json::from_slice(&fs::read(out.join("report.json")).unwrap()).unwrap();
    assert_eq!(report["pass"], true);
    assert_eq!(report["config"]["threads"], 2);
    assert!(out.join("gap_grid.csv").exists());
}

#[test]
fn overrides_replace_seed_and_samples() {
    let tmp = tempfile::tempdir().unwrap();
    let config = write_config(tmp.path(), "verify", 8, 10);
    let out = tmp.path().join("out");
    let o = phspec(&[
        "verify", "--config", config.to_str().unwrap(), "--seed", "99", "--samples", "4", "--out-dir", out.to_str().unwrap(),
    ]);
    assert!(o.status.code().is_some_and(|c| c <= 1));
    let report: serde_json::Value = serde_json::from_slice(&fs::read(out.join("report.json")).unwrap()).unwrap();
    assert_eq!(report["config"]["ensemble"]["master_seed"], 99);
    assert_eq!(report["config"]["ensemble"]["num_samples"], 4);
    assert!(out.join("verify.json").exists());
}

#[test]
fn failing_check_gives_exit_code_one() {
    let tmp = tempfile::tempdir().unwrap();
    // Three samples cannot pin a variance to 10%.
    let config = write_config(tmp.path(), "sample_statistics", 8, 3);
    let out = tmp.path().join("out");
    let o = phspec(&["sample", "--config", config.to_str().unwrap(), "--out-dir", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1), "{}", String::from_utf8_lossy(&o.stdout));
    assert!(String::from_utf8_lossy(&o.stdout).contains("FAIL trace_variance"));
    assert!(out.join("spectra.csv").exists());
}

#[test]
fn invalid_config_gives_exit_code_two() {
    let tmp = tempfile::tempdir().unwrap();
    let config = write_config(tmp.path(), "uniformity", 0, 4);
    let o = phspec(&["compare", "--config", config.to_str().unwrap(), "--out-dir", tmp.path().join("o").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).starts_with("error:"));
}

#[test]
fn theory_and_gap_solve_and_sweep() {
    let tmp = tempfile::tempdir().unwrap();
    let config = write_config(tmp.path(), "real_density", 8, 4);
    let c = config.to_str().unwrap();
    let dir = |name: &str| tmp.path().join(name).to_str().unwrap().to_owned();
    let o = phspec(&["theory", "--config", c, "--out-dir", &dir("theory")]);
    assert_eq!(o.status.code(), Some(0));
    let summary: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(summary["nu"], 0.5);

    let o = phspec(&["gap-solve", "--config", c, "--out-dir", &dir("grid")]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stdout));
    assert!(tmp.path().join("grid/gap_grid.csv").exists());

    let o = phspec(&["sweep", "--config", c, "--out-dir", &dir("sweep")]);
    assert!(o.status.code().is_some_and(|c| c <= 1));
    assert!(tmp.path().join("sweep/fraction_sweep.csv").exists());
}
