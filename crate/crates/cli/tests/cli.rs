use std::path::Path;
use std::process::{Command, Output};

use mbent_cli::config::ExperimentConfig;
use mbent_cli::output::read_csv_manifest;

fn mbent(args: &[&str], config: Option<&str>, dir: &Path) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_mbent"));
    cmd.args(args).env_remove("MBENT_THREADS");
    if let Some(json) = config {
        let path = dir.join("config.json");
        std::fs::write(&path, json).unwrap();
        cmd.arg("--config").arg(path);
    }
    cmd.output().unwrap()
}

/// Everything after the manifest line.
fn data(out: &Output) -> String {
    let text = String::from_utf8(out.stdout.clone()).unwrap();
    assert!(text.starts_with("# manifest: "), "{text}");
    text.split_once('\n').unwrap().1.to_string()
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let code = |args: &[&str], json: Option<&str>| mbent(args, json, dir.path()).status.code();
    assert_eq!(code(&["evolve"], None), Some(0));
    assert_eq!(
        code(&["evolve"], Some(r#"{"grid": {"samples": 0}}"#)),
        Some(2)
    );
    assert_eq!(code(&["evolve"], Some(r#"{"orders": []}"#)), Some(2));
    assert_eq!(code(&["evolve"], Some(r#"{"spinz": 8}"#)), Some(2));
    assert_eq!(code(&["evolve"], Some("not json")), Some(2));
    assert_eq!(code(&["evolve"], Some(r#"{"orders": [9]}"#)), Some(2));
    assert_eq!(
        code(&["evolve"], Some(r#"{"spins": 20, "method": "oracle"}"#)),
        Some(3)
    );
    assert_eq!(
        code(
            &["correlate"],
            Some(r#"{"spins": 20, "grid": {"samples": 3}}"#)
        ),
        Some(0)
    );
    assert_eq!(
        code(
            &["correlate"],
            Some(r#"{"spins": 20, "orders": [10], "grid": {"samples": 3}}"#)
        ),
        Some(3)
    );
    assert_eq!(code(&["table1"], None), Some(2));
    assert_eq!(code(&["evolve", "--threads", "0"], None), Some(2));
}

#[test]
fn closed_forms_run_past_the_cap() {
    let dir = tempfile::tempdir().unwrap();
    let json = r#"{"spins": 50, "orders": [2, 10, 20], "grid": {"t_max": 5, "samples": 11}}"#;
    let out = mbent(&["evolve"], Some(json), dir.path());
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert_eq!(
        data(&out)
            .lines()
            .filter(|l| l.ends_with("cos_power"))
            .count(),
        33
    );
}

#[test]
fn output_ignores_thread_count() {
    let dir = tempfile::tempdir().unwrap();
    let runs = [
        (
            &["random-states"][..],
            r#"{"spins": 6, "distribution": {"samples": 300}}"#,
        ),
        (
            &["distribution"][..],
            r#"{"kind": "site_up_to", "spins": 7, "orders": [3], "distribution": {"ensemble": "time", "samples": 500}, "grid": {"t_max": 100}}"#,
        ),
        (
            &["evolve"][..],
            r#"{"kind": "site_single", "spins": 8, "orders": [2, 4], "grid": {"jitter": true, "samples": 50}, "method": "both"}"#,
        ),
    ];
    for (args, json) in runs {
        let one = mbent(
            &[args, &["--threads", "1", "--seed", "7"]].concat(),
            Some(json),
            dir.path(),
        );
        let four = mbent(
            &[args, &["--threads", "4", "--seed", "7"]].concat(),
            Some(json),
            dir.path(),
        );
        let again = mbent(
            &[args, &["--threads", "4", "--seed", "7"]].concat(),
            Some(json),
            dir.path(),
        );
        assert!(
            one.status.success(),
            "{}",
            String::from_utf8_lossy(&one.stderr)
        );
        assert_eq!(data(&one), data(&four), "{args:?}");
        assert_eq!(data(&four), data(&again), "{args:?}");
        let other = mbent(&[args, &["--seed", "8"]].concat(), Some(json), dir.path());
        assert_ne!(data(&one), data(&other), "{args:?}");
    }
}

#[test]
fn manifest_reproduces_the_run() {
    let dir = tempfile::tempdir().unwrap();
    let json = r#"{"kind": "site_single", "spins": 8, "orders": [3], "seed": 11, "grid": {"jitter": true, "samples": 40}}"#;
    let first = mbent(&["evolve"], Some(json), dir.path());
    let manifest = read_csv_manifest(std::str::from_utf8(&first.stdout).unwrap()).unwrap();
    assert_eq!(manifest.command, "evolve");
    assert_eq!(manifest.config.seed, 11);
    assert!(!manifest.seeds.is_empty());
    let second = mbent(&["evolve"], Some(&manifest.config.to_json()), dir.path());
    assert_eq!(data(&first), data(&second));
}

#[test]
fn writes_json_to_a_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("out.json");
    let out = mbent(
        &[
            "random-states",
            "--format",
            "json",
            "--out",
            path.to_str().unwrap(),
        ],
        Some(r#"{"spins": 4, "distribution": {"samples": 10}}"#),
        dir.path(),
    );
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let doc: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(doc["rows"].as_array().unwrap().len(), 10);
    assert_eq!(doc["columns"], serde_json::json!(["index", "emw"]));
    let config: ExperimentConfig =
        serde_json::from_value(doc["manifest"]["config"].clone()).unwrap();
    assert_eq!(config.spins, 4);
}

#[test]
fn verify_passes_by_default_and_fails_strictly() {
    let dir = tempfile::tempdir().unwrap();
    let quick = r#"{"verify": {"xi_orders": [2, 3, 4], "monte_carlo_draws": 20000}}"#;
    let out = mbent(&["verify"], Some(quick), dir.path());
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stdout)
    );
    let text = data(&out);
    assert!(!text.contains(",fail,"));
    assert!(text.contains(",info,"));

    let strict = r#"{"verify": {"xi_orders": [2, 3, 4], "monte_carlo_draws": 20000, "strict_published": true}}"#;
    let path = dir.path().join("report.csv");
    let out = mbent(
        &["verify", "--out", path.to_str().unwrap()],
        Some(strict),
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(1));
    let report = std::fs::read_to_string(&path).unwrap();
    assert!(report.contains(",fail,"));
}
