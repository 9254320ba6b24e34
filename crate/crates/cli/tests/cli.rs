use std::path::Path;
use std::process::{Command, Output};

fn nlinc(args: &[&str], root: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nlinc"))
        .args(args)
        .env("NLINC_OUTPUT_ROOT", root)
        .output()
        .expect("binary runs")
}

fn template(name: &str, dir: &Path) -> std::path::PathBuf {
    let out = nlinc(&["template", name], dir);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let path = dir.join(format!("{name}.json"));
    std::fs::write(&path, &out.stdout).unwrap();
    path
}

fn template_names(dir: &Path) -> Vec<String> {
    let out = nlinc(&["list"], dir);
    assert!(out.status.success());
    String::from_utf8(out.stdout)
        .unwrap()
        .lines()
        .skip(1)
        .take_while(|l| !l.trim().is_empty())
        .map(|l| l.split_whitespace().next().unwrap().to_string())
        .collect()
}

#[test]
fn list_has_ten_templates_that_validate() {
    let dir = tempfile::tempdir().unwrap();
    let names = template_names(dir.path());
    assert!(names.len() >= 10, "{names:?}");
    for name in &names {
        let path = template(name, dir.path());
        let out = nlinc(&["validate", path.to_str().unwrap()], dir.path());
        assert!(out.status.success(), "{name}: {}", String::from_utf8_lossy(&out.stderr));
    }
}

#[test]
fn two_layer_class_a_template_has_one_measurement_per_coefficient() {
    let dir = tempfile::tempdir().unwrap();
    let path = template("thm41-two-layer", dir.path());
    let cfg: serde_json::Value = serde_json::from_slice(&std::fs::read(path).unwrap()).unwrap();
    let p = &cfg["params"];
    assert_eq!(cfg["kind"], "nestRecover");
    assert_eq!(p["content"]["class"], "a");
    let coefficients: usize = p["content"]["layers"].as_array().unwrap().iter().map(|l| l.as_array().unwrap().len()).sum();
    assert_eq!(p["setup"]["psis"].as_array().unwrap().len(), coefficients);
}

#[test]
fn malformed_config_exits_2_without_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let root = dir.path().join("out");
    let bad = dir.path().join("bad.json");
    for text in [
        "{ not json",
        r#"{"name": "x", "kind": "lemma21", "seed": 1, "params": {"corner": {"apex": [0, 0], "radius": 1}}}"#,
        r#"{"name": "x", "kind": "teleport", "seed": 1, "params": {}}"#,
        r#"{"name": "x", "kind": "forward", "seed": 1, "params": {}, "meshFile": "missing.mesh"}"#,
        r#"{"name": "x", "kind": "lemma21", "seed": 1, "params": {}, "colour": "red"}"#,
    ] {
        std::fs::write(&bad, text).unwrap();
        for cmd in ["run", "validate"] {
            let out = nlinc(&[cmd, bad.to_str().unwrap()], &root);
            assert_eq!(out.status.code(), Some(2), "{cmd} {text}: {}", String::from_utf8_lossy(&out.stderr));
        }
        assert!(!root.exists());
    }
    let out = nlinc(&["run", dir.path().join("absent.json").to_str().unwrap()], &root);
    assert_eq!(out.status.code(), Some(2));
    assert!(!root.exists());
}

#[test]
fn zero_data_forward_run_reports_zero_solution() {
    let dir = tempfile::tempdir().unwrap();
    let path = template("appendix-zero-data", dir.path());
    let out = nlinc(&["run", path.to_str().unwrap()], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let summary: serde_json::Value =
        serde_json::from_slice(&std::fs::read(dir.path().join("appendix-zero-data/summary.json")).unwrap()).unwrap();
    assert_eq!(summary["summary"]["newton_iterations"], 0);
    assert_eq!(summary["summary"]["zero_solution"], true);
    assert_eq!(summary["pass"], true);
}

#[test]
fn sector_sweep_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let path = template("lemma21-sector", dir.path());
    let mut csvs = Vec::new();
    for run in ["a", "b"] {
        let root = dir.path().join(run);
        let out = nlinc(&["run", path.to_str().unwrap()], &root);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        csvs.push(std::fs::read(root.join("lemma21-sector/sweep_corner.csv")).unwrap());
        let summary: serde_json::Value =
            serde_json::from_slice(&std::fs::read(root.join("lemma21-sector/summary.json")).unwrap()).unwrap();
        let slope = summary["summary"]["corner_slope"].as_f64().unwrap();
        assert!((slope + 2.0).abs() < 0.05, "slope {slope}");
    }
    assert_eq!(csvs[0], csvs[1]);
    assert_eq!(String::from_utf8_lossy(&csvs[0]).lines().count(), 11);
}

#[test]
fn failed_criteria_exit_1_with_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let path = template("lemma21-sector", dir.path());
    let mut cfg: serde_json::Value = serde_json::from_slice(&std::fs::read(&path).unwrap()).unwrap();
    // Demand slope -2 to an impossible 1e-12.
    cfg["params"]["slopeTol"] = serde_json::json!(1e-12);
    cfg["outputDir"] = serde_json::json!("strict");
    std::fs::write(&path, serde_json::to_vec(&cfg).unwrap()).unwrap();
    let out = nlinc(&["run", path.to_str().unwrap()], dir.path());
    assert_eq!(out.status.code(), Some(1));
    assert!(dir.path().join("strict/summary.txt").is_file());
}
