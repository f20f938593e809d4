use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn alexandrov(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_alexandrov"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn write_config(dir: &Path, body: &str) -> String {
    let path = dir.join("config.json");
    fs::write(&path, body).unwrap();
    path.to_str().unwrap().to_string()
}

fn read(dir: &Path, name: &str) -> String {
    fs::read_to_string(dir.join(name)).unwrap_or_else(|e| panic!("{name}: {e}"))
}

#[test]
fn sphere_config_passes_every_gate() {
    let tmp = tempfile::tempdir().unwrap();
    let config = write_config(
        tmp.path(),
        r#"{"schema": "alexandrov-experiment/1", "models": ["euclidean", "hyperbolic"],
            "family": "sphere", "radius": 0.6, "grid_levels": [3], "lemmas": false}"#,
    );
    let out = tmp.path().join("out");
    let res = alexandrov(&["run", &config, "--out", out.to_str().unwrap()]);
    assert_eq!(res.status.code(), Some(0), "{}", String::from_utf8_lossy(&res.stderr));
    let summary = read(&out, "summary.txt");
    assert!(summary.contains("criterion 2 sphere degeneracy: PASS"), "{summary}");
    assert!(summary.contains("overall: PASS"));
    assert!(out.join("stability_report_euclidean.json").exists());
    assert!(out.join("stability_report_hyperbolic.json").exists());
    assert!(read(&out, "resolved_config.json").contains("\"seed\""));
}

#[test]
fn malformed_config_names_the_key() {
    let tmp = tempfile::tempdir().unwrap();
    for (body, key) in [
        (r#"{"schema": "alexandrov-experiment/1", "models": ["euclidean"], "family": "spheroid", "eps": "big"}"#, "eps"),
        (r#"{"schema": "alexandrov-experiment/1", "models": ["flat"], "family": "sphere"}"#, "models"),
        (r#"{"schema": "alexandrov-experiment/1", "models": ["euclidean"], "family": "sphere", "colour": 1}"#, "colour"),
        (r#"{"schema": "alexandrov-experiment/1", "models": ["spherical"], "family": "spheroid", "eps": [0.1]}"#, "family"),
        (r#"{"schema": "alexandrov-experiment/1", "models": ["euclidean"], "family": "sphere", "lemma_grid_level": 2}"#, "lemma_grid_level"),
    ] {
        let config = write_config(tmp.path(), body);
        let res = alexandrov(&["run", &config, "--out", tmp.path().join("o").to_str().unwrap()]);
        let stderr = String::from_utf8_lossy(&res.stderr);
        assert_eq!(res.status.code(), Some(2), "{body}: {stderr}");
        assert!(stderr.contains(&format!("`{key}`")), "{body}: {stderr}");
    }
}

#[test]
fn missing_config_and_bad_flags_are_usage_errors() {
    let tmp = tempfile::tempdir().unwrap();
    let missing = tmp.path().join("nope.json");
    assert_eq!(alexandrov(&["run", missing.to_str().unwrap()]).status.code(), Some(2));
    assert_eq!(alexandrov(&["frobnicate"]).status.code(), Some(2));
    let res = alexandrov(&["sweep", "--model", "euclidean", "--family", "spheroid", "--eps", "-0.1"]);
    assert_eq!(res.status.code(), Some(2));
}

#[test]
fn spheroid_sweep_writes_rows_and_undefined_round_ratio() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("sweep");
    let res = alexandrov(&[
        "sweep", "--model", "euclidean", "--family", "spheroid", "--eps", "0,0.05,0.1", "--level", "4", "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(res.status.code(), Some(0), "{}", String::from_utf8_lossy(&res.stdout));
    let csv = read(&out, "sweep.csv");
    let mut lines = csv.lines();
    assert!(lines.next().unwrap().starts_with("# alexandrov-experiment/1 seed="));
    let columns: Vec<&str> = lines.next().unwrap().split(',').collect();
    let ratio = columns.iter().position(|c| *c == "ratio").unwrap();
    let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 3);
    assert_eq!(rows[0][ratio], "undefined");
    for row in &rows[1..] {
        let r: f64 = row[ratio].parse().unwrap();
        assert!((0.3..=0.8).contains(&r), "ratio {r}");
    }
    let dat = read(&out, "osc_vs_gap_euclidean.dat");
    assert_eq!(dat.lines().filter(|l| !l.starts_with('#')).count(), 3);
}

#[test]
fn reruns_are_byte_identical() {
    let tmp = tempfile::tempdir().unwrap();
    let config = write_config(
        tmp.path(),
        r#"{"schema": "alexandrov-experiment/1", "models": ["hyperbolic"], "family": "perturbed_sphere",
            "radius": 0.7, "eps": [0.05, 0.1], "grid_levels": [3], "lemma_grid_level": 4, "seed": 5}"#,
    );
    let dirs = ["a", "b"].map(|d| tmp.path().join(d));
    for dir in &dirs {
        alexandrov(&["run", &config, "--out", dir.to_str().unwrap()]);
    }
    let mut names: Vec<_> = fs::read_dir(&dirs[0]).unwrap().map(|e| e.unwrap().file_name()).collect();
    names.sort();
    assert!(names.iter().any(|n| n == "checks.csv"));
    for name in names {
        let a = fs::read(dirs[0].join(&name)).unwrap();
        let b = fs::read(dirs[1].join(&name)).unwrap();
        assert!(a == b, "{name:?} differs between runs");
    }
}

#[test]
fn check_lemmas_writes_checks_and_summary() {
    let tmp = tempfile::tempdir().unwrap();
    let config = write_config(
        tmp.path(),
        r#"{"schema": "alexandrov-experiment/1", "models": ["euclidean"], "family": "sphere",
            "lemma_grid_level": 4, "seed": 9}"#,
    );
    let out = tmp.path().join("lemmas");
    let res = alexandrov(&["check-lemmas", &config, "--out", out.to_str().unwrap()]);
    // The shadow bound fails in the curved models, so the gate may fail; the
    // outputs must exist either way.
    assert!(matches!(res.status.code(), Some(0 | 1)));
    let csv = read(&out, "checks.csv");
    assert!(csv.starts_with("# alexandrov-experiment/1 seed=9"));
    assert!(csv.lines().count() > 100);
    let summary = read(&out, "summary.txt");
    assert!(summary.contains("criterion 7 lemma checks"));
    let json: serde_json::Value = serde_json::from_str(&read(&out, "checks_summary.json")).unwrap();
    assert_eq!(json["seed"], 9);
}
