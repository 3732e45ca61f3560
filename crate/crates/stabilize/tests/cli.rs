//! End-to-end tests of the `stabilize` binary.

use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn stabilize(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_stabilize")).args(args).output().expect("run binary")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn data_rows(csv: &str) -> usize {
    csv.lines().filter(|l| !l.starts_with('#')).count() - 1
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).expect("report exists")).expect("valid JSON")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

#[test]
fn sample_binomial_has_exact_row_count() {
    let o = stabilize(&["sample", "--space", "disk", "--binomial", "50"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.starts_with("# config: {"));
    assert_eq!(data_rows(&text), 50);
}

#[test]
fn sample_poisson_counts_look_poisson() {
    // Over 40 seeds the mean count of a Poisson(100) sample is 100 +- 3 * sqrt(100/40).
    let counts: Vec<f64> = (0..40)
        .map(|seed| {
            let o = stabilize(&["--seed", &seed.to_string(), "sample", "--space", "cube2", "--poisson", "100"]);
            assert!(o.status.success());
            data_rows(&stdout(&o)) as f64
        })
        .collect();
    let mean = counts.iter().sum::<f64>() / counts.len() as f64;
    assert!((mean - 100.0).abs() < 3.0 * (100.0f64 / 40.0).sqrt(), "mean {mean}");
    assert!(counts.iter().any(|&c| c != counts[0]));
}

#[test]
fn missing_space_is_a_usage_error() {
    let o = stabilize(&["sample", "--poisson", "100"]);
    assert_eq!(o.status.code(), Some(2));
    let o = stabilize(&["sample", "--space", "cube2", "--poisson", "100", "--bogus"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("Usage"));
}

#[test]
fn stat_on_loaded_configurations() {
    let dir = tempfile::tempdir().unwrap();
    let antichain = write(dir.path(), "antichain.csv", "x0,x1\n0.1,0.5\n0.5,0.1\n");
    let o = stabilize(&["stat", "--fn", "maxpts", "--load", &antichain]);
    assert!(o.status.success());
    assert_eq!(stdout(&o).trim().parse::<f64>().unwrap(), 2.0);

    let tri = write(dir.path(), "tri.csv", "x0,x1\n0,0\n1,0\n0,1\n");
    let o = stabilize(&["stat", "--fn", "hull-f0", "--load", &tri]);
    assert_eq!(stdout(&o).trim().parse::<f64>().unwrap(), 3.0);

    // Equilateral triangle of side 0.1 with unit marks.
    let t01 = write(dir.path(), "triangle01.csv", "x0,x1,mark\n0.1,0.1,1\n0.2,0.1,1\n0.15,0.18660254037844388,1\n");
    let o = stabilize(&["stat", "--fn", "cliques", "--k", "2", "--beta", "0.2", "--scale", "1", "--load", &t01]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(stdout(&o).trim().parse::<f64>().unwrap(), 1.0);
    let o = stabilize(&["stat", "--fn", "cliques", "--k", "1", "--beta", "0.2", "--scale", "1", "--load", &t01]);
    assert_eq!(stdout(&o).trim().parse::<f64>().unwrap(), 3.0);
    let o = stabilize(&["stat", "--fn", "cliques", "--k", "2", "--beta", "0.2", "--load", &t01]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(stdout(&o).trim().parse::<f64>().unwrap(), 1.0);
}

#[test]
fn check_identities_passes() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    let o = stabilize(&["check", "--suite", "identities", "--quick", "--out", d, "--stem", "ids"]);
    assert_eq!(o.status.code(), Some(0));
    let doc = read_json(&dir.path().join("ids.json"));
    assert_eq!(doc["pass"], Value::Bool(true));
    assert_eq!(doc["config"]["seed"], 1);
}

#[test]
fn quick_check_of_all_suites_passes() {
    let dir = tempfile::tempdir().unwrap();
    let o = stabilize(&["check", "--quick", "--out", dir.path().to_str().unwrap(), "--stem", "all"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let csv = std::fs::read_to_string(dir.path().join("all.csv")).unwrap();
    assert!(csv.lines().nth(1) == Some("suite,pass"));
    assert_eq!(data_rows(&csv), 5);
}

#[test]
fn rates_config_reports_slope_and_predicates() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "knn_q0.json",
        r#"{
          "experiment": {"functional": {"id": "knn", "q": 0.0}, "process": "binomial",
                         "space": {"kind": "unit_cube", "dim": 2},
                         "sizes": [128, 256, 512], "replications": 300, "seed": 3},
          "predicates": [{"pointer": "/var_slope/slope", "min": 0.7, "max": 1.3}]
        }"#,
    );
    let d = dir.path().to_str().unwrap();
    let o = stabilize(&["rates", "--config", &cfg, "--out", d, "--stem", "knn", "--svg"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let doc = read_json(&dir.path().join("knn.json"));
    assert!(doc["report"]["var_slope"]["slope"].is_f64());
    assert_eq!(doc["predicates"][0]["pass"], Value::Bool(true));
    assert!(dir.path().join("knn.csv").exists());
    assert!(std::fs::read_to_string(dir.path().join("knn.svg")).unwrap().starts_with("<svg"));

    // An unattainable window fails with exit code 1.
    let bad = write(
        dir.path(),
        "bad.json",
        r#"{"experiment": {"functional": {"id": "knn", "q": 0.0}, "process": "binomial",
                          "space": {"kind": "unit_cube", "dim": 2},
                          "sizes": [64, 128], "replications": 100, "seed": 3},
            "predicates": [{"pointer": "/var_slope/slope", "min": 5.0}]}"#,
    );
    let o = stabilize(&["rates", "--config", &bad, "--out", d, "--stem", "bad"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn unknown_config_keys_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "typo.json",
        r#"{"experiment": {"functional": {"id": "knn"}, "process": "binomial",
                          "space": {"kind": "unit_cube", "dim": 2},
                          "sizes": [64], "replications": 10, "seed": 1, "replicatons": 5}}"#,
    );
    let o = stabilize(&["rates", "--config", &cfg, "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn stein_gamma_term_for_knn() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    let o = stabilize(&[
        "stein", "--fn", "knn", "--s", "200", "--p", "1", "--outer", "100", "--inner", "100", "--pairs", "2",
        "--variance-reps", "200", "--out", d, "--stem", "st",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let doc = read_json(&dir.path().join("st.json"));
    let g = doc["report"]["estimates"][0]["gamma_term"].as_f64().unwrap();
    // Adding a point almost always changes the k-NN length, so Gamma ~ s.
    assert!((g - 200.0).abs() < 20.0, "gamma_term {g}");
}

#[test]
fn reports_are_reproducible_and_thread_independent() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    let run = |threads: &str, stem: &str| {
        let o = stabilize(&[
            "--threads", threads, "--seed", "9", "rates", "--fn", "maxpts", "--space", "simplex2", "--process", "poisson",
            "--sizes", "64,128,256", "--reps", "200", "--out", d, "--stem", stem,
        ]);
        assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
        std::fs::read(dir.path().join(format!("{stem}.json"))).unwrap()
    };
    let a = run("1", "a");
    let b = run("1", "b");
    let c = run("3", "c");
    // Only the output stem differs between the documents.
    let norm = |bytes: Vec<u8>, stem: &str| String::from_utf8(bytes).unwrap().replace(&format!("\"{stem}\""), "\"x\"");
    assert_eq!(norm(a.clone(), "a"), norm(b, "b"));
    assert_eq!(norm(a, "a"), norm(c, "c"));
}

#[test]
fn tails_writes_fit() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    let o = stabilize(&[
        "tails", "--mode", "radius", "--fn", "knn", "--space", "cube2", "--sizes", "100,200,400", "--reps", "2000",
        "--centers", "0.5,0.5", "--out", d, "--stem", "t",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let doc = read_json(&dir.path().join("t.json"));
    let a = doc["report"]["alpha_hat"].as_f64().unwrap();
    assert!(a > 1.0 && a < 3.0, "alpha {a}");
}
