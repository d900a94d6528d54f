use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

const BIN: &str = env!("CARGO_BIN_EXE_levyjump");

fn fixture() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/tests/data/synthetic_2530.csv")
}

fn run(args: &[&str], dir: &Path) -> Output {
    Command::new(BIN).args(args).current_dir(dir).output().expect("binary runs")
}

fn ok(args: &[&str], dir: &Path) -> Output {
    let out = run(args, dir);
    assert!(out.status.success(), "{args:?} failed: {}", String::from_utf8_lossy(&out.stderr));
    out
}

fn head_csv(dir: &Path, rows: usize) -> PathBuf {
    let text = fs::read_to_string(fixture()).unwrap();
    let head: Vec<&str> = text.lines().take(rows + 1).collect();
    let path = dir.join("head.csv");
    fs::write(&path, head.join("\n") + "\n").unwrap();
    path
}

/// Same relative output name in distinct working directories, so echoed configs agree.
fn subdir(tmp: &TempDir, name: &str) -> PathBuf {
    let d = tmp.path().join(name);
    fs::create_dir(&d).unwrap();
    d
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn dir_contents(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<_> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), fs::read(&p).unwrap()))
        .collect();
    files.sort();
    files
}

#[test]
fn simulate_training_and_control() {
    let tmp = TempDir::new().unwrap();
    let (a, b) = (subdir(&tmp, "a"), subdir(&tmp, "b"));
    ok(&["simulate", "--class", "training", "--seed", "7", "-o", "out"], &a);
    let text = fs::read_to_string(a.join("out/training_000.csv")).unwrap();
    assert_eq!(text.lines().count(), 501);
    ok(&["simulate", "--class", "training", "--seed", "7", "-o", "out"], &b);
    assert_eq!(dir_contents(&a.join("out")), dir_contents(&b.join("out")));

    ok(&["simulate", "--class", "control", "-o", "c"], tmp.path());
    let files: Vec<_> = dir_contents(&tmp.path().join("c")).into_iter().filter(|(n, _)| n.starts_with("control_")).collect();
    assert_eq!(files.len(), 100);
    assert!(files.iter().all(|(_, b)| String::from_utf8_lossy(b).lines().count() == 31));
    assert!(tmp.path().join("c/run_config.toml").exists());
}

#[test]
fn simulate_fixture_reproduces_bundled_file() {
    let tmp = TempDir::new().unwrap();
    ok(&["simulate", "--fixture", "--seed", "2009", "-o", "f"], tmp.path());
    assert_eq!(fs::read(tmp.path().join("f/fixture.csv")).unwrap(), fs::read(fixture()).unwrap());
}

#[test]
fn study_report_and_validation_exits() {
    let tmp = TempDir::new().unwrap();
    fs::write(tmp.path().join("small.toml"), "[study]\nn_processes = 12\n").unwrap();
    ok(&["study", "--config", "small.toml", "--seed", "3", "-o", "s"], tmp.path());
    let report = json(&tmp.path().join("s/study_report.json"));
    assert_eq!(report["config"]["study"]["n_processes"], 12);
    assert_eq!(report["config"]["seed"], 3);
    let entries = report["entries"].as_array().unwrap();
    assert_eq!(entries.len(), 6);
    for e in entries {
        for key in ["class", "method", "correct", "total", "seed"] {
            assert!(e.get(key).is_some(), "missing {key}");
        }
        assert_eq!(e["total"], 12);
    }

    for bad in [&["study", "--p-star", "11"][..], &["study", "--alpha0", "0"], &["detect", "--n", "1"]] {
        let out = run(bad, tmp.path());
        assert_eq!(out.status.code(), Some(2), "{bad:?}");
    }
    fs::write(tmp.path().join("typo.toml"), "p_starr = 3\n").unwrap();
    assert_eq!(run(&["study", "--config", "typo.toml"], tmp.path()).status.code(), Some(2));
}

#[test]
fn detect_counts_windows_and_is_deterministic() {
    let tmp = TempDir::new().unwrap();
    let csv = head_csv(tmp.path(), 120);
    let csv = csv.to_str().unwrap();
    let (a, b) = (subdir(&tmp, "a"), subdir(&tmp, "b"));
    ok(&["detect", "-i", csv, "--n", "10", "-o", "out"], &a);
    ok(&["detect", "-i", csv, "--n", "10", "-o", "out"], &b);
    assert_eq!(dir_contents(&a.join("out")), dir_contents(&b.join("out")));

    let doc = json(&a.join("out/detections.json"));
    let records = doc["records"].as_array().unwrap();
    // brute-force window enumeration: starts 0, 1, ... while start + n is a valid index
    let expected = (0..120).filter(|s| s + 10 < 120).count();
    assert_eq!(records.len(), expected);
    assert_eq!(doc["nu_source"], "whole-series");

    let hist = fs::read_to_string(a.join("out/exit_histogram.csv")).unwrap();
    let rows: Vec<&str> = hist.lines().collect();
    assert_eq!(rows[0], "bin,count");
    assert_eq!(rows.len(), 1 + 11);
    let total: usize = rows[1..].iter().map(|r| r.split(',').nth(1).unwrap().parse::<usize>().unwrap()).sum();
    assert_eq!(total, expected);

    let short = head_csv(tmp.path(), 10);
    let out = run(&["detect", "-i", short.to_str().unwrap(), "--n", "10", "-o", "d3"], tmp.path());
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("too short"));
}

#[test]
fn stats_table_and_schema_errors() {
    let tmp = TempDir::new().unwrap();
    let csv = fixture();
    let out = ok(&["stats", "-i", csv.to_str().unwrap(), "-o", "st"], tmp.path());
    let stdout = String::from_utf8_lossy(&out.stdout);
    for row in ["mean", "median", "max", "min"] {
        assert!(stdout.contains(row));
    }
    let doc = json(&tmp.path().join("st/stats.json"));
    assert!(doc["daily_percent_change"]["mean"].is_number());

    let renamed = tmp.path().join("renamed.csv");
    fs::write(&renamed, fs::read_to_string(&csv).unwrap().replacen("date,close", "Day,Price", 1)).unwrap();
    let out = run(&["stats", "-i", renamed.to_str().unwrap(), "-o", "x"], tmp.path());
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("\"date\""));
    ok(&["stats", "-i", renamed.to_str().unwrap(), "--date-column", "Day", "--close-column", "Price", "-o", "y"], tmp.path());
    assert_eq!(
        json(&tmp.path().join("y/stats.json"))["daily_change"],
        json(&tmp.path().join("st/stats.json"))["daily_change"]
    );
}

const SMALL_PIPELINE: &str = r#"
n = 10
[split.train_range]
start = 0
end = 200
[split.test_range]
start = 230
end = 399
[[classifiers]]
kind = "logistic"
[[classifiers]]
kind = "decision-tree"
max_depth = 4
"#;

#[test]
fn pipeline_dispatch_and_outputs() {
    let tmp = TempDir::new().unwrap();
    let csv = head_csv(tmp.path(), 400);
    fs::write(tmp.path().join("p.toml"), SMALL_PIPELINE).unwrap();
    let csv = csv.to_str().unwrap();
    ok(&["pipeline", "--config", "p.toml", "-i", csv, "--features", "percent", "-o", "pp"], tmp.path());
    ok(&["pipeline", "--config", "p.toml", "-i", csv, "--features", "ref", "-o", "pr"], tmp.path());

    let percent = json(&tmp.path().join("pp/pipeline_report.json"));
    let results = percent["results"].as_array().unwrap();
    assert_eq!(results.len(), 2);
    assert!(results.iter().all(|r| r["feature_kind"] == "percent-changes"));
    assert!(tmp.path().join("pp/frame_percent.csv").exists());
    assert!(!tmp.path().join("pp/frame_ref.csv").exists());
    let ref_doc = json(&tmp.path().join("pr/pipeline_report.json"));
    assert!(ref_doc["results"].as_array().unwrap().iter().all(|r| r["feature_kind"] == "right-exit-frequencies"));

    // ref frame columns hold exit counts in 0..=n_sims
    let frame = fs::read_to_string(tmp.path().join("pr/frame_ref.csv")).unwrap();
    assert_eq!(frame.lines().count() - 1, 400 + 1 - 3 * 10);
    assert_eq!(percent["config"]["n"], 10);

    let hist = fs::read_to_string(tmp.path().join("pp/percent_change_histogram.csv")).unwrap();
    assert!(hist.starts_with("bin,count"));
    assert_eq!(hist.lines().count(), 51);

    let out = run(&["pipeline", "--config", "p.toml", "-i", csv, "--close-column", "price"], tmp.path());
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("\"price\""));
}

#[test]
fn bns_subcommands() {
    let tmp = TempDir::new().unwrap();
    ok(&["bns", "paths", "-o", "b"], tmp.path());
    let path = fs::read_to_string(tmp.path().join("b/bns_path_000.csv")).unwrap();
    assert_eq!(path.lines().count(), 1 + 1001);

    ok(&["bns", "correlation", "--s", "0.5", "--t", "0.6", "--mc-paths", "400", "-o", "b"], tmp.path());
    let c = json(&tmp.path().join("b/bns_correlation.json"));
    assert_eq!(c["formula_per_path"].as_array().unwrap().len(), 10);
    let mean = c["formula_mean"].as_f64().unwrap();
    assert!(mean > 0.5 && mean < 1.2, "{mean}");

    ok(&["bns", "laplace", "--re", "0", "--im", "0", "-o", "b"], tmp.path());
    let l = json(&tmp.path().join("b/bns_laplace.json"));
    assert_eq!(l["value"][0], 1.0);
    assert_eq!(l["value"][1], 0.0);
    let out = run(&["bns", "correlation", "--s", "0.7", "--t", "0.6"], tmp.path());
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn print_config_resolves_overrides() {
    let tmp = TempDir::new().unwrap();
    let out = ok(&["--print-config", "--n-sims", "12", "--p-star", "11", "study"], tmp.path());
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("n_sims = 12"));
    assert!(text.contains("p_star = 11"));
}
