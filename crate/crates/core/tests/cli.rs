use std::fs;
use std::path::Path;
use std::process::Command;

use skillgap::cli::dispatch;

fn run(args: &[&str]) -> i32 {
    dispatch(std::iter::once("skillgap").chain(args.iter().copied()))
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn csv_rows(p: &Path) -> usize {
    fs::read_to_string(p).unwrap().lines().count() - 1
}

#[test]
fn synth_features_ablate_chain() {
    let dir = tempfile::tempdir().unwrap();
    let d = path(dir.path());
    assert_eq!(run(&["synth", "--seed", "7", "--out-dir", d]), 0);
    assert_eq!(run(&["features", "--out-dir", d]), 0);
    assert_eq!(
        run(&["ablate", "--out-dir", d, "--iterations", "2", "--folds", "3"]),
        0
    );
    assert_eq!(csv_rows(&dir.path().join("ablation_report.csv")), 12);
    assert_eq!(run(&["importance", "--out-dir", d]), 0);
    assert!(csv_rows(&dir.path().join("importance_report.csv")) > 0);
    assert_eq!(run(&["report", "--out-dir", d]), 0);
    let index = fs::read_to_string(dir.path().join("report/index.json")).unwrap();
    assert!(index.contains("report/ablation/ablation_report.csv"));

    let manifest: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("run_manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["subcommand"], "report");
    assert_eq!(manifest["status"], "ok");
}

#[test]
fn toy_corpus_rca_ranking_is_empty() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(
        dir.path().join("job_ads.csv"),
        "ad_id,year,quarter,occupation_code,salary_median,salary_avg,education_years,experience_years,skills\n\
         j1,2015,1,261311,,,,,a;b\n\
         j2,2015,2,261311,,,,,a\n\
         j3,2015,3,261312,,,,,b;c\n",
    )
    .unwrap();
    fs::write(dir.path().join("skill_taxonomy.csv"), "skill,category\na,specialized\nb,baseline\nc,software\n").unwrap();
    let d = path(dir.path());
    assert_eq!(run(&["skills", "--mode", "rca", "--min-count", "5", "--out-dir", d]), 0);
    assert_eq!(csv_rows(&dir.path().join("skill_rankings.csv")), 0);
    // frequency mode has no count filter
    assert_eq!(run(&["skills", "--mode", "frequency", "--out-dir", d]), 0);
    assert_eq!(csv_rows(&dir.path().join("skill_rankings.csv")), 4);
}

#[test]
fn subcommands_are_idempotent_and_leave_inputs_alone() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for dir in [&a, &b] {
        let d = path(dir.path());
        assert_eq!(run(&["synth", "--seed", "3", "--out-dir", d]), 0);
    }
    let inputs = ["job_ads.csv", "skill_taxonomy.csv", "labor_supply.csv", "shortage_labels.csv"];
    let before: Vec<Vec<u8>> = inputs.iter().map(|f| fs::read(a.path().join(f)).unwrap()).collect();
    for f in inputs.iter().chain(&["synth_manifest.json"]) {
        assert_eq!(fs::read(a.path().join(f)).unwrap(), fs::read(b.path().join(f)).unwrap(), "{f}");
    }

    let out = tempfile::tempdir().unwrap();
    let (src, o) = (path(a.path()), path(out.path()));
    assert_eq!(run(&["features", "--data-dir", src, "--out-dir", o]), 0);
    let first = fs::read(out.path().join("design_matrix.csv")).unwrap();
    assert_eq!(run(&["features", "--data-dir", src, "--out-dir", o]), 0);
    assert_eq!(fs::read(out.path().join("design_matrix.csv")).unwrap(), first);

    assert_eq!(run(&["tune", "--out-dir", o, "--iterations", "3", "--folds", "3", "--config", "LD"]), 0);
    let trace = fs::read(out.path().join("search_trace.csv")).unwrap();
    assert_eq!(run(&["tune", "--out-dir", o, "--iterations", "3", "--folds", "3", "--config", "LD", "--sequential"]), 0);
    assert_eq!(fs::read(out.path().join("search_trace.csv")).unwrap(), trace);

    let params = out.path().join("tuned_config.json");
    assert_eq!(run(&["train", "--out-dir", o, "--config", "LD", "--params", path(&params)]), 0);
    let model = fs::read(out.path().join("model.json")).unwrap();
    assert_eq!(run(&["train", "--out-dir", o, "--config", "LD", "--params", path(&params)]), 0);
    assert_eq!(fs::read(out.path().join("model.json")).unwrap(), model);

    let after: Vec<Vec<u8>> = inputs.iter().map(|f| fs::read(a.path().join(f)).unwrap()).collect();
    assert_eq!(before, after);
}

#[test]
fn validation_errors_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let d = path(dir.path());
    // no input files
    assert_eq!(run(&["profile", "--out-dir", d]), 1);
    let manifest = fs::read_to_string(dir.path().join("run_manifest.json")).unwrap();
    assert!(manifest.contains("\"status\": \"error"));
    assert_eq!(run(&["train", "--config", "naive", "--out-dir", d]), 1);
    assert_eq!(run(&["ablate", "--configs", "everything", "--out-dir", d]), 1);
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(run(&["ablate", "--no-such-flag"]), 2);
    assert_eq!(run(&["frobnicate"]), 2);
    assert_eq!(run(&[]), 2);
    assert_eq!(run(&["skills", "--mode", "tfidf"]), 2);
    assert_eq!(run(&["--help"]), 0);
}

#[test]
fn binary_exit_codes() {
    let bin = env!("CARGO_BIN_EXE_skillgap");
    let out = Command::new(bin).arg("--bogus").output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("Usage"));
    let dir = tempfile::tempdir().unwrap();
    let out = Command::new(bin)
        .args(["ingest", "--out-dir", path(dir.path())])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
}
