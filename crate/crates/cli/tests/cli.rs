//! End-to-end tests of the binary: exit codes, output formats, and
//! determinism of repeated invocations.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_posetball"))
}

fn posets_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../posets")
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(output: &Output) -> String {
    String::from_utf8(output.stdout.clone()).expect("stdout is utf-8")
}

fn stderr(output: &Output) -> String {
    String::from_utf8(output.stderr.clone()).expect("stderr is utf-8")
}

#[test]
fn enumerate_chain2_prints_four_bipartitions() {
    let poset = posets_dir().join("chain2.json");
    let out = run(&["enumerate", "--poset", poset.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr(&out));
    let text = stdout(&out);
    let bipartitions = text.lines().filter(|l| l.starts_with("A:")).count();
    assert_eq!(bipartitions, 4, "output:\n{text}");
    assert!(text.lines().any(|l| l == "total: 4"), "output:\n{text}");
}

#[test]
fn enumerate_count_only_skips_the_listing() {
    let poset = posets_dir().join("chain4.json");
    let out = run(&["enumerate", "--poset", poset.to_str().unwrap(), "--count-only"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert_eq!(text.lines().filter(|l| l.starts_with("A:")).count(), 0);
    assert!(text.lines().any(|l| l == "total: 16"), "output:\n{text}");
}

#[test]
fn non_monotone_counts_fail_with_the_violating_index() {
    let dir = tempfile::tempdir().unwrap();
    let counts = dir.path().join("bad.csv");
    std::fs::write(&counts, "5,2\n").unwrap();
    let poset = posets_dir().join("chain2.json");
    let out = run(&[
        "mechanism",
        "--poset",
        poset.to_str().unwrap(),
        "--counts",
        counts.to_str().unwrap(),
        "--epsilon",
        "1.0",
    ]);
    assert_eq!(out.status.code(), Some(1));
    let err = stderr(&out);
    assert!(err.contains("count[0]") && err.contains("count[1]"), "stderr: {err}");
}

#[test]
fn mechanism_releases_counts_from_records() {
    let dir = tempfile::tempdir().unwrap();
    let records = dir.path().join("records.csv");
    std::fs::write(&records, "1,1\n0,1\n0,0\n").unwrap();
    let poset = posets_dir().join("chain2.json");
    let out = run(&[
        "mechanism",
        "--poset",
        poset.to_str().unwrap(),
        "--records",
        records.to_str().unwrap(),
        "--epsilon",
        "1.0",
        "--seed",
        "3",
    ]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr(&out));
    let value: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(value["schema_version"], 1);
    assert_eq!(value["counts"], serde_json::json!([1, 2]));
    assert_eq!(value["record_count"], 3);
    assert_eq!(value["release"].as_array().unwrap().len(), 2);
    assert!(value["poset_hash"].as_str().unwrap().len() > 8);
}

#[test]
fn mechanism_requires_exactly_one_input_source() {
    let poset = posets_dir().join("chain2.json");
    let out = run(&["mechanism", "--poset", poset.to_str().unwrap(), "--epsilon", "1.0"]);
    assert_eq!(out.status.code(), Some(1), "missing input must be a usage error");
}

#[test]
fn verify_simplex_is_byte_identical_across_runs() {
    let args = ["verify", "--suite", "simplex", "--seed", "7", "--trials", "200"];
    let first = run(&args);
    let second = run(&args);
    assert_eq!(first.status.code(), Some(0), "stderr: {}", stderr(&first));
    assert_eq!(first.stdout, second.stdout);
    let value: serde_json::Value = serde_json::from_str(&stdout(&first)).unwrap();
    assert_eq!(value["passed"], true);
    assert_eq!(value["reports"].as_array().unwrap().len(), 1);
}

#[test]
fn sample_emits_the_requested_rows_deterministically() {
    let poset = posets_dir().join("chain2.json");
    let args = ["sample", "--poset", poset.to_str().unwrap(), "--n", "5", "--seed", "3"];
    let first = run(&args);
    assert_eq!(first.status.code(), Some(0), "stderr: {}", stderr(&first));
    let text = stdout(&first);
    let data: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(data.len(), 6, "header plus five rows:\n{text}");
    assert_eq!(data[0], "x0,x1");
    for row in &data[1..] {
        assert_eq!(row.split(',').count(), 2);
    }
    let second = run(&args);
    assert_eq!(first.stdout, second.stdout);
}

#[test]
fn out_flag_writes_the_file_and_keeps_stdout_quiet() {
    let dir = tempfile::tempdir().unwrap();
    let target = dir.path().join("out.txt");
    let poset = posets_dir().join("chain2.json");
    let out = run(&[
        "enumerate",
        "--poset",
        poset.to_str().unwrap(),
        "--count-only",
        "--out",
        target.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).is_empty());
    let written = std::fs::read_to_string(&target).unwrap();
    assert!(written.lines().any(|l| l == "total: 4"));
}

#[test]
fn malformed_poset_file_is_a_validation_error() {
    let dir = tempfile::tempdir().unwrap();
    let poset = dir.path().join("broken.json");
    std::fs::write(&poset, "{ not json").unwrap();
    let out = run(&["enumerate", "--poset", poset.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(!stderr(&out).is_empty());
}

#[test]
fn randposet_output_parses_and_carries_provenance() {
    let dir = tempfile::tempdir().unwrap();
    let target = dir.path().join("random.json");
    let out = run(&[
        "randposet",
        "--d",
        "3",
        "--seed",
        "1",
        "--out",
        target.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr(&out));
    let text = std::fs::read_to_string(&target).unwrap();
    assert!(text.contains("randposet --d 3 --seed 1"), "notes missing:\n{text}");
    let poset = posetball::Poset::parse(&text).unwrap();
    assert_eq!(poset.len(), 3);
}

#[test]
fn help_and_version_exit_zero_and_unknown_commands_fail() {
    assert_eq!(run(&["--help"]).status.code(), Some(0));
    assert_eq!(run(&["--version"]).status.code(), Some(0));
    assert_eq!(run(&["bogus"]).status.code(), Some(1));
    assert_eq!(run(&["verify", "--suite", "bogus"]).status.code(), Some(1));
}

#[test]
fn zero_threads_are_rejected() {
    let poset = posets_dir().join("chain2.json");
    let out = run(&[
        "enumerate",
        "--poset",
        poset.to_str().unwrap(),
        "--threads",
        "0",
    ]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn lp_curve_emits_the_documented_schema() {
    let out = run(&["experiment", "lp-curve", "--d", "2", "--p", "2,inf"]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr(&out));
    let text = stdout(&out);
    let data: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(data[0], "d,p,scaled_expected");
    assert!(data.contains(&"2,inf,0.6666666666666666"), "output:\n{text}");
}
