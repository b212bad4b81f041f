use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn taxi(cache: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_taxi"))
        .args(args)
        .env("TAXI_CACHE_DIR", cache)
        .output()
        .expect("taxi runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn json(out: &Output) -> Value {
    assert_eq!(code(out), 0, "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("valid JSON")
}

#[test]
fn walks_table_ends_with_c12() {
    let dir = tempfile::tempdir().unwrap();
    let out = taxi(dir.path(), &["walks", "table", "--max-n", "12"]);
    assert_eq!(code(&out), 0);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.trim_end().ends_with("460"), "{text}");
    assert!(dir.path().join("taxi_walks.csv").exists());
}

#[test]
fn json_documents_carry_schema_and_command() {
    let dir = tempfile::tempdir().unwrap();
    let doc = json(&taxi(dir.path(), &["--format", "json", "walks", "bound", "--n", "20"]));
    assert_eq!(doc["schema"], 1);
    assert!(doc["command"].is_string());
}

#[test]
fn usage_errors_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&taxi(dir.path(), &["walks", "table"])), 1);
    assert_eq!(code(&taxi(dir.path(), &["contour", "check", "--n", "1", "--m", "1"])), 1);
    assert_eq!(code(&taxi(dir.path(), &["--precision", "2", "walks", "bound"])), 1);
    assert_eq!(code(&taxi(dir.path(), &["bounds", "summary", "--methods", ""])), 1);
    assert_eq!(code(&taxi(dir.path(), &["--help"])), 0);
}

#[test]
fn long_runs_need_the_flag() {
    let dir = tempfile::tempdir().unwrap();
    let out = taxi(dir.path(), &["bounds", "summary", "--preset", "extended"]);
    assert_eq!(code(&out), 1);
    assert!(String::from_utf8_lossy(&out.stderr).contains("long run"));
}

#[test]
fn divergent_tail_is_a_computation_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = taxi(dir.path(), &["contour", "tail", "--mu", "1.6", "--lambda", "1", "--m", "4"]);
    assert_eq!(code(&out), 2);
}

#[test]
fn corrupt_cache_is_malformed() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("taxi_walks.csv"), "n,count\n0,1\n1,banana\n").unwrap();
    assert_eq!(code(&taxi(dir.path(), &["walks", "table", "--max-n", "5"])), 3);
}

#[test]
fn desk_summary_is_consistent() {
    let dir = tempfile::tempdir().unwrap();
    let doc = json(&taxi(dir.path(), &["--format", "json", "bounds", "summary"]));
    assert_eq!(doc["command"], "bounds summary");
}

#[test]
fn contour_sampling_is_deterministic_across_jobs() {
    let dir = tempfile::tempdir().unwrap();
    let args = |jobs: &'static str| {
        ["--jobs", jobs, "--format", "json", "contour", "check", "--n", "4", "--m", "2", "--samples", "300", "--seed", "5"]
    };
    let one = taxi(dir.path(), &args("1"));
    let two = taxi(dir.path(), &args("2"));
    assert_eq!(code(&one), 0);
    assert_eq!(one.stdout, two.stdout);
}

#[test]
fn exhaustive_contour_check_passes_at_n2() {
    let dir = tempfile::tempdir().unwrap();
    let doc = json(&taxi(dir.path(), &["--format", "json", "contour", "check", "--n", "2", "--m", "1", "--exhaustive"]));
    assert!(doc["counterexamples"].as_array().unwrap().is_empty());
}

#[test]
fn csv_is_refused_where_unsupported() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&taxi(dir.path(), &["--format", "csv", "contour", "tail", "--mu", "1.2", "--lambda", "5", "--m", "4"])), 1);
}
