use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn parspec(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_parspec")).args(args).output().expect("binary runs")
}

fn json_of(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!("stdout is not JSON ({e}): {}", String::from_utf8_lossy(&out.stdout))
    })
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn analyze_reports_identities_for_generated_function() {
    let out = parspec(&["--json", "analyze", "--gen", "addressing:k=16"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json_of(&out);
    assert_eq!(v["sparsity"], 16);
}

#[test]
fn three_fold_passes_and_small_sparsity_is_an_error() {
    assert_eq!(parspec(&["verify", "three-fold", "--gen", "inner-product:m=3"]).status.code(), Some(0));
    let small = parspec(&["verify", "three-fold", "--gen", "conjunction:n=2,mask=3"]);
    assert_eq!(small.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&small.stderr).starts_with("error:"));
}

#[test]
fn counterexample_is_confirmed_infeasible() {
    let out = parspec(&["--json", "verify", "counterexample", "--n", "5"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("infeasible"), "{text}");
}

#[test]
fn usage_and_input_errors_exit_two() {
    assert_eq!(parspec(&["analyze"]).status.code(), Some(2));
    assert_eq!(parspec(&["analyze", "--gen", "addressing:k=3"]).status.code(), Some(2));
    assert_eq!(parspec(&["analyze", "--table", "/nonexistent/table.json"]).status.code(), Some(2));
    assert_eq!(parspec(&["--max-n", "4", "analyze", "--gen", "inner-product:m=3"]).status.code(), Some(2));
}

#[test]
fn malformed_table_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let table = dir.path().join("t.json");
    std::fs::write(&table, r#"{"n": 2, "values": [1, -1, 1]}"#).unwrap();
    assert_eq!(parspec(&["analyze", "--table", path_str(&table)]).status.code(), Some(2));
    std::fs::write(&table, r#"{"n": 1, "values": [1, 0]}"#).unwrap();
    assert_eq!(parspec(&["analyze", "--table", path_str(&table)]).status.code(), Some(2));
}

#[test]
fn generated_table_and_spectrum_agree() {
    let dir = tempfile::tempdir().unwrap();
    let table = dir.path().join("t.json");
    let spectrum = dir.path().join("s.json");
    assert!(parspec(&["gen", "modified-addressing:k=4", "--out", path_str(&table)]).status.success());
    assert!(parspec(&["gen", "modified-addressing:k=4", "--format", "spectrum", "--out", path_str(&spectrum)])
        .status
        .success());
    let a = json_of(&parspec(&["--json", "analyze", "--table", path_str(&table)]));
    let b = json_of(&parspec(&["--json", "analyze", "--spectrum", path_str(&spectrum)]));
    assert_eq!(a, b);
    assert_eq!(a["sparsity"], 10);
}

#[test]
fn built_tree_round_trips_through_verify_and_depth() {
    let dir = tempfile::tempdir().unwrap();
    let tree = dir.path().join("tree.json");
    let log = dir.path().join("log.jsonl");
    let table = dir.path().join("t.json");
    assert!(parspec(&["gen", "addressing:k=64", "--out", path_str(&table)]).status.success());
    let build = parspec(&[
        "--seed",
        "3",
        "pdt",
        "build",
        "--table",
        path_str(&table),
        "--out",
        path_str(&tree),
        "--log",
        path_str(&log),
    ]);
    assert_eq!(build.status.code(), Some(0), "{}", String::from_utf8_lossy(&build.stderr));
    let verify = parspec(&["pdt", "verify", "--table", path_str(&table), "--tree", path_str(&tree)]);
    assert_eq!(verify.status.code(), Some(0));
    let depth = parspec(&["--json", "pdt", "depth", "--tree", path_str(&tree), "--n", "11"]);
    assert_eq!(depth.status.code(), Some(0));
    assert!(json_of(&depth)["depth"].as_u64().unwrap() <= 32);
    let records = std::fs::read_to_string(&log).unwrap();
    assert!(records.lines().all(|l| serde_json::from_str::<Value>(l).is_ok()));

    // the same tree against a different function on the same variables fails
    let other = dir.path().join("other.json");
    assert!(parspec(&["gen", "random:n=11,seed=1", "--out", path_str(&other)]).status.success());
    let mismatch = parspec(&["pdt", "verify", "--table", path_str(&other), "--tree", path_str(&tree)]);
    assert_eq!(mismatch.status.code(), Some(1));
}

#[test]
fn seeded_commands_are_byte_deterministic() {
    for args in [
        vec!["--json", "--seed", "9", "mc", "bucket-reduction", "--gen", "inner-product:m=4", "--trials", "50"],
        vec!["--json", "--seed", "9", "mc", "warmup", "--gen", "inner-product:m=4", "--trials", "50"],
        vec!["--json", "--seed", "9", "mc", "theorem-1", "--gen", "inner-product:m=2", "--trials", "20"],
        vec!["--json", "--seed", "9", "mc", "folding-sampling", "--gen", "inner-product:m=3", "--delta", "0.5", "--trials", "20"],
        vec!["--json", "--seed", "9", "pdt", "build", "--gen", "addressing:k=16"],
    ] {
        let a = parspec(&args);
        let b = parspec(&args);
        assert_eq!(a.status.code(), Some(0), "{args:?}: {}", String::from_utf8_lossy(&a.stderr));
        assert_eq!(a.stdout, b.stdout, "{args:?}");
    }
}

#[test]
fn experiment_config_writes_reports() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("exp.toml");
    std::fs::write(
        &config,
        r#"
seed = 1
analyses = ["spectrum", "three-fold", "pdt"]

[[corpus]]
family = "inner-product"
m = 3

[[corpus]]
family = "random"
n = 5
seed = 2
count = 2
"#,
    )
    .unwrap();
    let report = dir.path().join("report.json");
    let csv = dir.path().join("report.csv");
    let out = parspec(&["experiment", path_str(&config), "--out", path_str(&report), "--csv-out", path_str(&csv)]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(v["functions"].as_array().unwrap().len(), 3);
    let csv = std::fs::read_to_string(&csv).unwrap();
    assert!(csv.starts_with("label,n,sparsity,checks,passed,all_pass"));
    assert_eq!(csv.lines().count(), 4);

    std::fs::write(&config, "seed = 1\nanalyses = [\"nonsense\"]\n").unwrap();
    assert_eq!(parspec(&["experiment", path_str(&config)]).status.code(), Some(2));
}
