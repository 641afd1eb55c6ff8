use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_spectral-lab"))
}

fn run_in(dir: &Path, args: &[&str]) -> Output {
    bin().arg("--out").arg(dir).args(args).output().unwrap()
}

fn csv_rows(dir: &Path) -> Vec<Vec<String>> {
    let text = std::fs::read_to_string(dir.join("results.csv")).unwrap();
    text.lines().map(|l| l.split(',').map(str::to_string).collect()).collect()
}

/// CSV text with the timing column removed.
fn body(dir: &Path) -> String {
    csv_rows(dir)
        .into_iter()
        .map(|mut r| {
            r.pop();
            r.join(",")
        })
        .collect::<Vec<_>>()
        .join("\n")
}

const TOEPLITZ: &str = r#"
id = "toeplitz-lambda"
description = "T_n(2cos) against 2cos"
seed = 1
n_list = [64, 256, 1024]
sequence = '(toeplitz "2*cos(t)")'

[[check]]
metric = "check_lambda"
symbol = "2*cos(t)"
"#;

#[test]
fn list_contains_the_bundles() {
    let out = bin().arg("list-scenarios").output().unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert!(lines.len() >= 7);
    for id in ["ce1", "ce2", "ce3", "thpert-sweep", "normal-sweep", "dH-scenario", "reversal-instance"] {
        assert!(lines.iter().any(|l| l.split_whitespace().next() == Some(id)), "{id} missing");
    }
    assert!(lines.iter().all(|l| l.contains('[') && l.contains(']')));
}

#[test]
fn toeplitz_scenario_passes_at_all_sizes() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("t.toml");
    std::fs::write(&cfg, TOEPLITZ).unwrap();
    let out = run_in(dir.path(), &["run", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let rows = csv_rows(dir.path());
    assert_eq!(rows[0].join(","), "scenario,id,n,metric,value,aux,verdict,seconds");
    assert_eq!(rows.len(), 4);
    let sizes: Vec<&str> = rows[1..].iter().map(|r| r[2].as_str()).collect();
    assert_eq!(sizes, ["64", "256", "1024"]);
    assert!(rows[1..].iter().all(|r| r[6] == "pass"));
    let summary: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["passed"], true);
    assert_eq!(summary["checks"][0]["trace"].as_array().unwrap().len(), 3);
}

#[test]
fn empty_metric_list_gives_empty_results_and_exit_zero() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("e.toml");
    std::fs::write(&cfg, "id = \"empty\"\nn_list = [4, 8]\nsequence = '(jordan 0)'\nmetrics = []\n").unwrap();
    let out = run_in(dir.path(), &["run", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(csv_rows(dir.path()).len(), 1);
}

#[test]
fn config_errors_exit_two_with_a_location() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    std::fs::write(&cfg, "id = \"bad\"\nn_list = [4]\nsequence = '(toeplitz \"2*cos(t\")'\n").unwrap();
    let out = run_in(dir.path(), &["run", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("line 3, column"), "{err}");

    let out = run_in(dir.path(), &["reproduce", "no-such-bundle"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn failed_verdicts_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("f.toml");
    // x against x/2 is not a rearrangement.
    std::fs::write(
        &cfg,
        "id = \"wrong\"\nn_list = [512]\nsequence = '(diag \"x\")'\n[[check]]\nmetric = \"check_lambda\"\nsymbol = \"x/2\"\n",
    )
    .unwrap();
    let out = run_in(dir.path(), &["run", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(csv_rows(dir.path())[1][6], "fail");
}

#[test]
fn reproduce_ce3_matches_its_expectations() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_in(dir.path(), &["reproduce", "ce3", "--nmax", "256"]);
    assert_eq!(out.status.code(), Some(0));
    let rows = csv_rows(dir.path());
    let find = |id: &str, n: &str| rows.iter().find(|r| r[1] == id && r[2] == n).unwrap().clone();
    assert_eq!(find("d-acs", "256")[4], format!("{:?}", 1.0 / 256.0));
    assert_eq!(find("xy-lambda-exp", "64")[6], "pass");
    assert_eq!(find("d-prime", "64")[4], "1.0");
}

#[test]
fn reproduce_is_deterministic_across_worker_counts() {
    let (a, b, c) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let args = ["reproduce", "thpert-sweep", "--nmax", "256", "--seed", "11"];
    assert!(run_in(a.path(), &[&args[..], &["--workers", "1"]].concat()).status.success());
    assert!(run_in(b.path(), &[&args[..], &["--workers", "3"]].concat()).status.success());
    assert_eq!(body(a.path()), body(b.path()));
    assert!(run_in(c.path(), &["reproduce", "thpert-sweep", "--nmax", "256", "--seed", "12"]).status.success());
    assert_ne!(body(a.path()), body(c.path()));
}
