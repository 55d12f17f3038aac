use std::fs;
use std::path::{Path, PathBuf};

use serde_json::Value;

fn run(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("oswap").chain(args.iter().copied());
    let code = oswap_cli::run(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn json(args: &[&str]) -> Value {
    let (code, out, err) = run(args);
    assert_eq!(code, 0, "{err}");
    serde_json::from_str(&out).unwrap()
}

fn golden_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden")
}

#[test]
fn help_texts_match_golden_files() {
    let update = std::env::var_os("UPDATE_GOLDEN").is_some();
    let mut names = vec![String::new()];
    names.extend(oswap_cli::command().get_subcommands().map(|c| c.get_name().to_string()).filter(|n| n != "help"));
    for name in names {
        let args: Vec<&str> = if name.is_empty() { vec!["--help"] } else { vec![name.as_str(), "--help"] };
        let (code, out, _) = run(&args);
        assert_eq!(code, 0);
        let file = golden_dir().join(if name.is_empty() { "oswap.txt".to_string() } else { format!("{name}.txt") });
        if update {
            fs::create_dir_all(golden_dir()).unwrap();
            fs::write(&file, &out).unwrap();
        } else {
            let want = fs::read_to_string(&file).unwrap_or_else(|_| panic!("missing {}; rerun with UPDATE_GOLDEN=1", file.display()));
            assert_eq!(out, want, "help for `{name}` changed");
        }
    }
}

#[test]
fn identity_suite_verifies() {
    let doc = json(&["verify", "--suite", "identities", "--seed", "42", "--replicates", "500"]);
    assert_eq!(doc["command"], "verify");
    assert_eq!(doc["result"]["passed"], true);
}

#[test]
fn inversion_limit_value() {
    let doc = json(&["limits", "--quantity", "inversion", "--s", "0.5"]);
    let v = doc["result"]["points"][0]["value"].as_f64().unwrap();
    assert!((v - 0.316_666_666_666_666_6).abs() < 1e-12);
    let (code, out, _) = run(&["--format", "csv", "limits", "--quantity", "inversion", "--s", "0.5,1"]);
    assert_eq!(code, 0);
    assert_eq!(out.lines().next(), Some("s,value"));
    assert_eq!(out.lines().count(), 3);
}

#[test]
fn exact_fixed_speed_law() {
    let (code, out, _) = run(&["simulate", "-n", "4", "--variant", "discrete-fixed", "--steps", "3", "--exact"]);
    assert_eq!(code, 0);
    let doc: Value = serde_json::from_str(&out).unwrap();
    let dist = doc["result"]["distribution"].as_array().unwrap();
    let prob = |state: [u64; 4]| {
        dist.iter()
            .find(|e| e["state"].as_array().unwrap().iter().map(|v| v.as_u64().unwrap()).eq(state))
            .map(|e| e["probability"].as_str().unwrap().to_string())
    };
    assert_eq!(prob([2, 4, 1, 3]).as_deref(), Some("1/3"));
    assert_eq!(prob([3, 1, 4, 2]).as_deref(), Some("1/6"));
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(run(&["bogus"]).0, 1);
    assert_eq!(run(&["limits", "--quantity", "nope"]).0, 1);
    assert_eq!(run(&["--replicates", "0", "verify"]).0, 1);
    let (code, _, err) = run(&["verify", "--suite", "hydro", "-n", "1"]);
    assert_eq!(code, 1);
    assert!(err.starts_with("error:"));
    assert_eq!(run(&["--version"]).0, 0);
}

#[test]
fn failing_verdicts_exit_two() {
    let (code, _, _) = run(&["--replicates", "200", "verify", "--suite", "first-finish", "-n", "20", "--tolerance", "0"]);
    assert_eq!(code, 2);
}

#[test]
fn reports_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let first = json(&["--out-dir", out, "--replicates", "300", "verify", "--suite", "first-finish", "-n", "20", "--tolerance", "0.2"]);
    assert!(dir.path().join("first-finish.json").exists());
    assert!(dir.path().join("verify-run.json").exists());
    let again = json(&["report", out]);
    let verdicts = |doc: &Value, key: &str| doc["result"][key].clone();
    let original = &first["result"]["reports"][0]["verdicts"];
    let rechecked = &verdicts(&again, "reports")[0]["verdicts"];
    assert_eq!(original, rechecked);

    let (code, csv, _) = run(&["--format", "csv", "report", out]);
    assert_eq!(code, 0);
    assert!(csv.lines().count() > 1);
}

#[test]
fn reports_are_byte_identical_across_thread_counts() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for (dir, threads) in [(&a, "1"), (&b, "4")] {
        let out = dir.path().to_str().unwrap();
        json(&["--out-dir", out, "--threads", threads, "--replicates", "64", "verify", "--suite", "first-finish", "-n", "30", "--tolerance", "0.2"]);
    }
    let read = |d: &tempfile::TempDir| fs::read(d.path().join("first-finish.json")).unwrap();
    assert_eq!(read(&a), read(&b));
}

#[test]
fn config_file_and_environment() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    fs::write(&cfg, r#"{"seed": 7, "replicates": 3}"#).unwrap();
    let path = cfg.to_str().unwrap();
    let doc = json(&["--config", path, "lpp", "-n", "20", "-k", "10"]);
    assert_eq!(doc["config"]["seed"], 7);
    assert_eq!(doc["config"]["replicates"], 3);
    let doc = json(&["--config", path, "--seed", "9", "lpp", "-n", "20", "-k", "10"]);
    assert_eq!(doc["config"]["seed"], 9);

    let env_dir = dir.path().join("from-env");
    let status = std::process::Command::new(env!("CARGO_BIN_EXE_oswap"))
        .args(["limits", "--quantity", "gamma", "--y", "0.5"])
        .env("OSWAP_OUT_DIR", &env_dir)
        .output()
        .unwrap();
    assert!(status.status.success());
    assert!(env_dir.join("limits-run.json").exists());
    assert_eq!(run(&["--config", "/nonexistent/cfg.json", "tw"]).0, 1);
}

#[test]
fn seeds_reproduce_and_differ() {
    let a = json(&["--seed", "5", "simulate", "-n", "30", "--horizon", "20"]);
    let b = json(&["--seed", "5", "simulate", "-n", "30", "--horizon", "20"]);
    let c = json(&["--seed", "6", "simulate", "-n", "30", "--horizon", "20"]);
    assert_eq!(a["result"], b["result"]);
    assert_ne!(a["result"], c["result"]);
}
