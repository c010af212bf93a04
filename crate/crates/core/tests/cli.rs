use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

const SMALL: [&str; 6] = ["--size-bound", "5", "--type-bound", "3", "--label-bound", "3"];

fn fixture(name: &str) -> String {
    format!("{}/tests/fixtures/{name}", env!("CARGO_MANIFEST_DIR"))
}

fn hogsos(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hogsos")).args(args).env_remove("HOGSOS_FUEL").output().unwrap()
}

fn small(cmd: &str, extra: &[&str]) -> Output {
    let mut args = vec![cmd];
    args.extend_from_slice(&SMALL);
    args.extend_from_slice(extra);
    hogsos(&args)
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn report(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&o.stdout)))
}

fn without_timing(mut v: Value) -> Value {
    v.as_object_mut().unwrap().remove("timing_ms");
    v
}

#[test]
fn certify_sn_passes() {
    let o = small("certify-sn", &[]);
    assert_eq!(code(&o), 0);
    let r = report(&o);
    assert_eq!(r["status"], "pass");
    assert_eq!(r["result"]["verdict"], "SN");
    assert_eq!(r["schema_version"], 1);
    assert_eq!(r["command"], "certify-sn");
}

#[test]
fn inverted_ranks_are_refuted() {
    let o = small("flatness", &["--rank", &fixture("inverted_rank.json")]);
    assert_eq!(code(&o), 1);
    let r = report(&o);
    assert_eq!(r["status"], "refuted");
    let first = r["result"]["violations"][0]["rule"].as_str().unwrap();
    assert!(first.starts_with("S''#"), "{first}");
}

#[test]
fn zero_witness_budget_is_inconclusive() {
    let o = small("weak-respect", &["--n-max", "2", "--k-max", "0"]);
    assert_eq!(code(&o), 2);
    assert_eq!(report(&o)["status"], "inconclusive");
}

#[test]
fn unclosed_universe_downgrades_a_pass() {
    let o = small("certify-sn", &["--closure-fuel", "1"]);
    assert_eq!(code(&o), 2);
    assert_eq!(report(&o)["universe"]["closed"], false);
}

#[test]
fn cbv_sn_report_is_refuted_by_weak_respect() {
    let o = small("sn-report", &["--law", "xtcl-cbv", "--n-max", "2"]);
    assert_eq!(code(&o), 1);
    let r = report(&o);
    let weak = r["result"]["conditions"].as_array().unwrap().iter().find(|c| c["id"] == "3c").unwrap().clone();
    assert_eq!(weak["status"], "fail");
}

#[test]
fn invariant_refutation_from_a_predicate_file() {
    let o = small("check-invariant", &["--s", "top", "--p", &fixture("unit_redex.json")]);
    assert_eq!(code(&o), 1);
    assert_eq!(report(&o)["result"]["holds"], false);
    let o = small("check-logical", &["--pred", "down"]);
    assert_eq!(code(&o), 0);
}

#[test]
fn usage_errors_exit_three() {
    assert_eq!(code(&hogsos(&[])), 3);
    assert_eq!(code(&hogsos(&["certify-sn", "--size-bound", "0"])), 3);
    assert_eq!(code(&hogsos(&["frobnicate"])), 3);
    assert_eq!(code(&small("certify-sn", &["--law", "no-such-law"])), 3);
    assert_eq!(code(&small("certify-sn", &["--law", &fixture("broken.law")])), 3);
    let o = small("flatness", &["--rank", "/nonexistent/rank.json"]);
    assert_eq!(code(&o), 3);
    assert!(String::from_utf8_lossy(&o.stderr).contains("/nonexistent/rank.json"));
    assert_eq!(code(&hogsos(&["--help"])), 0);
    assert_eq!(code(&hogsos(&["--version"])), 0);
}

#[test]
fn law_files_are_accepted() {
    let o = small("simplicity", &["--law", &fixture("self_loop.law")]);
    assert_eq!(code(&o), 0);
    assert_eq!(report(&o)["result"]["law"], "self-loop");
}

#[test]
fn identity_trace() {
    let o = hogsos(&["trace", "--term", "(app I[unit] e)"]);
    assert_eq!(code(&o), 0);
    assert_eq!(String::from_utf8(o.stdout).unwrap(), "(app I[unit] e)\ne ✓\n");
    let o = hogsos(&["trace", "--term", "(app I[unit] e)", "--json"]);
    let r = report(&o);
    assert_eq!(r["result"]["end"], "done");
    assert_eq!(r["result"]["terms"].as_array().unwrap().len(), 2);
}

#[test]
fn trace_of_ill_formed_term_is_a_usage_error() {
    assert_eq!(code(&hogsos(&["trace", "--term", "(app e e)"])), 3);
}

#[test]
fn reports_are_reproducible() {
    let a = without_timing(report(&small("sn-report", &["--n-max", "2"])));
    let b = without_timing(report(&small("sn-report", &["--n-max", "2"])));
    assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
}

#[test]
fn fuel_from_environment_and_seed_are_recorded() {
    let mut args = vec!["certify-sn"];
    args.extend_from_slice(&SMALL);
    args.extend_from_slice(&["--seed", "42"]);
    let o = Command::new(env!("CARGO_BIN_EXE_hogsos")).args(&args).env("HOGSOS_FUEL", "777").output().unwrap();
    let r = report(&o);
    assert_eq!(r["config"]["fuel"], 777);
    assert_eq!(r["config"]["seed"], 42);
    let o = Command::new(env!("CARGO_BIN_EXE_hogsos"))
        .args(&args)
        .args(["--fuel", "555"])
        .env("HOGSOS_FUEL", "777")
        .output()
        .unwrap();
    assert_eq!(report(&o)["config"]["fuel"], 555);
}

#[test]
fn output_flag_writes_the_report() {
    let path: PathBuf = std::env::temp_dir().join(format!("hogsos-cli-{}.json", std::process::id()));
    let o = small("enumerate", &["--output", path.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    assert!(o.stdout.is_empty());
    let r: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    std::fs::remove_file(&path).unwrap();
    assert_eq!(r["command"], "enumerate");
    assert!(r["universe"]["members"].as_u64().unwrap() > 0);
}

#[test]
fn stlc_commands() {
    let o = hogsos(&["stlc", "certify-safety", "--size-bound", "4", "--type-bound", "2"]);
    assert_eq!(code(&o), 0);
    assert_eq!(report(&o)["result"]["certified"], true);
    let o = hogsos(&["stlc", "trace", "--term", r"((\x:unit. x) ())"]);
    assert_eq!(code(&o), 0);
    let text = String::from_utf8(o.stdout).unwrap();
    assert_eq!(text.lines().count(), 2);
    assert!(text.trim_end().ends_with('✓'), "{text}");
}

#[test]
fn nondeterministic_laws_skip_closure_by_default() {
    let o = small("certify-sn", &["--law", "xtcl-nd"]);
    assert_eq!(code(&o), 2);
    let r = report(&o);
    assert_eq!(r["config"]["closure_fuel"], 0);
    assert_eq!(r["universe"]["added_by_closure"], 0);
    assert_eq!(r["result"]["conclusion_confirmed"], true);
}
