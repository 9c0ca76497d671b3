use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

const EX44: &str = "# generators\nq 5\nrows\n1 0 -1 2 -2\n0 1 2 -1 -2\n";
const EX44_SET: &str = "0 0\n0 3\n1 2\n3 0\n3 3\n4 0\n4 1\n4 2\n";

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_sidorenko"))
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn json(out: &Output) -> Value {
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn classify_example_json() {
    let dir = tempfile::tempdir().unwrap();
    let sys = write(dir.path(), "ex.sys", EX44);
    let v = json(&run(&["classify", "--system", s(&sys), "--json", "--no-timestamp"]));
    let r = &v["result"];
    assert_eq!(r["s"], 4);
    assert_eq!(r["translation_invariant"], true);
    assert_eq!(r["common"], "Yes");
    assert_eq!(r["sidorenko"], "No");
    assert_eq!(r["shortest"].as_array().unwrap().len(), 5);
    assert!(v.get("timestamp").is_none());
}

#[test]
fn classify_over_f7_lists_three_sidorenko_equations() {
    let dir = tempfile::tempdir().unwrap();
    let sys = write(dir.path(), "ex.sys", &EX44.replace("q 5", "q 7"));
    let v = json(&run(&["classify", "--system", s(&sys), "--json"]));
    let marked = v["result"]["shortest"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|e| e["sidorenko"] == true)
        .count();
    assert_eq!(marked, 3);
    assert!(v["timestamp"].is_u64());
}

#[test]
fn count_reports_benchmark() {
    let dir = tempfile::tempdir().unwrap();
    let sys = write(dir.path(), "ex.sys", EX44);
    let set = write(dir.path(), "a.set", EX44_SET);
    for method in ["brute-force", "kernel", "meet-in-middle", "fourier"] {
        let v = json(&run(&[
            "count", "--system", s(&sys), "--set", s(&set), "--n", "2", "--method", method, "--json",
        ]));
        assert_eq!(v["result"]["count"], "48", "{method}");
        assert_eq!(v["result"]["benchmark"], "32768/625");
        assert_eq!(v["result"]["below_benchmark"], true);
    }
}

#[test]
fn search_witness_round_trips_through_deficit() {
    let dir = tempfile::tempdir().unwrap();
    let sys = write(dir.path(), "ex.sys", EX44);
    let out = dir.path().join("best.set");
    let args = [
        "search", "--system", s(&sys), "--n", "2", "--objective", "sidorenko", "--strategy", "anneal", "--steps",
        "5000", "--seed", "11", "--json", "--no-timestamp", "--out", s(&out),
    ];
    let first = run(&args);
    let second = run(&args);
    assert_eq!(first.stdout, second.stdout, "fixed seed gives identical reports");
    let v = json(&first);
    let reported = v["result"]["deficit"].as_str().unwrap().to_string();
    let d = json(&run(&["deficit", "--system", s(&sys), "--set", s(&out), "--n", "2", "--json"]));
    assert_eq!(d["result"]["sidorenko"], reported.as_str());
}

#[test]
fn exhaustive_search_text() {
    let dir = tempfile::tempdir().unwrap();
    let sys = write(dir.path(), "sum.sys", "q 3\nrows\n1 1 1\n");
    let out = run(&["search", "--system", s(&sys), "--n", "1", "--strategy", "exhaustive"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("-2/27"), "{text}");
}

#[test]
fn tau_on_function_file() {
    let dir = tempfile::tempdir().unwrap();
    let sys = write(dir.path(), "s.sys", "q 11\nrows\n1 -1 2 -2 0\n0 1 7 7 7\n");
    let f = write(dir.path(), "f.json", &format!("{{\"q\": 11, \"n\": 1, \"values\": {:?}}}", vec![0.5; 11]));
    let v = json(&run(&["tau", "--system", s(&sys), "--function", s(&f), "--json"]));
    assert!((v["result"]["mean"].as_f64().unwrap() - 0.5).abs() < 1e-12);
    assert!(v["result"]["shortest"]["sum"].as_f64().unwrap().abs() < 1e-12);
}

#[test]
fn require_decision_and_errors() {
    let dir = tempfile::tempdir().unwrap();
    // a 2 x 5 system with s = 4 where no rule applies over F_7
    let sys = write(dir.path(), "ex.sys", &EX44.replace("q 5", "q 7"));
    let out = run(&["classify", "--system", s(&sys), "--require-decision"]);
    assert_eq!(out.status.code(), Some(2));
    let out = run(&["classify", "--system", s(&sys)]);
    assert_eq!(out.status.code(), Some(0));

    let bad = write(dir.path(), "bad.sys", "q 5\nrows\n1 2 3\n1 2\n");
    let out = run(&["classify", "--system", s(&bad)]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains(":4:"));

    let out = run(&["classify", "--system", s(&dir.path().join("missing.sys"))]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn verify_paper_passes() {
    let out = run(&["verify-paper", "--json", "--no-timestamp"]);
    let v = json(&out);
    assert_eq!(v["result"]["failed"], 0, "{v}");
}
