//! End-to-end runs of the command-line binary.

use std::path::{Path, PathBuf};
use std::process::Command;

use serde_json::{json, Value};
use tempfile::TempDir;

const P1: &str = r#"{"nodes":[{"path":[],"lambda":"one"},{"path":[0],"lambda":"inf","component":"random_graph"}]}"#;
const ADJ: &str = r#"{"params":[[[0,0]]],"arity":1,"formula":["rel","E","x0","p0"]}"#;

struct Run {
    code: i32,
    stdout: String,
    stderr: String,
}

fn nic(args: &[&str]) -> Run {
    let out = Command::new(env!("CARGO_BIN_EXE_nic-measure")).args(args).output().expect("binary runs");
    Run {
        code: out.status.code().unwrap_or(-1),
        stdout: String::from_utf8(out.stdout).unwrap(),
        stderr: String::from_utf8(out.stderr).unwrap(),
    }
}

fn write(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let p = dir.path().join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn plan_validation() {
    let dir = TempDir::new().unwrap();
    let good = write(&dir, "p1.json", P1);
    let r = nic(&["plan-validate", s(&good)]);
    assert_eq!(r.code, 0);
    let v: Value = serde_json::from_str(&r.stdout).unwrap();
    assert_eq!(v, json!({ "valid": true, "violations": [] }));

    let bad = write(&dir, "bad.json", r#"{"nodes":[{"path":[0],"lambda":"inf"}]}"#);
    let r = nic(&["plan-validate", "--plan", s(&bad)]);
    assert_eq!(r.code, 2);
    let v: Value = serde_json::from_str(&r.stdout).unwrap();
    assert_eq!(v["valid"], json!(false));
    assert_eq!(v["violations"].as_array().unwrap().len(), 3);

    let unknown = write(&dir, "unknown.json", r#"{"nodes":[],"extra":1}"#);
    let r = nic(&["plan-validate", s(&unknown)]);
    assert_eq!(r.code, 2);
    assert!(r.stderr.contains("extra"));
}

#[test]
fn measure_and_decompose_the_adjacency_set() {
    let dir = TempDir::new().unwrap();
    let plan = write(&dir, "p1.json", P1);
    let set = write(&dir, "adj.json", ADJ);
    let r = nic(&["measure", "--plan", s(&plan), "--set", s(&set)]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    assert_eq!(serde_json::from_str::<Value>(&r.stdout).unwrap(), json!({ "dim": 1, "meas": "1/2" }));

    let r = nic(&["decompose", "--plan", s(&plan), "--set", s(&set)]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let v: Value = serde_json::from_str(&r.stdout).unwrap();
    let types = v["types"].as_array().unwrap();
    assert_eq!(types.len(), 1);
    assert_eq!(v["total"], json!({ "dim": 1, "meas": "1/2" }));

    // The single type, fed back in on its own, has the same value.
    let ty = write(&dir, "type.json", &types[0]["descriptor"].to_string());
    let r = nic(&["measure", "--plan", s(&plan), "--type", s(&ty)]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    assert_eq!(serde_json::from_str::<Value>(&r.stdout).unwrap(), json!({ "dim": 1, "meas": "1/2" }));
}

#[test]
fn fragments_are_reproducible_and_usable_as_context() {
    let dir = TempDir::new().unwrap();
    let plan = write(&dir, "p1.json", P1);
    let a = nic(&["fragment-build", "--plan", s(&plan), "--seed", "9", "--max-nodes", "6"]);
    let b = nic(&["fragment-build", "--plan", s(&plan), "--seed", "9", "--max-nodes", "6"]);
    assert_eq!(a.code, 0);
    assert_eq!(a.stdout, b.stdout);

    let out = dir.path().join("frag.json");
    let r = nic(&["fragment-build", "--plan", s(&plan), "--seed", "9", "--max-nodes", "6", "--out", s(&out)]);
    assert_eq!(r.code, 0);
    assert!(r.stdout.is_empty());
    assert_eq!(std::fs::read_to_string(&out).unwrap(), a.stdout);

    let dump: Value = serde_json::from_str(&a.stdout).unwrap();
    let vertex = dump["nodes"].as_array().unwrap().iter().find(|n| n.as_array().is_some_and(|s| s.len() == 1)).unwrap();
    let set = write(&dir, "nbrs.json", &json!({ "params": [vertex], "arity": 1, "formula": ["rel", "E", "x0", "p0"] }).to_string());
    let r = nic(&["measure", "--plan", s(&plan), "--set", s(&set), "--fragment", s(&out)]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    assert_eq!(serde_json::from_str::<Value>(&r.stdout).unwrap(), json!({ "dim": 1, "meas": "1/2" }));
}

#[test]
fn verify_reports_and_exit_codes() {
    let dir = TempDir::new().unwrap();
    let plan = write(&dir, "p1.json", P1);
    let args = ["verify", "--plan", s(&plan), "--suite", "cms", "--max-nodes", "8", "--seed", "42", "--no-timing"];
    let r = nic(&args);
    assert_eq!(r.code, 0, "{}", r.stdout);
    let v: Value = serde_json::from_str(&r.stdout).unwrap();
    let reports = v.as_array().unwrap();
    assert_eq!(reports.len(), 3);
    for rep in reports {
        let keys: Vec<&str> = rep.as_object().unwrap().keys().map(String::as_str).collect();
        assert_eq!(keys, ["elapsed_ms", "failures", "instances", "seed", "suite"]);
        assert_eq!(rep["failures"], json!([]));
        assert_eq!(rep["elapsed_ms"], json!(0));
    }
    assert_eq!(nic(&args).stdout, r.stdout);

    assert_eq!(nic(&["verify", "--plan", s(&plan), "--suite", "everything"]).code, 2);
    assert_eq!(nic(&["verify", "--plan", "/nonexistent.json"]).code, 2);
}
