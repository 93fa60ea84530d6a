use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn cdvq(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cdvq")).args(args).output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn check_json(dir: &Path, name: &str, body: &str) -> (i32, Value) {
    let p = dir.join(name);
    fs::write(&p, body).unwrap();
    let o = cdvq(&["check", "--input", p.to_str().unwrap()]);
    let v = serde_json::from_slice(&o.stdout).unwrap_or(Value::Null);
    (code(&o), v)
}

#[test]
fn check_worked_example() {
    let dir = tempfile::tempdir().unwrap();
    let (c, v) = check_json(
        dir.path(),
        "ex.json",
        r#"{"r":5,"a":[3,1,2,4],"e":4,"f":{"type":"cA","monomials":[[1,1,0,0],[0,0,2,0],[0,0,0,6]]}}"#,
    );
    assert_eq!(c, 0);
    assert_eq!(v["summary"]["kind"], "enc_candidate");
    assert_eq!(v["summary"]["k"], 2);
    assert!(v["normal_forms"].as_array().unwrap().iter().any(|nf| nf["family"] == "cA-C" && nf["a"] == 3));
}

#[test]
fn check_terminal_control_and_exclusion() {
    let dir = tempfile::tempdir().unwrap();
    let (c, v) = check_json(
        dir.path(),
        "control.json",
        r#"{"r":2,"a":[1,1,0,1],"e":0,"f":{"type":"cA","monomials":[[1,1,0,0],[0,0,2,0],[0,0,0,2]]}}"#,
    );
    assert_eq!(c, 0);
    assert_eq!(v["summary"]["kind"], "terminal_like");

    let (c, v) = check_json(
        dir.path(),
        "excluded.json",
        r#"{"r":3,"a":[1,2,1,0],"e":0,"f":{"type":"cA","monomials":[[1,1,0,0],[0,0,3,0],[0,0,0,3]]}}"#,
    );
    assert_eq!(c, 2);
    assert_eq!(v["summary"]["kind"], "setting_violated");
}

#[test]
fn usage_and_io_errors() {
    assert_eq!(code(&cdvq(&["enumerate", "--family", "cA-C", "--rmax", "0"])), 64);
    assert_eq!(code(&cdvq(&["enumerate", "--family", "cA-Z", "--rmax", "5"])), 64);
    assert_eq!(code(&cdvq(&["verify", "bogus"])), 64);
    assert_eq!(code(&cdvq(&["frobnicate"])), 64);
    assert_eq!(code(&cdvq(&["check", "--input", "/nonexistent/input.json"])), 74);

    let dir = tempfile::tempdir().unwrap();
    let (c, _) = check_json(dir.path(), "extra.json", r#"{"r":5,"a":[3,1,2,4],"e":4,"f":{"type":"cA","monomials":[]},"x":1}"#);
    assert_eq!(c, 64);
}

#[test]
fn verify_terminal_writes_csv() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("t.csv");
    let json = dir.path().join("t.json");
    let o = cdvq(&[
        "verify",
        "terminal",
        "--rmax",
        "30",
        "--csv",
        csv.to_str().unwrap(),
        "--out",
        json.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stdout));
    let text = fs::read_to_string(&csv).unwrap();
    assert!(text.starts_with("r,a1,a2,a3,a4,e,"));
    assert!(text.lines().count() > 1);
    let report: Value = serde_json::from_str(&fs::read_to_string(&json).unwrap()).unwrap();
    assert_eq!(report["ok"], true);
}

#[test]
fn enumerate_is_independent_of_worker_count() {
    let dir = tempfile::tempdir().unwrap();
    let mut outputs = Vec::new();
    for workers in ["1", "2"] {
        let out = dir.path().join(format!("w{workers}.jsonl"));
        let o = cdvq(&[
            "--workers",
            workers,
            "enumerate",
            "--family",
            "cDE-e",
            "--rmax",
            "12",
            "--kmax",
            "3",
            "--gdeg",
            "6",
            "--gsize",
            "2",
            "--out",
            out.to_str().unwrap(),
        ]);
        assert_eq!(code(&o), 0);
        outputs.push(fs::read(&out).unwrap());
    }
    assert_eq!(outputs[0], outputs[1]);
    assert!(!outputs[0].is_empty());
}

#[test]
fn atlas_merges_shards() {
    let dir = tempfile::tempdir().unwrap();
    for (family, rmax) in [("cA-C", "7"), ("cA-D", "7")] {
        let out = dir.path().join(format!("{family}.jsonl"));
        let o = cdvq(&[
            "enumerate", "--family", family, "--rmax", rmax, "--kmax", "3", "--gdeg", "6", "--gsize", "2", "--out",
            out.to_str().unwrap(),
        ]);
        assert_eq!(code(&o), 0);
        for line in fs::read_to_string(&out).unwrap().lines() {
            let rec: Value = serde_json::from_str(line).unwrap();
            assert_eq!(rec["version"], 1);
            assert_eq!(rec["family"], family);
        }
    }
    let pattern = dir.path().join("*.jsonl");
    let csv = dir.path().join("atlas.csv");
    let o = cdvq(&["atlas", "--merge", pattern.to_str().unwrap(), "--csv", csv.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    let text = fs::read_to_string(&csv).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("family,k,r,beta,count"));
    assert!(lines.any(|l| l.starts_with("cA-C,2,5,(2/5 4/5 3/5 1/5),")));

    let stale = dir.path().join("stale.jsonl");
    let first = fs::read_to_string(dir.path().join("cA-C.jsonl")).unwrap();
    let line = first.lines().next().unwrap().replacen("\"version\":1", "\"version\":99", 1);
    fs::write(&stale, line + "\n").unwrap();
    let o = cdvq(&["atlas", "--merge", stale.to_str().unwrap()]);
    assert_ne!(code(&o), 0);
    assert!(String::from_utf8_lossy(&o.stderr).contains("version"));
}
