use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn slcover(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_slcover")).args(args).current_dir(dir).output().expect("binary runs")
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

const COUNTEREXAMPLE: [&str; 11] =
    ["construct", "--genus", "0", "--punctures", "4", "--euler", "1", "--signs", "+,+,+,-", "--seed", "42"];

#[test]
fn construct_euler_audit_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let out = slcover(&[&COUNTEREXAMPLE[..], &["-o", "rep.json"]].concat(), d);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));

    let out = slcover(&["euler", "rep.json", "-o", "e.json"], d);
    assert_eq!(out.status.code(), Some(0));
    let e = json(&d.join("e.json"));
    assert_eq!(e["euler"], 1);
    assert_eq!(e["signs"], serde_json::json!([1, 1, 1, -1]));
    assert_eq!(e["type_preserving"], true);

    let out = slcover(
        &["audit", "rep.json", "--depth", "4", "--margin", "1e-6", "--report", "out.json", "--csv", "a.csv", "--restrictions", "r.json"],
        d,
    );
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let a = json(&d.join("out.json"));
    assert_eq!(a["violations"], serde_json::json!([]));
    assert!(a["min_trace_margin"].as_f64().unwrap() > 1e-6);
    let r = json(&d.join("r.json"));
    assert_eq!(r["pants_euler"], 0);
    assert_eq!(r["ok"], true);
    let csv = std::fs::read_to_string(d.join("a.csv")).unwrap();
    assert_eq!(csv.lines().count(), 2);
}

#[test]
fn construct_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    for name in ["a.json", "b.json"] {
        assert_eq!(slcover(&[&COUNTEREXAMPLE[..], &["-o", name]].concat(), d).status.code(), Some(0));
    }
    let with_jobs = slcover(&[&["--jobs", "1"], &COUNTEREXAMPLE[..], &["-o", "c.json"]].concat(), d);
    assert_eq!(with_jobs.status.code(), Some(0));
    let a = std::fs::read(d.join("a.json")).unwrap();
    assert_eq!(a, std::fs::read(d.join("b.json")).unwrap());
    assert_eq!(a, std::fs::read(d.join("c.json")).unwrap());
}

#[test]
fn infeasible_request_cites_milnor_wood() {
    let dir = tempfile::tempdir().unwrap();
    let out = slcover(&["construct", "--genus", "0", "--punctures", "4", "--euler", "2", "--signs", "+,+,+,-"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("Milnor-Wood"));
}

#[test]
fn unknown_flags_are_errors() {
    let dir = tempfile::tempdir().unwrap();
    let out = slcover(&[&COUNTEREXAMPLE[..], &["--frobnicate"]].concat(), dir.path());
    assert_eq!(out.status.code(), Some(2));
    let out = slcover(&["audit"], dir.path());
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn audit_reports_violations_with_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    // c1 c2 has trace 0; c3 is the positive parabolic making c4 parabolic.
    let rep = slcover::negative_control().to_json_string();
    std::fs::write(d.join("neg.json"), rep).unwrap();
    let out = slcover(&["audit", "neg.json", "--depth", "0", "--report", "neg_report.json"], d);
    assert_eq!(out.status.code(), Some(1));
    let a = json(&d.join("neg_report.json"));
    assert!(!a["violations"].as_array().unwrap().is_empty());
}

#[test]
fn classify_matrix_and_lift() {
    let dir = tempfile::tempdir().unwrap();
    let out = slcover(&["classify", "--matrix", "1,1,0,1", "--index", "2"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["psl_type"], "ParabolicPlus");
    assert_eq!(v["cover"]["class"], serde_json::json!({"tag": "ParPlus", "n": 2}));
    let out = slcover(&["classify", "--matrix", "2,0,0,0.5", "--index", "-1"], dir.path());
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["cover"]["class"], serde_json::json!({"tag": "Hyp", "n": -1}));
    let out = slcover(&["classify", "--matrix", "2,0,0,2"], dir.path());
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn extremal_boundary_build() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let out = slcover(&["construct", "--genus", "1", "--punctures", "2", "--boundary", "3,1,5,2", "-o", "x.json"], d);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let out = slcover(&["euler", "x.json"], d);
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["euler"], 2);
    assert_eq!(v["extremal"], true);
}

#[test]
fn sample_writes_batch() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let out = slcover(
        &[
            "sample", "--genus", "1", "--punctures", "2", "--euler", "1", "--signs", "+,-", "--seed", "3", "--count", "4",
            "--depth", "3", "--out-dir", "batch", "-o", "summary.json",
        ],
        d,
    );
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let s = json(&d.join("summary.json"));
    assert_eq!(s["count"], 4);
    assert_eq!(s["np_pass"], 4);
    assert!(d.join("batch/rep_0003.json").exists());
    assert_eq!(std::fs::read_to_string(d.join("batch/audit.csv")).unwrap().lines().count(), 5);
}

#[test]
fn selftest_quick_passes() {
    let dir = tempfile::tempdir().unwrap();
    let out = slcover(&["selftest", "--quick", "--report", "st.json"], dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.lines().all(|l| l.starts_with("PASS")));
    assert!(json(&dir.path().join("st.json")).as_array().unwrap().len() > 10);
}
