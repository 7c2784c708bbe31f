use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::{json, Value};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_limhodge")).args(args).env("LIMHODGE_THREADS", "1").output().unwrap()
}

fn json_of(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap()
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("limhodge-cli-{}-{name}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

#[test]
fn pipeline_on_nodal_conic() {
    let out = run(&["pipeline", "--instance", "nodal-conic", "--I", "{}", "--I", "{1}", "--samples", "2"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json_of(&out);
    assert_eq!(v["passed"], json!(true));
    assert_eq!(v["betti"], json!([1, 0, 1]));
}

#[test]
fn output_is_deterministic() {
    let a = run(&["pipeline", "product:nodal-conic+nodal-conic"]);
    let b = run(&["pipeline", "product:nodal-conic+nodal-conic"]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn generate_then_validate_and_build() {
    let dir = scratch("gen");
    let out = run(&["generate", "cycle:3"]);
    assert_eq!(out.status.code(), Some(0));
    let path = dir.join("cycle.json");
    std::fs::write(&path, &out.stdout).unwrap();
    let p = path.to_str().unwrap();
    let v = run(&["validate", p]);
    assert_eq!(v.status.code(), Some(0));
    assert_eq!(json_of(&v)["passed"], json!(true));
    let b = run(&["build", "--instance", p]);
    assert_eq!(b.status.code(), Some(0));
    assert_eq!(json_of(&b)["passed"], json!(true));
}

#[test]
fn validate_reports_broken_adjointness() {
    let dir = scratch("adj");
    let mut inst: Value = serde_json::from_slice(&run(&["generate", "nodal-conic"]).stdout).unwrap();
    inst["gysins"][0]["matrix"] = json!([[0], [1]]);
    let path = dir.join("broken.json");
    std::fs::write(&path, inst.to_string()).unwrap();
    let out = run(&["validate", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let v = json_of(&out);
    assert_eq!(v["passed"], json!(false));
    assert_eq!(v["error"], json!("AdjointnessViolation"));
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(run(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(run(&["pipeline", "nodal-conic", "--I", "{7}"]).status.code(), Some(2));
    assert_eq!(run(&["pipeline", "nodal-conic", "--I", "1,2"]).status.code(), Some(2));
    assert_eq!(run(&["generate", "no-such-family"]).status.code(), Some(2));
}

#[test]
fn monodromy_verb() {
    let ok = run(&["monodromy", r#"{"n": [[0,0,0],[1,0,0],[0,1,0]]}"#]);
    assert_eq!(ok.status.code(), Some(0));
    let missing = run(&["monodromy", r#"{"n": [[0,1],[0,0]], "w": [0,1]}"#]);
    assert_eq!(missing.status.code(), Some(1));
    assert_eq!(json_of(&missing)["relative_weight_filtration"]["error"], json!("DoesNotExist"));
}

#[test]
fn spectral_grid_and_out_dir() {
    let dir = scratch("spectral");
    let out = run(&["spectral", "nodal-conic", "--format", "grid", "--out", dir.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let grid = String::from_utf8(out.stdout).unwrap();
    assert!(grid.contains("E_0") && grid.contains("E_2"), "{grid}");
    assert!(dir.join("report.json").exists() && dir.join("report.grid.txt").exists());
    let saved: Value = serde_json::from_slice(&std::fs::read(dir.join("report.json")).unwrap()).unwrap();
    assert_eq!(saved["passed"], json!(true));
}

#[test]
fn combinatorics_and_selftest() {
    assert_eq!(run(&["combinatorics", "--letters", "3"]).status.code(), Some(0));
    let out = run(&["selftest", "--random", "1", "--format", "text"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
}
