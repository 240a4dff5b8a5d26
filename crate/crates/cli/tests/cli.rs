use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn gcr(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gcr"))
        .args(args)
        .env_remove("GCR_STATE_CAP")
        .output()
        .expect("binary runs")
}

fn stdout_json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn error_field(out: &Output) -> String {
    let v: Value = serde_json::from_slice(&out.stderr).expect("stderr is JSON");
    v["error"]["field"].as_str().expect("field present").to_string()
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
fn copwin_on_a_path() {
    let dir = TempDir::new().unwrap();
    let g = write(&dir, "p3.edges", "# path\n3\n1 2\n2 3\n");
    let out = gcr(&["copwin", "--graph", s(&g), "--gamma", "0.9"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout_json(&out), serde_json::json!({ "copwin": true }));

    let c4 = write(&dir, "c4.edges", "4\n1 2\n2 3\n3 4\n4 1\n");
    let out = gcr(&["copwin", "--graph", s(&c4), "--gamma", "0.9"]);
    assert_eq!(stdout_json(&out)["copwin"], false);
}

#[test]
fn fig1_simulation_never_captures() {
    let out = gcr(&["simulate", "--preset", "fig1"]);
    assert_eq!(out.status.code(), Some(0));
    let v = stdout_json(&out);
    assert_eq!(v["capture_time"], "infinity");
    assert_eq!(v["truncated"], true);
    assert_eq!(v["k"], 0);
    assert!(v.get("payoffs").is_none());
}

#[test]
fn solve_ne_then_certify_round_trip() {
    let dir = TempDir::new().unwrap();
    let ne = dir.path().join("ne.json");
    let out = gcr(&["solve-ne", "--preset", "fig2", "--gamma", "0.9", "--out", s(&ne)]);
    assert_eq!(out.status.code(), Some(0));
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&ne).unwrap()).unwrap();
    assert_eq!(v["certificate"]["passed"], true);
    assert!(v["values"]["1,5,3,1"].is_array());

    let out = gcr(&["certify", "--preset", "fig2", "--gamma", "0.9", "--profile", s(&ne)]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout_json(&out)["certificate"]["passed"], true);
}

#[test]
fn identical_runs_give_identical_bytes() {
    let a = gcr(&["solve-ne", "--preset", "fig6-star", "--gamma", "0.9"]);
    let b = gcr(&["solve-ne", "--preset", "fig6-star", "--gamma", "0.9"]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn lazy_cop_is_rejected() {
    let dir = TempDir::new().unwrap();
    let g = write(&dir, "p3.edges", "3\n1 2\n2 3\n");
    let out = gcr(&["solve-ne", "--graph", s(&g), "--players", "2", "--gamma", "0.9"]);
    let mut profile = stdout_json(&out)["profile"].clone();
    profile["1,3,1"] = Value::from(1);
    let p = write(&dir, "lazy.json", &profile.to_string());
    let out = gcr(&[
        "certify",
        "--graph",
        s(&g),
        "--players",
        "2",
        "--gamma",
        "0.9",
        "--profile",
        s(&p),
    ]);
    assert_eq!(out.status.code(), Some(4));
    let cert = &stdout_json(&out)["certificate"];
    assert_eq!(cert["passed"], false);
    assert_eq!(cert["violations"][0]["player"], 1);
}

#[test]
fn errors_name_the_field() {
    let dir = TempDir::new().unwrap();
    let g = write(&dir, "p3.edges", "3\n1 2\n2 3\n");
    let bad = write(&dir, "bad.edges", "3\n1 2\n2 2\n");

    let out = gcr(&["copwin", "--graph", s(&g)]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(error_field(&out), "gamma");

    let out = gcr(&["solve-ne", "--graph", s(&g), "--gamma", "0.9"]);
    assert_eq!(error_field(&out), "players");

    let out = gcr(&["copwin", "--graph", s(&bad), "--gamma", "0.9"]);
    assert_eq!(error_field(&out), "graph");

    let out = gcr(&["solve-ne", "--graph", s(&g), "--players", "3", "--gamma", "1.0"]);
    assert_eq!(error_field(&out), "gamma");

    let out = gcr(&[
        "solve-aux",
        "--preset",
        "fig2",
        "--gamma",
        "0.9",
        "--player",
        "2",
        "--s0",
        "1,9,3,1",
    ]);
    assert_eq!(error_field(&out), "s0");

    let out = gcr(&["solve-ne", "--preset", "nope", "--gamma", "0.9"]);
    assert_eq!(error_field(&out), "preset");

    let out = gcr(&["construct", "tree", "--preset", "fig1", "--players", "4"]);
    assert_eq!(error_field(&out), "players");
}

#[test]
fn state_cap_comes_from_the_environment() {
    let out = Command::new(env!("CARGO_BIN_EXE_gcr"))
        .args(["solve-ne", "--preset", "fig2", "--gamma", "0.9"])
        .env("GCR_STATE_CAP", "10")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(error_field(&out), "GCR_STATE_CAP");
}

#[test]
fn non_convergence_has_its_own_exit_code() {
    let out = gcr(&["solve-ne", "--preset", "fig2", "--gamma", "0.9", "--max-iters", "1"]);
    assert_eq!(out.status.code(), Some(3));
    assert_eq!(error_field(&out), "max-iters");
}

#[test]
fn noncapturing_construction_on_c4() {
    let dir = TempDir::new().unwrap();
    let c4 = write(&dir, "c4.edges", "4\n1 2\n2 3\n3 4\n4 1\n");
    let dot = dir.path().join("trace.dot");
    let out = gcr(&[
        "construct",
        "noncap",
        "--graph",
        s(&c4),
        "--gamma",
        "0.9",
        "--dot",
        s(&dot),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let v = stdout_json(&out);
    assert_eq!(v["play"]["k"], 0);
    assert_eq!(v["play"]["payoffs"], serde_json::json!([0.0, 0.0, 0.0]));
    assert!(std::fs::read_to_string(&dot).unwrap().starts_with("digraph"));

    let p4 = write(&dir, "p4.edges", "4\n1 2\n2 3\n3 4\n");
    let out = gcr(&["construct", "noncap", "--graph", s(&p4), "--gamma", "0.9"]);
    assert_eq!(error_field(&out), "graph");
}

#[test]
fn threat_verification_on_fig5() {
    let out = gcr(&["threat-ne", "--verify", "--preset", "fig5", "--gamma", "0.9"]);
    assert_eq!(out.status.code(), Some(0));
    let v = stdout_json(&out);
    assert_eq!(v["report"]["passed"], true);
    assert_eq!(v["report"]["players"].as_array().unwrap().len(), 4);
}

#[test]
fn generalized_scheme_file() {
    let dir = TempDir::new().unwrap();
    let scheme = write(&dir, "cyclic.json", r#"{"targets": [[2], [3], [1]]}"#);
    let a = gcr(&[
        "solve-aux",
        "--preset",
        "fig6-star",
        "--gamma",
        "0.9",
        "--player",
        "1",
        "--scheme",
        s(&scheme),
    ]);
    let b = gcr(&[
        "solve-aux",
        "--preset",
        "fig6-star",
        "--gamma",
        "0.9",
        "--player",
        "1",
        "--scheme",
        "cyclic",
    ]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);

    let broken = write(&dir, "broken.json", r#"{"targets": [[2], [3], [4]]}"#);
    let out = gcr(&[
        "solve-aux",
        "--preset",
        "fig6-star",
        "--gamma",
        "0.9",
        "--player",
        "1",
        "--scheme",
        s(&broken),
    ]);
    assert_eq!(error_field(&out), "scheme");
}

#[test]
fn classify_and_graph_dot() {
    let dir = TempDir::new().unwrap();
    let dot = dir.path().join("g.dot");
    let out = gcr(&["classify", "--preset", "fig2", "--dot", s(&dot)]);
    let v = stdout_json(&out);
    assert_eq!(v["is_path"], true);
    assert_eq!(v["is_tree"], true);
    assert!(std::fs::read_to_string(&dot).unwrap().contains("--"));
}
