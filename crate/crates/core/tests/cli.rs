mod common;

use std::process::Command;

use common::*;
use gramkit::cli::run;

fn gramkit(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("gramkit").chain(args.iter().copied());
    let code = run(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn path(name: &str) -> String {
    corpus_path(name).display().to_string()
}

#[test]
fn check_accepts_automaton() {
    let (code, out, err) = gramkit(&["check", &path("automaton.mc")]);
    assert_eq!((code, out.as_str(), err.as_str()), (0, "", ""));
}

#[test]
fn parse_pingpong() {
    let (code, out, err) = gramkit(&["parse", &path("automaton.mc"), &path("pingpong.aut")]);
    assert_eq!(code, 0, "{err}");
    assert!(err.is_empty());
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["nodes"].as_array().unwrap().len(), 9);
    assert_eq!(v["links"].as_array().unwrap().len(), 8);
}

#[test]
fn parse_broken_reports_unresolved_reference() {
    let model = path("broken.aut");
    let (code, _, err) = gramkit(&["parse", &path("automaton.mc"), &model]);
    assert_eq!(code, 1);
    assert_eq!(err, format!("{model}:5:3: error: unresolved reference X\n"));
}

#[test]
fn parse_several_models_gives_array_in_order() {
    let (code, out, _) =
        gramkit(&["parse", &path("automaton.mc"), &path("pingpong.aut"), &path("broken.aut")]);
    assert_eq!(code, 1);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v[0]["nodes"][0]["attributes"]["name"], "PingPong");
    assert_eq!(v[1]["nodes"][0]["attributes"]["name"], "Broken");
}

#[test]
fn schema_formats_and_out_file() {
    let (code, out, _) = gramkit(&["schema", &path("shop.mc"), "--format", "plantuml"]);
    assert_eq!(code, 0);
    assert!(out.contains("PremiumClient --|> Client"));

    let (code, json, _) = gramkit(&["schema", &path("shop.mc")]);
    assert_eq!(code, 0);
    assert!(serde_json::from_str::<serde_json::Value>(&json).unwrap()["classes"].is_array());

    let dir = tempfile::tempdir().unwrap();
    let target = dir.path().join("schema.json");
    let (code, out, _) = gramkit(&["schema", &path("shop.mc"), "--out", target.to_str().unwrap()]);
    assert_eq!((code, out.as_str()), (0, ""));
    assert_eq!(std::fs::read_to_string(target).unwrap(), json);
}

#[test]
fn left_recursive_grammar_fails_check() {
    let dir = tempfile::tempdir().unwrap();
    let g = dir.path().join("lr.mc");
    std::fs::write(&g, "grammar G {\n  A = A \"a\";\n}\n").unwrap();
    let (code, _, err) = gramkit(&["check", g.to_str().unwrap()]);
    assert_eq!(code, 1);
    assert_eq!(err, format!("{}:2:3: error: left recursion on A\n", g.display()));
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(gramkit(&[]).0, 2);
    assert_eq!(gramkit(&["frobnicate"]).0, 2);
    assert_eq!(gramkit(&["parse", &path("automaton.mc")]).0, 2);
    assert_eq!(gramkit(&["schema", &path("shop.mc"), "--format", "xmi"]).0, 2);
    let (code, _, err) = gramkit(&["check", "/nonexistent/grammar.mc"]);
    assert_eq!(code, 2);
    assert!(err.contains("cannot read"));
}

#[test]
fn help_goes_to_stdout() {
    let (code, out, _) = gramkit(&["--help"]);
    assert_eq!(code, 0);
    assert!(out.contains("check") && out.contains("schema") && out.contains("parse"));
}

#[test]
fn identical_invocations_identical_output() {
    let args = ["parse", &path("automaton.mc"), &path("pingpong.aut")];
    let a = gramkit(&args);
    let b = gramkit(&args);
    assert_eq!(a, b);
}

#[test]
fn binary_end_to_end() {
    let out = Command::new(env!("CARGO_BIN_EXE_gramkit"))
        .args(["parse", &path("automaton.mc"), &path("pingpong.aut")])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["nodes"].as_array().unwrap().len(), 9);

    let out = Command::new(env!("CARGO_BIN_EXE_gramkit"))
        .args(["parse", &path("net.mc"), &path("net_short.net")])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains(":2:3: error:"));
}
