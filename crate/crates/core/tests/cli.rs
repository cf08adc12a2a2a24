use std::path::PathBuf;
use std::process::{Command, Output};

fn gifc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gifc")).args(args).output().unwrap()
}

fn example(name: &str) -> String {
    format!("{}/examples/{name}.gifc", env!("CARGO_MANIFEST_DIR"))
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn check_prints_the_type() {
    let o = gifc(&["check", &example("nsu_right")]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "Unit@high\n");
}

#[test]
fn run_exit_codes() {
    let o = gifc(&["run", &example("fconst_star"), "--input", "true"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "false@low\n");

    let o = gifc(&["run", &example("nsu_fail"), "--input", "false"]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(stdout(&o), "blame p5\n");

    let o = gifc(&["run", &example("fid_static")]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("type error"));

    let o = gifc(&["run", &example("nsu_right"), "--fuel", "2"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stdout(&o).starts_with("timeout"));
}

#[test]
fn bad_arguments_are_usage_errors() {
    assert_eq!(gifc(&["run"]).status.code(), Some(2));
    assert_eq!(gifc(&["fuzz", "safety", "--mutate", "bogus"]).status.code(), Some(2));
    assert_eq!(gifc(&["check", "/nonexistent.gifc"]).status.code(), Some(2));
    assert_eq!(gifc(&["--help"]).status.code(), Some(0));
}

#[test]
fn strict_pc_rejects_implicit_labels() {
    let dir = std::env::temp_dir().join(format!("gifc-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let f = dir.join("implicit.gifc");
    std::fs::write(&f, "(lam (x : Bool@low) . x) true").unwrap();
    let f = f.to_str().unwrap();
    assert_eq!(gifc(&["check", f]).status.code(), Some(0));
    assert_eq!(gifc(&["--strict-pc", "check", f]).status.code(), Some(2));
}

#[test]
fn trace_lists_rules() {
    let o = gifc(&["run", &example("fconst_static"), "--trace"]);
    let out = stdout(&o);
    assert!(out.contains(" beta "), "{out}");
    assert!(out.contains(" prot-val "), "{out}");
    assert!(out.ends_with("false@low\n"));
}

#[test]
fn compile_and_erase() {
    let o = gifc(&["compile", &example("fid_star"), "--emit-cc"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(out.contains("high!"), "{out}");
    assert!(out.ends_with("Bool@low\n"));

    let o = gifc(&["erase", &example("nsu_fail")]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains(":=?"));
}

#[test]
fn run_dyn_reports_nsu() {
    let o = gifc(&["run-dyn", &example("nsu_fail"), "--input", "true"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).starts_with("NSU error at"));
    let o = gifc(&["run-dyn", &example("fconst_star")]);
    assert_eq!(o.status.code(), Some(0));
}

#[test]
fn fuzz_writes_a_stable_summary() {
    let dir = std::env::temp_dir().join(format!("gifc-fuzz-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let out: PathBuf = dir.join("summary.json");
    let args = ["fuzz", "ni", "--seed", "7", "--count", "40", "--out", out.to_str().unwrap()];
    let a = gifc(&args);
    assert_eq!(a.status.code(), Some(0), "{}", stdout(&a));
    let json: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(json["suite"], "ni");
    assert_eq!(json["seed"], 7);
    assert_eq!(json["cases"], 40);
    assert_eq!(json["mutation"], "none");
    let b = gifc(&args);
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn fuzz_with_a_mutation_fails() {
    let o = gifc(&["fuzz", "safety", "--count", "200", "--mutate", "prot-val-no-stamp"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stdout(&o).contains("violation PreservationFail"));
}
