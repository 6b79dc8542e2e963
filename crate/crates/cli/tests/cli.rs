use std::process::{Command, Output};

fn urnmax(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_urnmax"))
        .args(args)
        .env_remove("URNMAX_FORMAT")
        .env_remove("URNMAX_SEED")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn paper_table_passes_and_adjudicates() {
    let out = urnmax(&["--format", "csv", "paper-table"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let text = stdout(&out);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("quantity,params,value,error_bound,method,reference"));
    assert!(!text.contains("FAIL"));
    assert!(text.contains("ADJUDICATED"));
    assert!(text.contains("0.5041382"));
}

#[test]
fn q_minus_range() {
    let out = urnmax(&["--format", "jsonl", "exact", "q-minus", "--t", "2..5"]);
    assert!(out.status.success());
    let rows: Vec<serde_json::Value> = stdout(&out).lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(rows.len(), 4);
    let v = |i: usize| rows[i]["value"].as_f64().unwrap();
    assert!((v(0) - std::f64::consts::LN_2).abs() < 1e-9);
    assert!((v(1) - 4.0 * std::f64::consts::PI * 3f64.sqrt() / 27.0).abs() < 1e-9);
}

#[test]
fn exact_examples() {
    let out = urnmax(&["exact", "walk-sup-tail", "--p", "0.5", "--t", "7"]);
    assert!(stdout(&out).contains("0.50413825"));
    let out = urnmax(&["exact", "s11", "--t", "2"]);
    assert!(stdout(&out).contains("0.306852819"));
    let out = urnmax(&["--format", "csv", "exact", "equalization", "--r", "2", "--b", "3"]);
    let text = stdout(&out);
    let value: f64 = text.lines().nth(1).unwrap().split(',').nth(2).unwrap().parse().unwrap();
    assert!((value - 0.625).abs() < 1e-13);
}

#[test]
fn oracle_examples() {
    let out = urnmax(&["oracle", "ballot", "--n", "3", "--t", "2", "--a", "0"]);
    assert!(out.status.success());
    assert!(stdout(&out).contains("PASS formula 5"));
    let out = urnmax(&["oracle", "barbier", "--k", "1", "--n", "3", "--t", "2"]);
    assert!(stdout(&out).contains("PASS formula 1"));
    let out = urnmax(&["oracle", "bracket", "--p", "0.25", "--x", "1/3", "--N", "4000"]);
    assert!(out.status.success());
    assert!(stdout(&out).contains("PASS in ["));
}

#[test]
fn exit_codes() {
    assert_eq!(urnmax(&["--help"]).status.code(), Some(0));
    assert_eq!(urnmax(&["--version"]).status.code(), Some(0));
    assert_eq!(urnmax(&["exact", "nonsense"]).status.code(), Some(1));
    assert_eq!(urnmax(&["exact", "walk-sup-tail", "--p", "1.5", "--t", "3"]).status.code(), Some(1));
    let big = urnmax(&["oracle", "ballot", "--n", "31", "--t", "2"]);
    assert_eq!(big.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&big.stderr).contains("limited"));
}

#[test]
fn simulate_is_byte_deterministic() {
    let args = ["simulate", "--x", "1/2", "--reps", "4000", "--horizon", "500", "--seed", "9", "--both"];
    let a = urnmax(&args);
    let b = urnmax(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    assert!(stdout(&a).contains("agreement"));
}

#[test]
fn environment_selects_format() {
    let out = Command::new(env!("CARGO_BIN_EXE_urnmax"))
        .args(["exact", "s1t", "--t", "3"])
        .env("URNMAX_FORMAT", "csv")
        .output()
        .unwrap();
    assert!(stdout(&out).starts_with("quantity,params,value,error_bound,method,reference"));
}
