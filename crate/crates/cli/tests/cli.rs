use std::process::{Command, Output};

use serde_json::Value;

fn cascade(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cascade"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn json_out(args: &[&str]) -> Value {
    let out = cascade(args);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

#[test]
fn k3_strategic_fraction_is_zero() {
    let v = json_out(&["solve", "--family", "clique", "--n", "3", "--p", "9/100", "--pi", "11/10", "--mode", "strategic"]);
    assert_eq!(v["results"][0]["fraction"], "0/1");
}

#[test]
fn k3_myopic_matches_enumeration() {
    let v = json_out(&["solve", "--family", "clique", "--n", "3", "--p", "0.09", "--pi", "1.1", "--mode", "myopic"]);
    assert_eq!(v["results"][0]["fraction"], "33807/500000");
}

#[test]
fn classify_clique_in_cascade_regime() {
    let out = cascade(&["classify", "--n", "40", "--p", "0.3", "--pi", "1.1", "--format", "csv"]);
    assert!(out.status.success());
    assert_eq!(String::from_utf8(out.stdout).unwrap(), "n,p,pi,class\n40,3/10,11/10,TC\n");
}

#[test]
fn star_sweep_ratio_stays_at_most_one() {
    let v = json_out(&[
        "sweep", "--family", "star", "--n", "41", "--ps", "0.06,0.18,0.3,0.42", "--pis", "0.4,1.2,2.4,3.6", "--format", "json",
    ]);
    let cells = v["cells"].as_array().unwrap();
    assert_eq!(cells.len(), 16);
    let max: cascade_core::Rational = v["max_ratio"].as_str().unwrap().parse().unwrap();
    assert!(max <= cascade_core::Rational::one());
}

#[test]
fn sweep_defaults_to_csv() {
    let out = cascade(&["sweep", "--family", "clique", "--n", "4", "--ps", "1/4", "--pis", "1/2,3/2"]);
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("p,pi,n,myopic,strategic,ratio,class,flags"));
    assert_eq!(lines.count(), 2);
}

#[test]
fn config_file_is_overridden_by_flags() {
    let path = std::env::temp_dir().join(format!("cascade-config-{}.json", std::process::id()));
    std::fs::write(&path, r#"{"family": "clique", "n": [3], "p": "1/4", "pi": "11/10", "mode": "strategic"}"#).unwrap();
    let out = cascade(&["solve", "--config", path.to_str().unwrap(), "--p", "9/100"]);
    std::fs::remove_file(&path).ok();
    assert!(out.status.success());
    let echo: Value = serde_json::from_slice(out.stderr.split(|&b| b == b'\n').next().unwrap()).unwrap();
    assert_eq!(echo["config"]["p"], "9/100");
    assert_eq!(echo["config"]["pi"], "11/10");
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["p"], "9/100");
}

#[test]
fn same_seed_gives_identical_bytes() {
    let args = [
        "simulate", "--family", "star", "--n", "9", "--p", "0.3", "--pi", "0.5", "--mode", "myopic",
        "--schedule", "star_sopt", "--trials", "3000", "--seed", "7",
    ];
    let a = cascade(&args);
    let b = cascade(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let one_job = cascade(&[&args[..], &["--jobs", "1"]].concat());
    assert_eq!(a.stdout, one_job.stdout);
}

#[test]
fn oracle_check_passes_on_three_group() {
    let v = json_out(&[
        "oracle-check", "--family", "three_group", "--sizes", "2,2,1", "--pattern", "26", "--p", "0.18", "--pi", "1.85",
    ]);
    assert_eq!(v["passed"], true);
}

#[test]
fn invalid_parameters_give_machine_readable_error() {
    let out = cascade(&["solve", "--family", "clique", "--n", "3", "--p", "0.7", "--pi", "1"]);
    assert_eq!(out.status.code(), Some(1));
    let last = String::from_utf8(out.stderr).unwrap();
    let err: Value = serde_json::from_str(last.lines().last().unwrap()).unwrap();
    assert_eq!(err["error"]["kind"], "solver");
}

#[test]
fn unknown_flags_and_commands_fail() {
    assert_eq!(cascade(&["solve", "--bogus"]).status.code(), Some(2));
    assert_eq!(cascade(&["bogus"]).status.code(), Some(2));
    let out = cascade(&["verify", "--campaign", "nope"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn budget_errors_carry_a_hint() {
    let out = cascade(&["solve", "--family", "council", "--k", "10", "--m", "3", "--p", "0.4", "--pi", "2.5"]);
    assert_eq!(out.status.code(), Some(1));
    let text = String::from_utf8(out.stderr).unwrap();
    let err: Value = serde_json::from_str(text.lines().last().unwrap()).unwrap();
    assert_eq!(err["error"]["kind"], "budget");
}

#[test]
fn verify_campaign_reports_pass() {
    let v = json_out(&["verify", "--campaign", "monotone-p", "--samples", "20", "--seed", "3"]);
    assert_eq!(v["passed"], true);
}
