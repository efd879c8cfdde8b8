mod common;

use std::process::{Command, Output};

use common::fixture_path;
use plq_threshold::aggregate::ReportJson;
use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_plq-threshold"))
        .args(args)
        .env_remove("PLQ_SEED")
        .output()
        .expect("binary runs")
}

fn fx(name: &str) -> String {
    fixture_path(name).to_string_lossy().into_owned()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

#[test]
fn validate_exit_codes() {
    for name in ["square", "indefinite", "concave_kinked", "six_piece"] {
        let o = run(&["validate", &fx(name)]);
        assert_eq!(o.status.code(), Some(0), "{name}: {}", stderr(&o));
        assert!(stdout(&o).starts_with("valid"));
    }
    let broken = run(&["validate", &fx("broken_continuity")]);
    assert_eq!(broken.status.code(), Some(1));
    assert!(stdout(&broken).contains("disagree"));

    let malformed = run(&["validate", &fx("malformed")]);
    assert_eq!(malformed.status.code(), Some(2));
    assert!(stderr(&malformed).contains("line 3, column 41"), "{}", stderr(&malformed));

    assert_eq!(run(&["validate", "/no/such/file.json"]).status.code(), Some(2));
    assert_eq!(run(&["frobnicate"]).status.code(), Some(2));
}

#[test]
fn bad_seed_is_a_usage_error() {
    let o = Command::new(env!("CARGO_BIN_EXE_plq-threshold"))
        .args(["validate", &fx("square")])
        .env("PLQ_SEED", "seven")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("PLQ_SEED"));
    let ok = Command::new(env!("CARGO_BIN_EXE_plq-threshold"))
        .args(["validate", &fx("six_piece")])
        .env("PLQ_SEED", "7")
        .output()
        .unwrap();
    assert_eq!(ok.status.code(), Some(0));
}

#[test]
fn threshold_table_rows() {
    let o = run(&["threshold", &fx("six_piece")]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.starts_with("r_bar = 3.236067977\n"), "{text}");
    assert!(text.contains("active set: {6}"));
    let rounded: Vec<&str> = text
        .lines()
        .skip_while(|l| !l.trim_start().starts_with("piece"))
        .skip(1)
        .map(|l| l.split_whitespace().nth(2).unwrap())
        .collect();
    assert_eq!(rounded, ["0.000", "0.000", "0.000", "3.220", "1.000", "3.236"]);
}

#[test]
fn threshold_json_matches_text() {
    let o = run(&["threshold", &fx("six_piece"), "--json"]);
    assert_eq!(o.status.code(), Some(0));
    let doc: ReportJson = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(doc.active_set, vec![6]);
    let again: ReportJson = serde_json::from_str(&serde_json::to_string(&doc).unwrap()).unwrap();
    assert_eq!(doc, again);

    let text = stdout(&run(&["threshold", &fx("six_piece")]));
    let from_text: Vec<f64> = text
        .lines()
        .skip_while(|l| !l.trim_start().starts_with("piece"))
        .skip(1)
        .map(|l| l.split_whitespace().nth(1).unwrap().parse().unwrap())
        .collect();
    for (p, t) in doc.pieces.iter().zip(&from_text) {
        assert!((p.r_bar - t).abs() < 1e-9);
    }
    assert!((doc.r_bar - (1.0 + 5f64.sqrt())).abs() < 1e-12);
}

#[test]
fn domain_command() {
    let f = fx("concave_smooth");
    let expect = [("-1", "NonMember", 1), ("0", "Member", 0), ("0.1", "NonMember", 1), ("1", "NonMember", 1)];
    for (x, word, code) in expect {
        let o = run(&["domain", &f, "--point", x]);
        assert_eq!(o.status.code(), Some(code), "x = {x}");
        assert_eq!(stdout(&o).lines().next(), Some(word), "x = {x}");
    }

    let o = run(&["domain", &fx("bilinear_strip"), "--point", "0,0", "--oracle", "--json"]);
    assert_eq!(o.status.code(), Some(0));
    let doc: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(doc["membership"], "Indeterminate");
    assert_eq!(doc["oracle"]["kind"], "DivergentNegInf");
    assert!(doc["oracle"]["value"].is_null());

    let o = run(&["domain", &fx("bilinear_line"), "--point", "0.5,-2", "--oracle"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("oracle: Finite"));

    let wrong_dim = run(&["domain", &fx("six_piece"), "--point", "1"]);
    assert_eq!(wrong_dim.status.code(), Some(2));
}

#[test]
fn envelope_csv() {
    let o = run(&["envelope", &fx("square"), "--r", "1", "--grid", "-1:1:3"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "x1,e_rf");
    assert_eq!(lines.len(), 4);
    let values: Vec<f64> = lines[1..].iter().map(|l| l.split(',').nth(1).unwrap().parse().unwrap()).collect();
    for (got, want) in values.iter().zip([1.0 / 3.0, 0.0, 1.0 / 3.0]) {
        assert!((got - want).abs() < 1e-6, "{got} vs {want}");
    }
    assert_eq!(stdout(&run(&["envelope", &fx("square"), "--r", "1", "--grid", "-1:1:3"])), text);

    let g = stdout(&run(&["envelope", &fx("concave_kinked"), "--r", "2", "--grid", "-2:2:5"]));
    let cells: Vec<&str> = g.lines().skip(1).map(|l| l.split(',').nth(1).unwrap()).collect();
    assert_eq!(cells[0], "-inf");
    assert_eq!(cells[4], "-inf");
    assert!((cells[2].parse::<f64>().unwrap() + 1.0).abs() < 1e-6);
}

#[test]
fn envelope_grid_2d_and_output_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("env.csv");
    let p = path.to_string_lossy().into_owned();
    let o = run(&["envelope", &fx("indefinite"), "--r", "4", "--grid", "-1:1:3,0:1:2", "--output", &p]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = std::fs::read_to_string(&path).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "x1,x2,e_rf");
    assert_eq!(lines.len(), 7);
    assert!(lines[1].starts_with("-1,0,"));
    assert!(lines[2].starts_with("-1,1,"));
    assert!(lines[6].starts_with("1,1,"));

    let bad = run(&["envelope", &fx("indefinite"), "--r", "4", "--grid", "-1:1"]);
    assert_eq!(bad.status.code(), Some(2));
    let negative = run(&["envelope", &fx("indefinite"), "--r", "-1", "--grid", "0:1:2,0:1:2"]);
    assert_eq!(negative.status.code(), Some(2));
}

#[test]
fn oracle_check_agrees() {
    for name in ["square", "neg_square", "indefinite"] {
        let o = run(&["oracle-check", &fx(name)]);
        assert_eq!(o.status.code(), Some(0), "{name}");
        assert_eq!(stdout(&o).lines().last(), Some("agree"), "{name}: {}", stdout(&o));
    }
    let o = run(&["oracle-check", &fx("six_piece"), "--json"]);
    let doc: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(doc["verdict"], "agree");
    let lo = doc["lo"].as_f64().unwrap();
    let hi = doc["hi"].as_f64().unwrap();
    assert!(lo <= 1.0 + 5f64.sqrt() && 1.0 + 5f64.sqrt() <= hi);
}
