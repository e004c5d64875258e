use std::io::Write;
use std::path::PathBuf;
use std::process::{Command, Output, Stdio};

use serde_json::Value;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_robusthedge"));
    c.env_remove("ROBUSTHEDGE_CAP");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn run_stdin(args: &[&str], input: &[u8]) -> Output {
    let mut child = bin()
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .expect("binary runs");
    child.stdin.take().unwrap().write_all(input).unwrap();
    child.wait_with_output().unwrap()
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&out.stdout)))
}

fn fixture_file(name: &str, param: Option<&str>) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("robusthedge-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join(format!("{name}-{}.json", param.unwrap_or("x")));
    let mut args = vec!["--output", path.to_str().unwrap(), "fixture", "--name", name];
    if let Some(p) = param {
        args.extend(["--param", p]);
    }
    assert_eq!(run(&args).status.code(), Some(0));
    path
}

#[test]
fn fixture_then_validate() {
    let a = fixture_file("FIX-A", None);
    let out = run(&["--input", a.to_str().unwrap(), "validate"]);
    assert_eq!(out.status.code(), Some(0));
    let fix_b = run(&["fixture", "--name", "B", "--param", "2"]);
    let v = json(&fix_b);
    assert_eq!(v["periods"][0]["outcomes"].as_array().unwrap().len(), 3);
    assert_eq!(v["root_generators"].as_array().unwrap().len(), 2);
}

#[test]
fn prices_by_mode() {
    let b = fixture_file("B", Some("2"));
    let input = b.to_str().unwrap();
    let qs = json(&run(&["--input", input, "price"]));
    assert_eq!(qs["price"], "2/5");
    assert_eq!(qs["semantics"], "quasi_sure");
    let mono = json(&run(&["--input", input, "price", "--mode", "mono", "--prior", "pure:0"]));
    assert_eq!(mono["price"], "1/3");
    let lower = json(&run(&["--input", input, "price", "--mode", "lower", "--family", "all"]));
    assert_eq!(lower["price"], "2/5");
    let digital = json(&run(&["--input", input, "price", "--claim", "digital:2"]));
    assert_eq!(digital["price"], "1/3");
}

#[test]
fn table_output() {
    let a = fixture_file("A", None);
    let out = run(&["--input", a.to_str().unwrap(), "--format", "table", "price"]);
    assert!(String::from_utf8_lossy(&out.stdout).starts_with("price\t1/2"));
}

#[test]
fn arbitrage_exit_codes() {
    let c = fixture_file("C", None);
    let input = c.to_str().unwrap();
    let na = run(&["--input", input, "na"]);
    assert_eq!(na.status.code(), Some(3));
    let v = json(&na);
    assert_eq!(v["holds"], false);
    assert_eq!(v["node"], "");
    assert_eq!(v["certificate"][0], "1");
    assert_eq!(run(&["--input", input, "price"]).status.code(), Some(3));
    assert_eq!(run(&["--input", input, "dual"]).status.code(), Some(3));
    let a = fixture_file("A", None);
    assert_eq!(run(&["--input", a.to_str().unwrap(), "na"]).status.code(), Some(0));
}

#[test]
fn usage_and_input_errors() {
    assert_eq!(run(&["price", "--mode", "bogus"]).status.code(), Some(2));
    assert_eq!(run(&["fixture", "--name", "Z"]).status.code(), Some(2));
    assert_eq!(run(&["fixture", "--name", "B", "--param", "0"]).status.code(), Some(2));
    let bad = run_stdin(&["validate"], b"{");
    assert_eq!(bad.status.code(), Some(2));
    let weights = run(&["fixture", "--name", "A"]).stdout;
    let broken = String::from_utf8(weights).unwrap().replacen("\"1/2\"", "\"1/3\"", 1);
    let out = run_stdin(&["validate"], broken.as_bytes());
    assert_eq!(out.status.code(), Some(2));
    assert!(!out.stderr.is_empty());
}

#[test]
fn capacity_guard() {
    let d = fixture_file("D", Some("3"));
    let out = run(&["--input", d.to_str().unwrap(), "--cap", "2", "price", "--mode", "lower"]);
    assert_eq!(out.status.code(), Some(4));
    let out = bin()
        .env("ROBUSTHEDGE_CAP", "2")
        .args(["--input", d.to_str().unwrap(), "price", "--mode", "lower"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(4));
}

#[test]
fn supports_and_dual() {
    let b = fixture_file("B", Some("2"));
    let input = b.to_str().unwrap();
    let s = json(&run(&["--input", input, "supports"]));
    assert_eq!(s[""]["points"], serde_json::json!([["-1"], ["3/2"], ["2"]]));
    let d = json(&run(&["--input", input, "dual"]));
    assert_eq!(d["value"], "2/5");
    assert_eq!(d["evidence"]["holds"], true);
}

#[test]
fn constructions_emit_market_files() {
    let d = fixture_file("D", Some("0"));
    let input = d.to_str().unwrap();
    for what in ["ptilde", "phat", "family", "repair"] {
        let out = run(&["--input", input, "construct", "--what", what]);
        assert_eq!(out.status.code(), Some(0), "{what}");
        let roundtrip = run_stdin(&["validate"], &out.stdout);
        assert_eq!(roundtrip.status.code(), Some(0), "{what}");
    }
    let bad = run(&["--input", input, "construct", "--what", "family", "--lambda", "3/2"]);
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn chain_verification() {
    let d = fixture_file("D", Some("0"));
    let out = run(&["--input", d.to_str().unwrap(), "verify-chain"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["all_pass"], true);
    assert_eq!(v["value"], "47/25");
    let out = run(&["verify-random", "--count", "4", "--seed", "9", "--max-horizon", "2"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["passed"], 4);
}
