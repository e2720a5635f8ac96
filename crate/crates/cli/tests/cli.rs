use std::io::Write;
use std::path::PathBuf;
use std::process::{Command, Output, Stdio};

use serde_json::Value;

fn fixture(name: &str) -> String {
    let p: PathBuf = [env!("CARGO_MANIFEST_DIR"), "..", "core", "tests", "fixtures", name].iter().collect();
    p.to_string_lossy().into_owned()
}

fn zdyn(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_zdyn")).args(args).output().expect("binary runs")
}

fn zdyn_stdin(args: &[&str], input: &[u8]) -> Output {
    let mut child = Command::new(env!("CARGO_BIN_EXE_zdyn"))
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .expect("binary runs");
    child.stdin.take().unwrap().write_all(input).unwrap();
    child.wait_with_output().unwrap()
}

fn json(args: &[&str]) -> (i32, Value) {
    let mut all = vec!["--format", "json"];
    all.extend_from_slice(args);
    let out = zdyn(&all);
    let v = serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!("{e}: {}{}", String::from_utf8_lossy(&out.stdout), String::from_utf8_lossy(&out.stderr))
    });
    (out.status.code().unwrap(), v)
}

#[test]
fn validate_accepts_every_good_fixture() {
    for f in [
        "fib.covering",
        "fib0.cover",
        "fib.bratteli",
        "fib.monograph",
        "fib.seed",
        "fib.substitution",
        "example2.covering",
        "example2.bratteli",
        "example2.monograph",
        "non-nesting.bratteli",
    ] {
        let out = zdyn(&["validate", &fixture(f)]);
        assert_eq!(out.status.code(), Some(0), "{f}");
    }
}

#[test]
fn input_errors_exit_two() {
    let gap = zdyn(&["validate", &fixture("rank-gap.monograph")]);
    assert_eq!(gap.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&gap.stderr).contains("rank gap"));
    let cut = zdyn(&["validate", &fixture("truncated.covering")]);
    assert_eq!(cut.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&cut.stderr).contains("syntax error at line 1"));
    assert_eq!(zdyn(&["validate", "/nonexistent/file"]).status.code(), Some(2));
    let bad_seq = zdyn(&["check", "regulated", "--l-seq", "2,1", &fixture("fib.covering")]);
    assert_eq!(bad_seq.status.code(), Some(2));
}

#[test]
fn continuity_verdicts_and_exit_codes() {
    let (code, v) = json(&["check", "continuity", &fixture("example2.monograph")]);
    assert_eq!(code, 0);
    assert_eq!(v["verdict"], "HOLDS");
    assert_eq!(v["witnesses"]["psi"]["e_e"], "e_d");
    let (code, v) = json(&["check", "continuity", &fixture("conflict.monograph")]);
    assert_eq!(code, 1);
    assert_eq!(v["verdict"], "FAILS");
    let human = zdyn(&["check", "continuity", &fixture("example2.monograph")]);
    assert!(String::from_utf8_lossy(&human.stdout).starts_with("continuity: HOLDS"));
}

#[test]
fn round_trip_through_stdin() {
    for f in ["fib.covering", "example2.covering"] {
        let bv = zdyn(&["convert", "to-bv", &fixture(f)]);
        assert_eq!(bv.status.code(), Some(0));
        let back = zdyn_stdin(&["--format", "json", "convert", "to-covering", "-", "--against", &fixture(f)], &bv.stdout);
        assert_eq!(back.status.code(), Some(0), "{}", String::from_utf8_lossy(&back.stderr));
        let v: Value = serde_json::from_slice(&back.stdout).unwrap();
        assert_eq!(v["verdict"], "HOLDS");
    }
}

#[test]
fn vershik_walks_successors() {
    let (code, v) = json(&["vershik", "--depth", "4", "--steps", "5", "--from-min", "a", &fixture("fib.bratteli")]);
    assert_eq!(code, 0);
    let paths = v["witnesses"]["paths"].as_array().unwrap();
    assert_eq!(paths.len(), 6);
    assert!(paths.iter().all(|p| p.as_array().unwrap().len() == 4));
    let start: Vec<&str> = paths[1].as_array().unwrap().iter().map(|x| x.as_str().unwrap()).collect();
    let (_, w) = json(&["vershik", "--depth", "4", "--steps", "4", "--path", &start.join(","), &fixture("fib.bratteli")]);
    assert_eq!(w["witnesses"]["paths"].as_array().unwrap()[..], paths[1..]);
}

#[test]
fn checks_report_expected_verdicts() {
    let cases: &[(&[&str], &str, i32)] = &[
        (&["check", "closing", "example2.covering"], "HOLDS", 0),
        (&["check", "closing", "non-loop.covering"], "FAILS", 1),
        (&["check", "overlap", "example2.covering"], "BIJECTIVE", 0),
        (&["check", "overlap", "fib0.cover"], "BIJECTIVE", 0),
        (&["check", "nesting", "--level", "2", "example2.bratteli"], "HOLDS", 0),
        (&["check", "nesting", "--level", "1", "non-nesting.bratteli"], "FAILS", 1),
        (&["check", "recoding", "--level", "1", "--radius", "2", "example2.covering"], "DETERMINED", 0),
        (&["check", "recoding", "--level", "1", "--radius", "2", "collision.covering"], "AMBIGUOUS", 1),
        (&["check", "regulated", "--l-seq", "1,2,3,...", "--level", "4", "fib.covering"], "FAILS", 1),
    ];
    for (args, verdict, exit) in cases {
        let mut a: Vec<String> = args.iter().map(|s| s.to_string()).collect();
        let last = a.pop().unwrap();
        a.push(fixture(&last));
        let refs: Vec<&str> = a.iter().map(String::as_str).collect();
        let (code, v) = json(&refs);
        assert_eq!((code, v["verdict"].as_str().unwrap()), (*exit, *verdict), "{args:?}");
    }
}

#[test]
fn straighten_reports_power() {
    let (code, v) = json(&["straighten", &fixture("fib0.cover")]);
    assert_eq!(code, 0);
    assert_eq!(v["witnesses"]["k"], 2);
    assert_eq!(v["witnesses"]["document"]["emap"]["a"], serde_json::json!(["a", "b", "a"]));
    let human = zdyn(&["straighten", &fixture("fib0.cover")]);
    assert!(String::from_utf8_lossy(&human.stderr).contains("K = 2"));
    let doc: Value = serde_json::from_slice(&human.stdout).unwrap();
    assert_eq!(doc["kind"], "covering");
}

#[test]
fn telescope_and_paths() {
    let tel = zdyn(&["telescope", "--every", "2", &fixture("fib.covering")]);
    let doc: Value = serde_json::from_slice(&tel.stdout).unwrap();
    assert_eq!(doc["emap"]["a"].as_array().unwrap().len(), 8);
    let (_, v) = json(&["paths", "--depth", "3", &fixture("fib.bratteli")]);
    let counts: Vec<u64> =
        v["witnesses"]["vertices"].as_array().unwrap().iter().map(|x| x["count"].as_u64().unwrap()).collect();
    assert_eq!(counts, vec![8, 5]);
}

#[test]
fn arrays_and_substitutions() {
    let (code, v) = json(&["array", "--seed-file", &fixture("fib.seed"), "--start", "-3", "--end", "5", &fixture("fib.covering")]);
    assert_eq!(code, 0, "{v}");
    assert_eq!(v["witnesses"]["rows"].as_array().unwrap().len(), 3);
    let (_, s) = json(&["subst", "--max-len", "2", &fixture("fib.substitution")]);
    assert_eq!(s["witnesses"]["language"], serde_json::json!(["a", "aa", "ab", "b", "ba"]));
    let (code, w) = json(&["subst", "--word", "b,b", "--depth-max", "5", &fixture("fib.covering")]);
    assert_eq!((code, w["verdict"].as_str().unwrap()), (0, "UNKNOWN"));
}

#[test]
fn towers_krieger_dot() {
    let (code, _) = json(&["towers", "--level", "2", &fixture("example2.covering")]);
    assert_eq!(code, 0);
    let (code, k) = json(&["krieger", "--level", "3", "--period", "2", &fixture("example2.covering")]);
    assert_eq!((code, k["verdict"].as_str().unwrap()), (0, "HOLDS"));
    let dot = zdyn(&["dot", "--depth", "2", &fixture("fib.bratteli")]);
    let text = String::from_utf8_lossy(&dot.stdout);
    assert!(text.starts_with("digraph"));
    assert_eq!(text.matches("->").count(), 7);
    assert_eq!(zdyn(&["dot", &fixture("fib.seed")]).status.code(), Some(2));
}
