use std::fs;
use std::process::{Command, Output};

fn pdalm(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pdalm"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn list_problems_names_every_entry() {
    let o = pdalm(&["list-problems"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    for e in pdalm::corpus::corpus() {
        assert!(out.contains(e.name), "{}", e.name);
    }
}

#[test]
fn solve_prints_summary_and_trace() {
    let dir = tempfile::tempdir().unwrap();
    let trace = dir.path().join("trace.json");
    let o = pdalm(&["solve", "circle_corner", "--mode", "pdalm", "--trace", trace.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).contains("kkt_satisfied"));
    let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(&trace).unwrap()).unwrap();
    assert_eq!(v["problem"], "circle_corner");
    assert!(!v["trace"].as_array().unwrap().is_empty());
}

#[test]
fn bench_writes_csv_to_stdout() {
    let o = pdalm(&["bench", "--problems", "hs6,hs7", "--modes", "pdalm,alm"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let rows = pdalm_bench::read_csv(o.stdout.as_slice()).unwrap();
    let keys: Vec<_> = rows.iter().map(|r| (r.problem.as_str(), r.mode.as_str())).collect();
    assert_eq!(keys, vec![("hs6", "alm"), ("hs6", "pdalm"), ("hs7", "alm"), ("hs7", "pdalm")]);
    assert!(stderr(&o).contains("performance profile"));
}

#[test]
fn bench_writes_json_file() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("runs.json");
    let o = pdalm(&["bench", "--problems", "hs6", "--modes", "alm", "--out", out.to_str().unwrap(), "--format", "json"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(v.as_array().unwrap().len(), 1);
}

#[test]
fn validate_accepts_corpus_problem() {
    let o = pdalm(&["validate", "hs39"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("ok"));
}

#[test]
fn usage_and_config_errors_exit_with_one() {
    assert_eq!(pdalm(&[]).status.code(), Some(1));
    assert_eq!(pdalm(&["solve"]).status.code(), Some(1));
    assert_eq!(pdalm(&["solve", "no_such_problem"]).status.code(), Some(1));
    assert_eq!(pdalm(&["solve", "hs6", "--mode", "fast"]).status.code(), Some(1));
    assert_eq!(pdalm(&["bench", "--format", "xml"]).status.code(), Some(1));

    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.cfg");
    fs::write(&cfg, "# settings\nunknown_key = 3\n").unwrap();
    let o = pdalm(&["solve", "hs6", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("line 2"));
    assert!(stderr(&o).contains("unknown_key"));

    fs::write(&cfg, "beta = 1.5\n").unwrap();
    let o = pdalm(&["bench", "--problems", "hs6", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("beta must lie in (0,1)"));

    assert_eq!(pdalm(&["solve", "hs6", "--config", "/no/such/file"]).status.code(), Some(1));
}

#[test]
fn help_exits_cleanly() {
    let o = pdalm(&["--help"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("bench"));
}

#[test]
fn unwritable_output_is_an_internal_error() {
    let o = pdalm(&["bench", "--problems", "hs6", "--out", "/no/such/dir/out.csv"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn config_file_applies() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("ok.cfg");
    fs::write(&cfg, "max_outer = 1   # stop early\nmode = alm\n").unwrap();
    let o = pdalm(&["solve", "hs39", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(out.contains("max_outer"));
    assert!(out.contains("alm"));
}
