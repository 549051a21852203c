use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn tiersla(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tiersla"))
        .args(args)
        .env_remove("TIERSLA_SEED")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn jsonl(path: &Path) -> Vec<Value> {
    std::fs::read_to_string(path)
        .unwrap()
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect()
}

#[test]
fn generate_is_reproducible_and_loadable() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("w.txt");
    let a = tiersla(&["generate", "--jobs", "20", "--seed", "4"]);
    assert!(a.status.success());
    let b = tiersla(&[
        "generate",
        "--jobs",
        "20",
        "--seed",
        "4",
        "--out",
        file.to_str().unwrap(),
    ]);
    assert!(b.status.success());
    assert_eq!(stdout(&a), std::fs::read_to_string(&file).unwrap());
    assert!(stdout(&a).starts_with("#tiersla-workload v1\n"));

    let run = tiersla(&[
        "run",
        "--policy",
        "wlc",
        "--workload",
        file.to_str().unwrap(),
        "--generations",
        "5",
    ]);
    assert!(run.status.success(), "{}", String::from_utf8_lossy(&run.stderr));
    assert!(stdout(&run).contains("\twlc\twal\t"));
}

#[test]
fn snapshot_run_writes_reports() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");
    let o = tiersla(&[
        "run",
        "--jobs",
        "60",
        "--lambda",
        "6",
        "--generations",
        "50",
        "--mode",
        "wpt",
        "--out-dir",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("#tiersla-summary v1"));
    assert!(lines.next().unwrap().starts_with("scenario\tpolicy\tmode"));
    assert!(lines.next().unwrap().starts_with("snapshot\tga-virtualized\twpt\t1\t"));

    let summary = &jsonl(&out.join("summary.jsonl"))[0];
    assert_eq!(summary["schema"], "tiersla.summary/1");
    assert_eq!(summary["evaluations"], 500);
    assert!(summary["enhanced_violation"].as_f64().unwrap() <= summary["initial_violation"].as_f64().unwrap());
    let history = jsonl(&out.join("history.jsonl"));
    assert_eq!(history.len(), 50);
    assert!(history.iter().all(|h| h["schema"] == "tiersla.generation/1"));
    let jobs = jsonl(&out.join("jobs.jsonl"));
    assert_eq!(jobs.len() as u64, summary["jobs"].as_u64().unwrap());
}

#[test]
fn stream_run_with_trace() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("s");
    let o = tiersla(&[
        "run",
        "--scenario",
        "stream",
        "--jobs",
        "15",
        "--generations",
        "20",
        "--epoch",
        "arrivals:3",
        "--trace",
        "--policy",
        "ga-segmented-wal",
        "--out-dir",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let trace = std::fs::read_to_string(out.join("trace.log")).unwrap();
    assert!(trace.starts_with("#tiersla-trace v1\n"));
    assert_eq!(jsonl(&out.join("jobs.jsonl")).len(), 15);
    assert!(jsonl(&out.join("history.jsonl"))
        .iter()
        .all(|h| h["schema"] == "tiersla.epoch/1"));
}

#[test]
fn compare_single_policy_matches_run() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("c");
    let args = ["--jobs", "30", "--lambda", "2.5", "--generations", "30"];
    let mut cmp = vec![
        "compare",
        "--policies",
        "ga-virtualized-wpt",
        "--seeds",
        "7",
        "--out-dir",
        out.to_str().unwrap(),
    ];
    cmp.extend(args);
    let o = tiersla(&cmp);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).starts_with("#tiersla-compare v1\n"));
    let row = &jsonl(&out.join("compare.jsonl"))[0];

    let run_dir = dir.path().join("r");
    let mut run = vec![
        "run",
        "--scenario",
        "stream",
        "--policy",
        "ga-virtualized-wpt",
        "--seed",
        "7",
        "--out-dir",
    ];
    run.push(run_dir.to_str().unwrap());
    run.extend(args);
    assert!(tiersla(&run).status.success());
    let summary = &jsonl(&run_dir.join("summary.jsonl"))[0];
    assert_eq!(row["total_violation"], summary["enhanced_violation"]);
    assert_eq!(row["max_violation"], summary["max_violation"]);
}

#[test]
fn compare_parallel_sweep_is_deterministic() {
    let args = [
        "compare",
        "--jobs",
        "25",
        "--generations",
        "10",
        "--seeds",
        "1-4",
        "--policies",
        "wrr,wlc,ga",
    ];
    let a = tiersla(&args);
    assert!(a.status.success());
    assert_eq!(stdout(&a), stdout(&tiersla(&args)));
    assert_eq!(stdout(&a).lines().count(), 5);
}

#[test]
fn env_vars_override_defaults() {
    let o = Command::new(env!("CARGO_BIN_EXE_tiersla"))
        .args(["run", "--policy", "fcfs"])
        .env("TIERSLA_JOBS", "12")
        .env("TIERSLA_SEED", "3")
        .output()
        .unwrap();
    assert!(o.status.success());
    let row: Vec<String> = stdout(&o)
        .lines()
        .nth(2)
        .unwrap()
        .split('\t')
        .map(String::from)
        .collect();
    assert_eq!(row[3], "3");
    // fcfs never reorders: initial equals enhanced
    assert_eq!(row[5], row[6]);
}

#[test]
fn exit_codes() {
    assert_eq!(tiersla(&["run", "--bogus"]).status.code(), Some(2));
    assert_eq!(tiersla(&["run", "--policy", "minmin"]).status.code(), Some(3));
    assert_eq!(tiersla(&["run", "--lambda=-1"]).status.code(), Some(3));
    assert_eq!(
        tiersla(&["run", "--workload", "/nonexistent/w.txt"]).status.code(),
        Some(3)
    );
    assert_eq!(tiersla(&["run", "--resources", "1,2,3"]).status.code(), Some(3));
    assert_eq!(tiersla(&["compare", "--seeds", "9-2"]).status.code(), Some(3));

    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("w.txt");
    std::fs::write(
        &file,
        "#tiersla-workload v1\ntiers 2\nfields id arrival e1 e2 target\n1 0 1 -2 5\n",
    )
    .unwrap();
    let o = tiersla(&["run", "--workload", file.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 4"));
}
