//! Versioned report files.
//!
//! Human-readable tables are tab-separated with a `#tiersla-<name> v1`
//! first line. Machine records are JSON lines carrying a `schema` field.
//! Floats are written in shortest round-trip form.

use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::Path;

use serde::Serialize;
use serde_json::{json, Value};

use crate::experiment::{CompareReport, RunReport, RunSummary};
use crate::sim::trace_to_string;

pub const SUMMARY_SCHEMA: &str = "tiersla.summary/1";
pub const JOB_SCHEMA: &str = "tiersla.job/1";
pub const GENERATION_SCHEMA: &str = "tiersla.generation/1";
pub const EPOCH_SCHEMA: &str = "tiersla.epoch/1";
pub const COMPARE_SCHEMA: &str = "tiersla.compare/1";
pub const COMPARE_RUN_SCHEMA: &str = "tiersla.compare-run/1";
pub const COMPARE_JOB_SCHEMA: &str = "tiersla.compare-job/1";

/// Writes `value` as a JSON object with an added `schema` field.
fn record<T: Serialize>(schema: &str, value: &T) -> String {
    let mut obj = serde_json::Map::new();
    obj.insert("schema".into(), Value::String(schema.into()));
    if let Value::Object(fields) = serde_json::to_value(value).expect("report types serialize") {
        obj.extend(fields);
    }
    Value::Object(obj).to_string()
}

fn opt(v: Option<f64>) -> String {
    v.map_or_else(|| "NA".to_string(), |x| x.to_string())
}

pub const SUMMARY_COLUMNS: [&str; 14] = [
    "scenario",
    "policy",
    "mode",
    "seed",
    "jobs",
    "initial_violation",
    "enhanced_violation",
    "violation_improvement_pct",
    "initial_penalty",
    "enhanced_penalty",
    "penalty_improvement_pct",
    "mean_violation",
    "max_violation",
    "evaluations",
];

pub fn summary_table(s: &RunSummary) -> String {
    let mut out = format!("#tiersla-summary v1\n{}\n", SUMMARY_COLUMNS.join("\t"));
    let scenario = serde_json::to_value(s.scenario).expect("serializes");
    let _ = writeln!(
        out,
        "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}",
        scenario.as_str().unwrap_or_default(),
        s.policy,
        s.mode,
        s.seed,
        s.jobs,
        s.initial_violation,
        s.enhanced_violation,
        opt(s.violation_improvement_pct),
        s.initial_penalty,
        s.enhanced_penalty,
        opt(s.penalty_improvement_pct),
        s.mean_violation,
        s.max_violation,
        s.evaluations
    );
    out
}

pub fn jobs_jsonl(r: &RunReport) -> String {
    r.jobs.iter().map(|j| record(JOB_SCHEMA, j) + "\n").collect()
}

pub fn history_jsonl(r: &RunReport) -> String {
    let gens = r.generations.iter().map(|g| record(GENERATION_SCHEMA, g) + "\n");
    let epochs = r.epochs.iter().map(|e| record(EPOCH_SCHEMA, e) + "\n");
    gens.chain(epochs).collect()
}

/// Writes `summary.tsv`, `summary.jsonl`, `jobs.jsonl`, `history.jsonl`
/// and, when recorded, `trace.log` into `dir`.
pub fn write_run(dir: &Path, r: &RunReport) -> io::Result<()> {
    fs::create_dir_all(dir)?;
    fs::write(dir.join("summary.tsv"), summary_table(&r.summary))?;
    fs::write(dir.join("summary.jsonl"), record(SUMMARY_SCHEMA, &r.summary) + "\n")?;
    fs::write(dir.join("jobs.jsonl"), jobs_jsonl(r))?;
    fs::write(dir.join("history.jsonl"), history_jsonl(r))?;
    if !r.trace.is_empty() {
        fs::write(dir.join("trace.log"), trace_to_string(&r.trace))?;
    }
    Ok(())
}

pub fn compare_table(c: &CompareReport) -> String {
    let mut out = String::from(
        "#tiersla-compare v1\npolicy\tseeds\ttotal_violation\tmean_violation\tmax_violation\ttotal_penalty\n",
    );
    for row in &c.rows {
        let _ = writeln!(
            out,
            "{}\t{}\t{}\t{}\t{}\t{}",
            row.policy, row.seeds, row.total_violation, row.mean_violation, row.max_violation, row.total_penalty
        );
    }
    out
}

/// Writes `compare.tsv`, `compare.jsonl` (rows), `compare_runs.jsonl`
/// (per policy and seed) and `compare_jobs.jsonl` (per job) into `dir`.
pub fn write_compare(dir: &Path, c: &CompareReport) -> io::Result<()> {
    fs::create_dir_all(dir)?;
    fs::write(dir.join("compare.tsv"), compare_table(c))?;
    let rows: String = c.rows.iter().map(|r| record(COMPARE_SCHEMA, r) + "\n").collect();
    fs::write(dir.join("compare.jsonl"), rows)?;
    let mut runs = String::new();
    let mut jobs = String::new();
    for run in &c.runs {
        let _ = writeln!(
            runs,
            "{}",
            json!({
                "schema": COMPARE_RUN_SCHEMA,
                "policy": run.policy,
                "seed": run.seed,
                "total_violation": run.total_violation,
                "mean_violation": run.mean_violation,
                "max_violation": run.max_violation,
                "total_penalty": run.total_penalty,
            })
        );
        for j in &run.jobs {
            let _ = writeln!(
                jobs,
                "{}",
                json!({
                    "schema": COMPARE_JOB_SCHEMA,
                    "policy": run.policy,
                    "seed": run.seed,
                    "job": j.job,
                    "alpha": j.alpha,
                    "penalty": j.penalty,
                    "response_time": j.response_time,
                    "waits": j.waits,
                })
            );
        }
    }
    fs::write(dir.join("compare_runs.jsonl"), runs)?;
    fs::write(dir.join("compare_jobs.jsonl"), jobs)?;
    Ok(())
}
