//! Synthetic workloads and the plain-text workload file format.
//!
//! Jobs arrive as a Poisson process of rate `lambda`; each per-tier
//! execution time is drawn from `Exp(mu)`. The waiting-time allowance of a
//! job is a fixed fraction of its total execution time.
//!
//! Random streams: the generator is ChaCha8 seeded from the 64-bit seed.
//! Stream 0 draws inter-arrival times and stream `1 + j` draws the execution
//! times of tier `j`, so adding a tier never perturbs the arrivals or the
//! earlier tiers.
//!
//! File format (version 1), whitespace separated:
//!
//! ```text
//! #tiersla-workload v1
//! tiers 2
//! fields id arrival e1 e2 target
//! 1 0.4213 1.07 0.33 2.12
//! ```
//!
//! Floats are written with the shortest representation that parses back to
//! the same value, so `load(save(x)) == x` bit for bit.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{Job, JobId, JobSet, ModelError};

pub const FORMAT_HEADER: &str = "#tiersla-workload";
pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum WorkloadError {
    #[error("invalid workload spec: {0}")]
    Spec(String),
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("unsupported workload schema version {found} (expected {FORMAT_VERSION})")]
    Version { found: String },
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WorkloadSpec {
    pub arrival_rate: f64,
    pub service_rate: f64,
    pub num_jobs: usize,
    pub allowance_fraction: f64,
    pub seed: u64,
}

impl Default for WorkloadSpec {
    fn default() -> Self {
        Self {
            arrival_rate: 2.0,
            service_rate: 1.0,
            num_jobs: 100,
            allowance_fraction: 0.2,
            seed: 1,
        }
    }
}

impl WorkloadSpec {
    pub fn check(&self) -> Result<(), WorkloadError> {
        let finite_pos = |v: f64| v.is_finite() && v > 0.0;
        if !finite_pos(self.arrival_rate) {
            return Err(WorkloadError::Spec(format!(
                "arrival rate {} must be positive",
                self.arrival_rate
            )));
        }
        if !finite_pos(self.service_rate) {
            return Err(WorkloadError::Spec(format!(
                "service rate {} must be positive",
                self.service_rate
            )));
        }
        if self.num_jobs == 0 {
            return Err(WorkloadError::Spec("at least one job is required".into()));
        }
        if !(self.allowance_fraction.is_finite() && self.allowance_fraction >= 0.0) {
            return Err(WorkloadError::Spec(format!(
                "allowance fraction {} must be non-negative",
                self.allowance_fraction
            )));
        }
        Ok(())
    }
}

fn stream(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Draws `spec.num_jobs` jobs for an environment of `num_tiers` tiers.
pub fn generate(spec: &WorkloadSpec, num_tiers: usize) -> Result<JobSet, WorkloadError> {
    spec.check()?;
    if num_tiers == 0 {
        return Err(ModelError::NoTiers.into());
    }
    let inter = Exp::new(spec.arrival_rate).map_err(|e| WorkloadError::Spec(e.to_string()))?;
    let service = Exp::new(spec.service_rate).map_err(|e| WorkloadError::Spec(e.to_string()))?;

    let mut arrivals_rng = stream(spec.seed, 0);
    let mut t = 0.0;
    let arrivals: Vec<f64> = (0..spec.num_jobs)
        .map(|_| {
            t += inter.sample(&mut arrivals_rng);
            t
        })
        .collect();

    let mut exec = vec![Vec::with_capacity(num_tiers); spec.num_jobs];
    for tier in 0..num_tiers {
        let mut rng = stream(spec.seed, 1 + tier as u64);
        for e in exec.iter_mut() {
            e.push(positive_sample(&service, &mut rng));
        }
    }

    let jobs = arrivals
        .into_iter()
        .zip(exec)
        .enumerate()
        .map(|(i, (arrival, exec))| {
            let et: f64 = exec.iter().sum();
            let target = arrival + et + spec.allowance_fraction * et;
            Job::new(JobId::from_index(i), arrival, exec, target)
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(JobSet::new(num_tiers, jobs)?)
}

// Exp can return exactly 0.0; execution times must be strictly positive.
fn positive_sample<R: Rng>(d: &Exp<f64>, rng: &mut R) -> f64 {
    loop {
        let x = d.sample(rng);
        if x > 0.0 {
            return x;
        }
    }
}

pub fn to_string(jobs: &JobSet) -> String {
    let tiers = jobs.num_tiers();
    let mut out = String::new();
    let _ = writeln!(out, "{FORMAT_HEADER} v{FORMAT_VERSION}");
    let _ = writeln!(out, "tiers {tiers}");
    let mut fields = String::from("fields id arrival");
    for j in 1..=tiers {
        let _ = write!(fields, " e{j}");
    }
    let _ = writeln!(out, "{fields} target");
    for job in jobs.iter() {
        let _ = write!(out, "{} {}", job.id.0, job.arrival);
        for e in &job.exec {
            let _ = write!(out, " {e}");
        }
        let _ = writeln!(out, " {}", job.target_completion);
    }
    out
}

pub fn from_str(text: &str) -> Result<JobSet, WorkloadError> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(n, l)| (n + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty());
    let parse_err = |line: usize, msg: String| WorkloadError::Parse { line, msg };

    let (n, header) = lines.next().ok_or_else(|| parse_err(1, "empty file".into()))?;
    let version = header
        .strip_prefix(FORMAT_HEADER)
        .map(str::trim)
        .ok_or_else(|| parse_err(n, format!("expected `{FORMAT_HEADER} v{FORMAT_VERSION}` header")))?;
    if version != format!("v{FORMAT_VERSION}") {
        return Err(WorkloadError::Version {
            found: version.to_string(),
        });
    }

    let (n, tiers_line) = lines
        .next()
        .ok_or_else(|| parse_err(n + 1, "missing `tiers` line".into()))?;
    let tiers: usize = tiers_line
        .strip_prefix("tiers")
        .and_then(|v| v.trim().parse().ok())
        .filter(|&t| t > 0)
        .ok_or_else(|| parse_err(n, format!("malformed tiers line `{tiers_line}`")))?;

    let (n, fields_line) = lines
        .next()
        .ok_or_else(|| parse_err(n + 1, "missing `fields` line".into()))?;
    let mut expected = vec!["fields".to_string(), "id".into(), "arrival".into()];
    expected.extend((1..=tiers).map(|j| format!("e{j}")));
    expected.push("target".into());
    if fields_line.split_whitespace().ne(expected.iter().map(String::as_str)) {
        return Err(parse_err(n, format!("expected `{}`", expected.join(" "))));
    }

    let mut jobs = Vec::new();
    for (n, line) in lines {
        if line.starts_with('#') {
            continue;
        }
        let cols: Vec<&str> = line.split_whitespace().collect();
        if cols.len() != tiers + 3 {
            return Err(parse_err(
                n,
                format!("expected {} columns, found {}", tiers + 3, cols.len()),
            ));
        }
        let id: u32 = cols[0]
            .parse()
            .map_err(|_| parse_err(n, format!("bad job id `{}`", cols[0])))?;
        let num = |s: &str| s.parse::<f64>().map_err(|_| parse_err(n, format!("bad number `{s}`")));
        let arrival = num(cols[1])?;
        let exec = cols[2..2 + tiers]
            .iter()
            .map(|s| num(s))
            .collect::<Result<Vec<_>, _>>()?;
        let target = num(cols[2 + tiers])?;
        let job = Job::new(JobId(id), arrival, exec, target).map_err(|e| parse_err(n, e.to_string()))?;
        jobs.push(job);
    }
    Ok(JobSet::new(tiers, jobs)?)
}

pub fn save(jobs: &JobSet, path: impl AsRef<Path>) -> Result<(), WorkloadError> {
    fs::write(path, to_string(jobs))?;
    Ok(())
}

pub fn load(path: impl AsRef<Path>) -> Result<JobSet, WorkloadError> {
    from_str(&fs::read_to_string(path)?)
}
