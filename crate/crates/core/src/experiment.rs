//! End-to-end experiment pipelines: generate a workload, simulate it under a
//! dispatch policy, optionally optimize with the GA, and summarize.
//!
//! Two scenarios exist. A *snapshot* run freezes the simulator at one
//! instant and optimizes that frozen state once. A *stream* run simulates
//! the whole stream with the GA rescheduling online at every epoch, and
//! compares against the same stream without the optimizer.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::baselines::{Baseline, PolicyKind};
use crate::ga::{self, EpochRecord, GaConfig, GaError, GaOutcome, GaRescheduler, GenerationStats, QueueMode};
use crate::model::{EnvironmentConfig, JobId, JobSet, Snapshot};
use crate::penalty::{snapshot_breakdown, total_penalty, AllowanceMode, PenaltyError, ViolationBreakdown};
use crate::sim::{self, Epoch, SimError, SimReport, SimState, TraceRecord};
use crate::workload::{self, WorkloadError, WorkloadSpec};

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error(transparent)]
    Ga(#[from] GaError),
    #[error(transparent)]
    Penalty(#[from] PenaltyError),
    #[error(transparent)]
    Workload(#[from] WorkloadError),
    #[error("{0}")]
    Config(String),
}

/// Scheduling strategy under test.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Strategy {
    Baseline(PolicyKind),
    Ga(QueueMode),
}

/// A strategy plus the allowance formulation it is evaluated (and, for the
/// GA, optimized) under.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PolicySpec {
    pub strategy: Strategy,
    pub mode: AllowanceMode,
}

impl PolicySpec {
    pub fn baseline(kind: PolicyKind, mode: AllowanceMode) -> Self {
        Self {
            strategy: Strategy::Baseline(kind),
            mode,
        }
    }

    pub fn ga(queue: QueueMode, mode: AllowanceMode) -> Self {
        Self {
            strategy: Strategy::Ga(queue),
            mode,
        }
    }

    pub fn is_ga(&self) -> bool {
        matches!(self.strategy, Strategy::Ga(_))
    }

    pub fn name(&self) -> String {
        match self.strategy {
            Strategy::Baseline(k) => k.as_str().to_string(),
            Strategy::Ga(q) => format!("ga-{}", q.as_str()),
        }
    }
}

impl fmt::Display for PolicySpec {
    /// `wrr`, `wlc-wpt`, `ga-virtualized-wal`, ...
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}-{}", self.name(), self.mode)
    }
}

/// Parses a policy name with an optional `-wal`/`-wpt` suffix overriding
/// `default_mode`.
pub fn parse_policy(s: &str, default_mode: AllowanceMode) -> Result<PolicySpec, String> {
    let (base, mode) = match s.rsplit_once('-') {
        Some((b, m)) if m.parse::<AllowanceMode>().is_ok() => (b, m.parse().expect("checked")),
        _ => (s, default_mode),
    };
    let strategy = match base {
        "ga-virtualized" | "ga-system" | "ga" => Strategy::Ga(QueueMode::SystemVirtualized),
        "ga-segmented" => Strategy::Ga(QueueMode::Segmented),
        other => Strategy::Baseline(other.parse::<PolicyKind>()?),
    };
    Ok(PolicySpec { strategy, mode })
}

impl FromStr for PolicySpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_policy(s, AllowanceMode::MultiTier)
    }
}

/// Everything but the policy and the seed.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub env: EnvironmentConfig,
    pub workload: WorkloadSpec,
    pub ga: GaConfig,
    pub epoch: Epoch,
    /// Dispatcher placing arriving jobs when a GA policy runs.
    pub ga_dispatch: PolicyKind,
    pub freeze: FreezePoint,
    pub trace: bool,
    /// Use this job set for every seed instead of generating one.
    pub fixed_jobs: Option<Arc<JobSet>>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            env: EnvironmentConfig::default(),
            workload: WorkloadSpec::default(),
            ga: GaConfig::default(),
            epoch: Epoch::EveryEvent,
            ga_dispatch: PolicyKind::Fcfs,
            freeze: FreezePoint::LastArrival,
            trace: false,
            fixed_jobs: None,
        }
    }
}

impl ExperimentConfig {
    /// The job stream of `seed`.
    pub fn jobs_for(&self, seed: u64) -> Result<Arc<JobSet>, ExperimentError> {
        if let Some(jobs) = &self.fixed_jobs {
            if jobs.num_tiers() != self.env.num_tiers() {
                return Err(ExperimentError::Config(format!(
                    "workload has {} tiers, environment has {}",
                    jobs.num_tiers(),
                    self.env.num_tiers()
                )));
            }
            return Ok(Arc::clone(jobs));
        }
        let spec = WorkloadSpec {
            seed,
            ..self.workload.clone()
        };
        Ok(Arc::new(workload::generate(&spec, self.env.num_tiers())?))
    }

    fn dispatch_kind(&self, policy: &PolicySpec) -> PolicyKind {
        match policy.strategy {
            Strategy::Baseline(k) => k,
            Strategy::Ga(_) => self.ga_dispatch,
        }
    }

    fn ga_config(&self, policy: &PolicySpec, seed: u64) -> Option<GaConfig> {
        match policy.strategy {
            Strategy::Ga(queue_mode) => Some(GaConfig {
                queue_mode,
                allowance: policy.mode,
                seed,
                ..self.ga.clone()
            }),
            Strategy::Baseline(_) => None,
        }
    }
}

/// When a snapshot run freezes the simulator.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum FreezePoint {
    /// Right after the `k`-th external arrival.
    AfterArrivals(usize),
    /// At the first event at or after time `t`.
    AtTime(f64),
    /// Right after the last external arrival.
    LastArrival,
}

/// Simulates `jobs` under `dispatcher` and freezes at `at`.
pub fn freeze(
    jobs: Arc<JobSet>,
    env: &EnvironmentConfig,
    dispatcher: &mut dyn sim::Dispatcher,
    at: FreezePoint,
) -> Result<Snapshot, SimError> {
    let total = jobs.len();
    let mut state = SimState::new(jobs, env.clone())?;
    match at {
        FreezePoint::AfterArrivals(k) => state.run_until(dispatcher, None, |s| s.external_arrivals() >= k)?,
        FreezePoint::LastArrival => state.run_until(dispatcher, None, |s| s.external_arrivals() >= total)?,
        FreezePoint::AtTime(t) => state.run_until(dispatcher, None, |s| s.next_event().is_none_or(|e| e.time > t))?,
    }
    Ok(state.snapshot())
}

/// Per-job line of a run report.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct JobReport {
    pub job: JobId,
    /// 1-based tier the job resides in (snapshot runs only).
    pub tier: Option<usize>,
    pub initial_alpha: f64,
    pub alpha: f64,
    pub initial_penalty: f64,
    pub penalty: f64,
    /// Realized response time (stream runs only).
    pub response_time: Option<f64>,
    /// Per-tier waits: realized for stream runs; for snapshot runs the
    /// finalized waits of earlier tiers plus the expected wait in the
    /// current tier.
    pub waits: Vec<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scenario {
    Snapshot,
    Stream,
}

/// Summary record; every number is derivable from the job reports except
/// `evaluations`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub scenario: Scenario,
    pub policy: String,
    pub mode: AllowanceMode,
    pub seed: u64,
    pub jobs: usize,
    pub initial_violation: f64,
    pub enhanced_violation: f64,
    pub violation_improvement_pct: Option<f64>,
    pub initial_penalty: f64,
    pub enhanced_penalty: f64,
    pub penalty_improvement_pct: Option<f64>,
    pub mean_violation: f64,
    pub max_violation: f64,
    pub evaluations: u64,
}

/// Percentage reduction from `initial` to `enhanced`; undefined unless the
/// initial value is positive.
pub fn improvement_pct(initial: f64, enhanced: f64) -> Option<f64> {
    (initial > 0.0).then(|| 100.0 * (initial - enhanced) / initial)
}

impl RunSummary {
    fn from_jobs(scenario: Scenario, policy: &PolicySpec, seed: u64, jobs: &[JobReport], evaluations: u64) -> Self {
        let initial_violation: f64 = jobs.iter().map(|j| j.initial_alpha).sum();
        let enhanced_violation: f64 = jobs.iter().map(|j| j.alpha).sum();
        let initial_penalty: f64 = jobs.iter().map(|j| j.initial_penalty).sum();
        let enhanced_penalty: f64 = jobs.iter().map(|j| j.penalty).sum();
        let n = jobs.len();
        Self {
            scenario,
            policy: policy.name(),
            mode: policy.mode,
            seed,
            jobs: n,
            violation_improvement_pct: improvement_pct(initial_violation, enhanced_violation),
            penalty_improvement_pct: improvement_pct(initial_penalty, enhanced_penalty),
            initial_violation,
            enhanced_violation,
            initial_penalty,
            enhanced_penalty,
            mean_violation: if n == 0 { 0.0 } else { enhanced_violation / n as f64 },
            max_violation: jobs.iter().map(|j| j.alpha).fold(f64::NEG_INFINITY, f64::max),
            evaluations,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub summary: RunSummary,
    pub jobs: Vec<JobReport>,
    /// Convergence of the single optimization (snapshot runs).
    pub generations: Vec<GenerationStats>,
    /// One record per online optimization (stream runs).
    pub epochs: Vec<EpochRecord>,
    pub trace: Vec<TraceRecord>,
    pub incidents: Vec<String>,
}

fn snapshot_jobs(initial: &ViolationBreakdown, enhanced: &ViolationBreakdown, best: &Snapshot) -> Vec<JobReport> {
    initial
        .jobs
        .iter()
        .zip(&enhanced.jobs)
        .map(|(a, b)| {
            debug_assert_eq!(a.job, b.job);
            let p = best.progress(a.job);
            let tier = p.location.tier().expect("resident job");
            let mut waits: Vec<f64> = (0..tier).map(|j| p.wait(j).unwrap_or(0.0)).collect();
            waits.push(crate::penalty::expected_wait_tier(best, a.job, tier).unwrap_or(f64::NAN));
            JobReport {
                job: a.job,
                tier: Some(tier + 1),
                initial_alpha: a.alpha,
                alpha: b.alpha,
                initial_penalty: a.penalty,
                penalty: b.penalty,
                response_time: None,
                waits,
            }
        })
        .collect()
}

/// Optimizes a frozen snapshot under `policy`. Baselines leave the schedule
/// as it is.
pub fn run_on_snapshot(
    snapshot: &Snapshot,
    policy: &PolicySpec,
    cfg: &ExperimentConfig,
    seed: u64,
) -> Result<RunReport, ExperimentError> {
    let initial = snapshot_breakdown(snapshot, policy.mode)?;
    let (best, outcome): (Snapshot, Option<GaOutcome>) = match cfg.ga_config(policy, seed) {
        Some(ga_cfg) => {
            let out = ga::optimize(snapshot, &ga_cfg)?;
            (
                snapshot.with_schedule(out.best.clone()).map_err(PenaltyError::from)?,
                Some(out),
            )
        }
        None => (snapshot.clone(), None),
    };
    let enhanced = total_penalty(snapshot, &best.schedule, policy.mode)?;
    let jobs = snapshot_jobs(&initial, &enhanced, &best);
    let evaluations = outcome.as_ref().map_or(0, |o| o.evaluations);
    Ok(RunReport {
        summary: RunSummary::from_jobs(Scenario::Snapshot, policy, seed, &jobs, evaluations),
        jobs,
        generations: outcome.map(|o| o.history).unwrap_or_default(),
        epochs: Vec::new(),
        trace: Vec::new(),
        incidents: Vec::new(),
    })
}

/// Freezes `jobs` under the policy's dispatcher, then optimizes.
pub fn run_snapshot(
    jobs: Arc<JobSet>,
    policy: &PolicySpec,
    cfg: &ExperimentConfig,
    seed: u64,
) -> Result<RunReport, ExperimentError> {
    let mut dispatcher = Baseline::new(cfg.dispatch_kind(policy), &cfg.env, seed);
    let snapshot = freeze(jobs, &cfg.env, &mut dispatcher, cfg.freeze)?;
    run_on_snapshot(&snapshot, policy, cfg, seed)
}

/// Output of one simulated stream.
pub struct StreamOutcome {
    pub report: SimReport,
    pub epochs: Vec<EpochRecord>,
    pub evaluations: u64,
}

/// Simulates the whole stream under `policy`, with online rescheduling for
/// GA policies.
pub fn simulate_stream(
    jobs: Arc<JobSet>,
    policy: &PolicySpec,
    cfg: &ExperimentConfig,
    seed: u64,
) -> Result<StreamOutcome, ExperimentError> {
    let mut dispatcher = Baseline::new(cfg.dispatch_kind(policy), &cfg.env, seed);
    match cfg.ga_config(policy, seed) {
        Some(ga_cfg) => {
            let mut optimizer = GaRescheduler::new(ga_cfg)?;
            let report = sim::run_with_hook(
                jobs,
                &cfg.env,
                &mut dispatcher,
                Some((&mut optimizer, cfg.epoch)),
                cfg.trace,
            )?;
            if let Some(e) = optimizer.errors().first() {
                return Err(ExperimentError::Config(format!("optimizer failed: {e}")));
            }
            Ok(StreamOutcome {
                evaluations: optimizer.total_evaluations(),
                epochs: optimizer.records().to_vec(),
                report,
            })
        }
        None => {
            let report = sim::run_with_hook(jobs, &cfg.env, &mut dispatcher, None, cfg.trace)?;
            Ok(StreamOutcome {
                report,
                epochs: Vec::new(),
                evaluations: 0,
            })
        }
    }
}

/// Stream run: `initial` is the stream without the optimizer (same
/// dispatcher), `enhanced` the stream as run by `policy`.
pub fn run_stream(
    jobs: Arc<JobSet>,
    policy: &PolicySpec,
    cfg: &ExperimentConfig,
    seed: u64,
) -> Result<RunReport, ExperimentError> {
    let enhanced = simulate_stream(Arc::clone(&jobs), policy, cfg, seed)?;
    let initial_report = if policy.is_ga() {
        let plain = PolicySpec::baseline(cfg.ga_dispatch, policy.mode);
        simulate_stream(
            jobs,
            &plain,
            &ExperimentConfig {
                trace: false,
                ..cfg.clone()
            },
            seed,
        )?
        .report
    } else {
        enhanced.report.clone()
    };
    let a = initial_report.breakdown(policy.mode);
    let b = enhanced.report.breakdown(policy.mode);
    let jobs: Vec<JobReport> = a
        .jobs
        .iter()
        .zip(&b.jobs)
        .zip(&enhanced.report.jobs)
        .map(|((x, y), rec)| JobReport {
            job: y.job,
            tier: None,
            initial_alpha: x.alpha,
            alpha: y.alpha,
            initial_penalty: x.penalty,
            penalty: y.penalty,
            response_time: Some(rec.response_time),
            waits: rec.waits.clone(),
        })
        .collect();
    Ok(RunReport {
        summary: RunSummary::from_jobs(Scenario::Stream, policy, seed, &jobs, enhanced.evaluations),
        jobs,
        generations: Vec::new(),
        epochs: enhanced.epochs,
        trace: enhanced.report.trace,
        incidents: enhanced.report.incidents,
    })
}

/// Generates the workload of `seed` and runs the scenario.
pub fn run_seed(
    scenario: Scenario,
    policy: &PolicySpec,
    cfg: &ExperimentConfig,
    seed: u64,
) -> Result<RunReport, ExperimentError> {
    let jobs = cfg.jobs_for(seed)?;
    match scenario {
        Scenario::Snapshot => run_snapshot(jobs, policy, cfg, seed),
        Scenario::Stream => run_stream(jobs, policy, cfg, seed),
    }
}

/// Realized violation statistics of one (policy, seed) stream.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CompareRun {
    pub policy: String,
    pub seed: u64,
    pub total_violation: f64,
    pub mean_violation: f64,
    pub max_violation: f64,
    pub total_penalty: f64,
    pub jobs: Vec<JobReport>,
}

/// Median over seeds of each statistic for one policy.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CompareRow {
    pub policy: String,
    pub seeds: usize,
    pub total_violation: f64,
    pub mean_violation: f64,
    pub max_violation: f64,
    pub total_penalty: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CompareReport {
    pub rows: Vec<CompareRow>,
    pub runs: Vec<CompareRun>,
}

pub fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    match n {
        0 => f64::NAN,
        _ if n % 2 == 1 => v[n / 2],
        _ => 0.5 * (v[n / 2 - 1] + v[n / 2]),
    }
}

impl CompareRow {
    pub fn from_runs(policy: &str, runs: &[&CompareRun]) -> Self {
        let col = |f: fn(&CompareRun) -> f64| median(&runs.iter().map(|r| f(r)).collect::<Vec<_>>());
        Self {
            policy: policy.to_string(),
            seeds: runs.len(),
            total_violation: col(|r| r.total_violation),
            mean_violation: col(|r| r.mean_violation),
            max_violation: col(|r| r.max_violation),
            total_penalty: col(|r| r.total_penalty),
        }
    }
}

/// Runs every policy on the stream of every seed (seeds in parallel) and
/// tabulates the medians.
pub fn compare(
    policies: &[PolicySpec],
    seeds: &[u64],
    cfg: &ExperimentConfig,
) -> Result<CompareReport, ExperimentError> {
    if seeds.is_empty() {
        return Err(ExperimentError::Config("at least one seed is required".into()));
    }
    if policies.is_empty() {
        return Err(ExperimentError::Config("at least one policy is required".into()));
    }
    let cfg = ExperimentConfig {
        trace: false,
        ..cfg.clone()
    };
    let tasks: Vec<(PolicySpec, u64)> = policies
        .iter()
        .flat_map(|p| seeds.iter().map(move |&s| (*p, s)))
        .collect();
    let runs = tasks
        .par_iter()
        .map(|(policy, seed)| {
            let jobs = cfg.jobs_for(*seed)?;
            let out = simulate_stream(jobs, policy, &cfg, *seed)?;
            let b = out.report.breakdown(policy.mode);
            let jobs = b
                .jobs
                .iter()
                .zip(&out.report.jobs)
                .map(|(v, rec)| JobReport {
                    job: v.job,
                    tier: None,
                    initial_alpha: v.alpha,
                    alpha: v.alpha,
                    initial_penalty: v.penalty,
                    penalty: v.penalty,
                    response_time: Some(rec.response_time),
                    waits: rec.waits.clone(),
                })
                .collect();
            Ok(CompareRun {
                policy: policy.to_string(),
                seed: *seed,
                total_violation: b.total_violation,
                mean_violation: b.mean_violation(),
                max_violation: b.max_violation(),
                total_penalty: b.total_penalty,
                jobs,
            })
        })
        .collect::<Result<Vec<_>, ExperimentError>>()?;
    let rows = policies
        .iter()
        .map(|p| {
            let name = p.to_string();
            let mine: Vec<&CompareRun> = runs.iter().filter(|r| r.policy == name).collect();
            CompareRow::from_runs(&name, &mine)
        })
        .collect();
    Ok(CompareReport { rows, runs })
}
