//! Domain types for the multi-tier environment: jobs, their progress through
//! tiers, resource queues and frozen system snapshots.

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::penalty::PenaltyModel;

/// Absolute tolerance for comparisons between simulated times.
pub const TIME_EPS: f64 = 1e-9;

/// Dense 1-based job identifier. The id is the arrival order of the job.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct JobId(pub u32);

impl JobId {
    /// Zero-based index into a [`JobSet`].
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize - 1
    }

    #[inline]
    pub fn from_index(idx: usize) -> Self {
        JobId(idx as u32 + 1)
    }
}

impl fmt::Display for JobId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "J{}", self.0)
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("environment needs at least one tier")]
    NoTiers,
    #[error("tier {tier} has no resources")]
    EmptyTier { tier: usize },
    #[error("invalid penalty parameters: chi={chi}, nu={nu}")]
    BadPenalty { chi: f64, nu: f64 },
    #[error("job {id}: {reason}")]
    InvalidJob { id: u32, reason: String },
    #[error("job ids must be dense 1..l in arrival order (found {found} at position {position})")]
    NonDenseIds { position: usize, found: u32 },
    #[error("{job} is not queued in tier {tier}")]
    NotInTier { job: JobId, tier: usize },
    #[error("{job} is not resident in any tier")]
    NotResident { job: JobId },
    #[error("unknown {0}")]
    UnknownJob(JobId),
    #[error("schedule rejected: {0}")]
    InvalidSchedule(ValidationReport),
}

/// Shape of the environment plus the SLA penalty parameters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnvironmentConfig {
    resources_per_tier: Vec<usize>,
    pub penalty: PenaltyModel,
}

impl EnvironmentConfig {
    pub fn new(resources_per_tier: Vec<usize>, penalty: PenaltyModel) -> Result<Self, ModelError> {
        if resources_per_tier.is_empty() {
            return Err(ModelError::NoTiers);
        }
        if let Some(tier) = resources_per_tier.iter().position(|&m| m == 0) {
            return Err(ModelError::EmptyTier { tier });
        }
        penalty.check()?;
        Ok(Self {
            resources_per_tier,
            penalty,
        })
    }

    /// `tiers` tiers with `resources` identical resources each.
    pub fn uniform(tiers: usize, resources: usize, penalty: PenaltyModel) -> Result<Self, ModelError> {
        Self::new(vec![resources; tiers], penalty)
    }

    #[inline]
    pub fn num_tiers(&self) -> usize {
        self.resources_per_tier.len()
    }

    #[inline]
    pub fn resources(&self, tier: usize) -> usize {
        self.resources_per_tier[tier]
    }

    pub fn resources_per_tier(&self) -> &[usize] {
        &self.resources_per_tier
    }

    pub fn total_queues(&self) -> usize {
        self.resources_per_tier.iter().sum()
    }
}

impl Default for EnvironmentConfig {
    /// Two tiers of three resources, chi = 1, nu = 0.01.
    fn default() -> Self {
        Self::uniform(2, 3, PenaltyModel::default()).expect("default environment is valid")
    }
}

/// A job of the stream: external arrival, prescribed per-tier execution
/// times and the target completion time agreed in its SLA.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Job {
    pub id: JobId,
    pub arrival: f64,
    pub exec: Vec<f64>,
    pub target_completion: f64,
}

impl Job {
    pub fn new(id: JobId, arrival: f64, exec: Vec<f64>, target_completion: f64) -> Result<Self, ModelError> {
        let job = Self {
            id,
            arrival,
            exec,
            target_completion,
        };
        job.check()?;
        Ok(job)
    }

    fn check(&self) -> Result<(), ModelError> {
        let bad = |reason: String| Err(ModelError::InvalidJob { id: self.id.0, reason });
        if self.id.0 == 0 {
            return bad("ids start at 1".into());
        }
        if !self.arrival.is_finite() || self.arrival < 0.0 {
            return bad(format!("arrival {} must be finite and non-negative", self.arrival));
        }
        if self.exec.is_empty() {
            return bad("no execution times".into());
        }
        if let Some(e) = self.exec.iter().find(|e| !(e.is_finite() && **e > 0.0)) {
            return bad(format!("execution time {e} must be positive"));
        }
        if !self.target_completion.is_finite() {
            return bad("target completion must be finite".into());
        }
        if self.deadline() < self.total_exec() - TIME_EPS {
            return bad(format!(
                "deadline {} is shorter than total execution {}",
                self.deadline(),
                self.total_exec()
            ));
        }
        Ok(())
    }

    #[inline]
    pub fn exec_at(&self, tier: usize) -> f64 {
        self.exec[tier]
    }

    pub fn total_exec(&self) -> f64 {
        self.exec.iter().sum()
    }

    /// Service deadline relative to the external arrival.
    pub fn deadline(&self) -> f64 {
        self.target_completion - self.arrival
    }

    /// Total waiting-time allowance over all tiers. Clamped at zero to absorb
    /// rounding on jobs generated with a zero allowance.
    pub fn allowance(&self) -> f64 {
        (self.deadline() - self.total_exec()).max(0.0)
    }
}

/// The stream of jobs, indexed by `JobId::index`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct JobSet {
    num_tiers: usize,
    jobs: Vec<Job>,
}

impl JobSet {
    /// Validates every job plus the dense arrival-ordered id invariant.
    pub fn new(num_tiers: usize, jobs: Vec<Job>) -> Result<Self, ModelError> {
        if num_tiers == 0 {
            return Err(ModelError::NoTiers);
        }
        let mut last_arrival = f64::NEG_INFINITY;
        for (position, job) in jobs.iter().enumerate() {
            job.check()?;
            if job.id != JobId::from_index(position) {
                return Err(ModelError::NonDenseIds {
                    position,
                    found: job.id.0,
                });
            }
            if job.exec.len() != num_tiers {
                return Err(ModelError::InvalidJob {
                    id: job.id.0,
                    reason: format!("{} execution times for {} tiers", job.exec.len(), num_tiers),
                });
            }
            if job.arrival < last_arrival {
                return Err(ModelError::InvalidJob {
                    id: job.id.0,
                    reason: "arrivals must be nondecreasing in id order".into(),
                });
            }
            last_arrival = job.arrival;
        }
        Ok(Self { num_tiers, jobs })
    }

    pub fn num_tiers(&self) -> usize {
        self.num_tiers
    }

    pub fn len(&self) -> usize {
        self.jobs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.jobs.is_empty()
    }

    pub fn get(&self, id: JobId) -> Option<&Job> {
        if id.0 == 0 {
            return None;
        }
        self.jobs.get(id.index())
    }

    /// Panics on an unknown id; use [`JobSet::get`] for untrusted ids.
    #[inline]
    pub fn job(&self, id: JobId) -> &Job {
        &self.jobs[id.index()]
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Job> {
        self.jobs.iter()
    }

    pub fn jobs(&self) -> &[Job] {
        &self.jobs
    }
}

/// Where a job is at a given instant.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Location {
    /// Not yet arrived at the environment.
    Pending,
    Waiting {
        tier: usize,
    },
    InService {
        tier: usize,
    },
    Departed,
}

impl Location {
    pub fn tier(self) -> Option<usize> {
        match self {
            Location::Waiting { tier } | Location::InService { tier } => Some(tier),
            _ => None,
        }
    }
}

/// Per-job bookkeeping of arrivals, service starts and departures per tier.
///
/// Tier waits are finalized when service starts; the departure from tier `j`
/// is the arrival at tier `j + 1`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct JobProgress {
    pub id: JobId,
    pub location: Location,
    pub arrivals: Vec<Option<f64>>,
    pub starts: Vec<Option<f64>>,
    pub departures: Vec<Option<f64>>,
}

impl JobProgress {
    pub fn new(id: JobId, num_tiers: usize) -> Self {
        Self {
            id,
            location: Location::Pending,
            arrivals: vec![None; num_tiers],
            starts: vec![None; num_tiers],
            departures: vec![None; num_tiers],
        }
    }

    /// Finalized wait in `tier`, if service there has started.
    pub fn wait(&self, tier: usize) -> Option<f64> {
        Some(self.starts[tier]? - self.arrivals[tier]?)
    }

    /// Sum of finalized waits in the tiers before `tier`.
    pub fn completed_waits_before(&self, tier: usize) -> f64 {
        (0..tier).filter_map(|j| self.wait(j)).sum()
    }

    /// Elapsed wait in the current tier at time `now`. For a job already in
    /// service this is its finalized wait.
    pub fn elapsed_wait(&self, now: f64) -> f64 {
        match self.location {
            Location::Waiting { tier } => self.arrivals[tier].map_or(0.0, |a| (now - a).max(0.0)),
            Location::InService { tier } => self.wait(tier).unwrap_or(0.0),
            _ => 0.0,
        }
    }

    pub fn total_wait(&self) -> f64 {
        (0..self.arrivals.len()).filter_map(|j| self.wait(j)).sum()
    }
}

/// Status of one resource in a frozen snapshot.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum ServerStatus {
    Idle,
    Busy { job: JobId, residual: f64 },
}

impl ServerStatus {
    pub fn job(&self) -> Option<JobId> {
        match self {
            ServerStatus::Busy { job, .. } => Some(*job),
            ServerStatus::Idle => None,
        }
    }

    pub fn residual(&self) -> f64 {
        match self {
            ServerStatus::Busy { residual, .. } => *residual,
            ServerStatus::Idle => 0.0,
        }
    }
}

/// Ordered job ids of every resource queue, `queues[tier][resource]`.
/// A job in service sits at the head of its queue.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Schedule {
    pub queues: Vec<Vec<Vec<JobId>>>,
}

impl Schedule {
    pub fn empty(env: &EnvironmentConfig) -> Self {
        Self {
            queues: env.resources_per_tier().iter().map(|&m| vec![Vec::new(); m]).collect(),
        }
    }

    #[inline]
    pub fn queue(&self, tier: usize, resource: usize) -> &[JobId] {
        &self.queues[tier][resource]
    }

    /// Jobs of a tier, queue by queue.
    pub fn tier_jobs(&self, tier: usize) -> impl Iterator<Item = JobId> + '_ {
        self.queues[tier].iter().flatten().copied()
    }

    pub fn len(&self) -> usize {
        self.queues.iter().flatten().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// `(resource, position)` of `job` within `tier`.
    pub fn position(&self, tier: usize, job: JobId) -> Option<(usize, usize)> {
        self.queues
            .get(tier)?
            .iter()
            .enumerate()
            .find_map(|(k, q)| q.iter().position(|&h| h == job).map(|pos| (k, pos)))
    }

    /// Structural checks only: queue shape, known ids, no duplicates within
    /// a tier and no job in two tiers.
    pub fn validate(&self, env: &EnvironmentConfig, jobs: &JobSet) -> ValidationReport {
        let mut report = ValidationReport::default();
        if self.queues.len() != env.num_tiers()
            || self
                .queues
                .iter()
                .enumerate()
                .any(|(j, qs)| qs.len() != env.resources(j))
        {
            report.push(Violation::Shape);
            return report;
        }
        let mut seen: HashMap<JobId, usize> = HashMap::new();
        for (tier, queues) in self.queues.iter().enumerate() {
            for &job in queues.iter().flatten() {
                if jobs.get(job).is_none() {
                    report.push(Violation::UnknownJob { job });
                    continue;
                }
                match seen.get(&job) {
                    Some(&t) if t == tier => report.push(Violation::DuplicateWithinTier { tier, job }),
                    Some(&t) => report.push(Violation::CrossTier { job, tiers: (t, tier) }),
                    None => {
                        seen.insert(job, tier);
                    }
                }
            }
        }
        report
    }
}

/// One broken schedule invariant. Tiers and resources are 0-based.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Violation {
    Shape,
    UnknownJob { job: JobId },
    DuplicateWithinTier { tier: usize, job: JobId },
    CrossTier { job: JobId, tiers: (usize, usize) },
    NotResident { job: JobId, tier: usize },
    Missing { job: JobId, tier: usize },
    InServiceMoved { tier: usize, resource: usize, job: JobId },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::Shape => write!(f, "queue layout does not match the environment"),
            Violation::UnknownJob { job } => write!(f, "unknown job {job}"),
            Violation::DuplicateWithinTier { tier, job } => {
                write!(f, "duplicate {job} within tier {}", tier + 1)
            }
            Violation::CrossTier { job, tiers } => {
                write!(f, "{job} queued in tiers {} and {}", tiers.0 + 1, tiers.1 + 1)
            }
            Violation::NotResident { job, tier } => write!(f, "{job} does not reside in tier {}", tier + 1),
            Violation::Missing { job, tier } => write!(f, "{job} missing from tier {}", tier + 1),
            Violation::InServiceMoved { tier, resource, job } => write!(
                f,
                "in-service {job} not at the head of Q({},{})",
                tier + 1,
                resource + 1
            ),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }

    fn push(&mut self, v: Violation) {
        self.violations.push(v);
    }

    pub fn into_result(self) -> Result<(), ModelError> {
        if self.is_valid() {
            Ok(())
        } else {
            Err(ModelError::InvalidSchedule(self))
        }
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.violations.is_empty() {
            return write!(f, "valid");
        }
        for (n, v) in self.violations.iter().enumerate() {
            if n > 0 {
                write!(f, "; ")?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

/// Remaining wait of `job` in `tier` under `schedule`: execution times of the
/// queued predecessors plus the residual of an in-service head.
pub fn remaining_wait(
    schedule: &Schedule,
    servers: &[Vec<ServerStatus>],
    jobs: &JobSet,
    job: JobId,
    tier: usize,
) -> Result<f64, ModelError> {
    let (resource, pos) = schedule
        .position(tier, job)
        .ok_or(ModelError::NotInTier { job, tier })?;
    let queue = schedule.queue(tier, resource);
    let server = servers[tier][resource];
    if server.job() == Some(job) {
        return Ok(0.0);
    }
    let mut wait = 0.0;
    for &h in &queue[..pos] {
        if server.job() == Some(h) {
            wait += server.residual();
        } else {
            wait += jobs.job(h).exec_at(tier);
        }
    }
    Ok(wait)
}

/// A frozen instant of the environment: the optimization instance handed to
/// schedulers. No further arrivals are assumed.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Snapshot {
    pub env: EnvironmentConfig,
    pub jobs: Arc<JobSet>,
    pub time: f64,
    pub schedule: Schedule,
    pub servers: Vec<Vec<ServerStatus>>,
    pub progress: Vec<JobProgress>,
}

impl Snapshot {
    pub fn progress(&self, job: JobId) -> &JobProgress {
        &self.progress[job.index()]
    }

    /// Jobs currently in some tier (waiting or in service), in id order.
    pub fn resident_jobs(&self) -> impl Iterator<Item = &JobProgress> + '_ {
        self.progress.iter().filter(|p| p.location.tier().is_some())
    }

    /// Jobs waiting (not in service) in `tier`, queue by queue.
    pub fn waiting_in_tier(&self, tier: usize) -> impl Iterator<Item = JobId> + '_ {
        self.schedule.queues[tier].iter().enumerate().flat_map(move |(k, q)| {
            let pinned = self.servers[tier][k].job();
            q.iter().copied().filter(move |&h| Some(h) != pinned)
        })
    }

    pub fn waiting_count(&self) -> usize {
        (0..self.env.num_tiers()).map(|t| self.waiting_in_tier(t).count()).sum()
    }

    pub fn remaining_wait(&self, job: JobId, tier: usize) -> Result<f64, ModelError> {
        remaining_wait(&self.schedule, &self.servers, &self.jobs, job, tier)
    }

    /// Copy of this snapshot with a different schedule, validated first.
    pub fn with_schedule(&self, schedule: Schedule) -> Result<Snapshot, ModelError> {
        self.validate_schedule(&schedule).into_result()?;
        Ok(Snapshot {
            schedule,
            ..self.clone()
        })
    }

    /// Checks `schedule` against this snapshot: structure, residency of every
    /// job in its current tier, completeness, and in-service jobs pinned at
    /// the head of their resource's queue.
    pub fn validate_schedule(&self, schedule: &Schedule) -> ValidationReport {
        let mut report = schedule.validate(&self.env, &self.jobs);
        if report.violations.contains(&Violation::Shape) {
            return report;
        }
        for (tier, queues) in schedule.queues.iter().enumerate() {
            for &job in queues.iter().flatten() {
                if self.jobs.get(job).is_none() {
                    continue;
                }
                if self.progress(job).location.tier() != Some(tier) {
                    report.push(Violation::NotResident { job, tier });
                }
            }
            for (k, queue) in queues.iter().enumerate() {
                if let Some(job) = self.servers[tier][k].job() {
                    if queue.first() != Some(&job) {
                        report.push(Violation::InServiceMoved { tier, resource: k, job });
                    }
                }
            }
        }
        for p in self.resident_jobs() {
            let tier = p.location.tier().expect("resident");
            if !schedule.tier_jobs(tier).any(|h| h == p.id) {
                report.push(Violation::Missing { job: p.id, tier });
            }
        }
        report
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn env(tiers: usize, m: usize) -> EnvironmentConfig {
        EnvironmentConfig::uniform(tiers, m, PenaltyModel::default()).unwrap()
    }

    fn job(id: u32, arrival: f64, exec: Vec<f64>) -> Job {
        let et: f64 = exec.iter().sum();
        Job::new(JobId(id), arrival, exec, arrival + 1.2 * et).unwrap()
    }

    fn jobs(n: u32, tiers: usize) -> JobSet {
        JobSet::new(tiers, (1..=n).map(|i| job(i, i as f64, vec![1.0; tiers])).collect()).unwrap()
    }

    #[test]
    fn environment_invariants() {
        assert_eq!(
            EnvironmentConfig::new(vec![], PenaltyModel::default()),
            Err(ModelError::NoTiers)
        );
        assert_eq!(
            EnvironmentConfig::new(vec![3, 0], PenaltyModel::default()),
            Err(ModelError::EmptyTier { tier: 1 })
        );
        assert!(EnvironmentConfig::new(vec![1], PenaltyModel::new(1.0, 0.0)).is_err());
        assert!(EnvironmentConfig::new(vec![1], PenaltyModel::new(-1.0, 0.01)).is_err());
        let e = EnvironmentConfig::default();
        assert_eq!(e.num_tiers(), 2);
        assert_eq!(e.total_queues(), 6);
    }

    #[test]
    fn job_derived_quantities() {
        let j = Job::new(JobId(1), 3.0, vec![4.0, 6.0], 15.0).unwrap();
        assert_eq!(j.total_exec(), 10.0);
        assert_eq!(j.deadline(), 12.0);
        assert_eq!(j.allowance(), 2.0);
    }

    #[test]
    fn job_rejects_bad_values() {
        assert!(Job::new(JobId(1), 0.0, vec![1.0, -0.5], 5.0).is_err());
        assert!(Job::new(JobId(1), 0.0, vec![1.0, 0.0], 5.0).is_err());
        assert!(Job::new(JobId(1), 0.0, vec![3.0, 3.0], 5.0).is_err());
        assert!(Job::new(JobId(0), 0.0, vec![1.0], 5.0).is_err());
    }

    #[test]
    fn jobset_requires_dense_ordered_ids() {
        let a = job(1, 0.0, vec![1.0]);
        let b = job(3, 1.0, vec![1.0]);
        assert!(matches!(
            JobSet::new(1, vec![a.clone(), b]),
            Err(ModelError::NonDenseIds { .. })
        ));
        let late = job(2, 0.5, vec![1.0]);
        let early = Job {
            id: JobId(1),
            arrival: 0.7,
            ..a
        };
        assert!(JobSet::new(1, vec![early, late]).is_err());
    }

    #[test]
    fn duplicate_within_tier_is_reported() {
        let e = env(1, 2);
        let js = jobs(3, 1);
        let s = Schedule {
            queues: vec![vec![vec![JobId(3)], vec![JobId(1), JobId(3)]]],
        };
        let r = s.validate(&e, &js);
        assert_eq!(
            r.violations,
            vec![Violation::DuplicateWithinTier { tier: 0, job: JobId(3) }]
        );
        assert_eq!(r.to_string(), "duplicate J3 within tier 1");
    }

    #[test]
    fn cross_tier_and_unknown_are_reported() {
        let e = env(2, 1);
        let js = jobs(2, 2);
        let s = Schedule {
            queues: vec![vec![vec![JobId(1)]], vec![vec![JobId(1), JobId(9)]]],
        };
        let r = s.validate(&e, &js);
        assert!(r.violations.contains(&Violation::CrossTier {
            job: JobId(1),
            tiers: (0, 1)
        }));
        assert!(r.violations.contains(&Violation::UnknownJob { job: JobId(9) }));
    }

    #[test]
    fn empty_schedule_is_valid() {
        for (t, m) in [(1, 1), (2, 3), (4, 2)] {
            let e = env(t, m);
            assert!(Schedule::empty(&e).validate(&e, &jobs(5, t)).is_valid());
        }
    }

    #[test]
    fn remaining_wait_sums_predecessors() {
        let js = JobSet::new(
            1,
            vec![job(1, 0.0, vec![2.0]), job(2, 0.0, vec![3.5]), job(3, 0.0, vec![1.0])],
        )
        .unwrap();
        let sched = Schedule {
            queues: vec![vec![vec![JobId(1), JobId(2), JobId(3)]]],
        };
        let idle = vec![vec![ServerStatus::Idle]];
        assert_eq!(remaining_wait(&sched, &idle, &js, JobId(1), 0).unwrap(), 0.0);
        assert_eq!(remaining_wait(&sched, &idle, &js, JobId(3), 0).unwrap(), 5.5);
        let busy = vec![vec![ServerStatus::Busy {
            job: JobId(1),
            residual: 1.2,
        }]];
        let sched2 = Schedule {
            queues: vec![vec![vec![JobId(1), JobId(3), JobId(2)]]],
        };
        // residual 1.2 of the head, then J3 (E = 1.0)
        assert!((remaining_wait(&sched2, &busy, &js, JobId(2), 0).unwrap() - 2.2).abs() < 1e-12);
        assert_eq!(remaining_wait(&sched2, &busy, &js, JobId(1), 0).unwrap(), 0.0);
        assert_eq!(
            remaining_wait(&sched, &idle, &js, JobId(3), 1).unwrap_err(),
            ModelError::NotInTier { job: JobId(3), tier: 1 }
        );
    }

    #[test]
    fn progress_waits() {
        let mut p = JobProgress::new(JobId(1), 2);
        p.arrivals[0] = Some(1.0);
        p.starts[0] = Some(2.5);
        p.departures[0] = Some(3.0);
        p.arrivals[1] = Some(3.0);
        p.location = Location::Waiting { tier: 1 };
        assert_eq!(p.wait(0), Some(1.5));
        assert_eq!(p.completed_waits_before(1), 1.5);
        assert_eq!(p.elapsed_wait(4.0), 1.0);
        p.starts[1] = Some(4.5);
        p.location = Location::InService { tier: 1 };
        assert_eq!(p.elapsed_wait(10.0), 1.5);
        assert_eq!(p.total_wait(), 3.0);
    }
}
