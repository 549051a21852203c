//! Waiting-time allowances, service-level violation times and the
//! exponential SLA penalty.
//!
//! Two allowance formulations are supported:
//!
//! * [`AllowanceMode::MultiTier`]: a job's expected total wait across all
//!   tiers is charged against its whole allowance `wAL = DL - ET`.
//! * [`AllowanceMode::Differentiated`]: the allowance is split across tiers
//!   in proportion to execution time, `wPT_j = wAL * E_j / ET`, and each
//!   tier's wait is charged against its own share.
//!
//! Violation times are signed: a negative value is slack. The penalty of a
//! job is `chi * (1 - exp(-nu * alpha))` for `alpha > 0` and zero otherwise.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{remaining_wait, Job, JobId, JobProgress, Location, ModelError, Schedule, Snapshot};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PenaltyError {
    #[error("{0} has zero total execution time")]
    ZeroExecution(JobId),
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Exponential penalty curve parameters.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PenaltyModel {
    /// Monetary cost factor; the penalty never reaches this value.
    pub chi: f64,
    /// Scaling factor of the exponent, per unit of time.
    pub nu: f64,
}

impl Default for PenaltyModel {
    fn default() -> Self {
        Self { chi: 1.0, nu: 0.01 }
    }
}

impl PenaltyModel {
    pub fn new(chi: f64, nu: f64) -> Self {
        Self { chi, nu }
    }

    pub fn check(&self) -> Result<(), ModelError> {
        if self.chi.is_finite() && self.chi > 0.0 && self.nu.is_finite() && self.nu > 0.0 {
            Ok(())
        } else {
            Err(ModelError::BadPenalty {
                chi: self.chi,
                nu: self.nu,
            })
        }
    }

    /// Penalty for violation time `alpha`. Satisfied clients (`alpha <= 0`)
    /// cost nothing.
    #[inline]
    pub fn penalty(&self, alpha: f64) -> f64 {
        if alpha <= 0.0 {
            0.0
        } else {
            -self.chi * (-self.nu * alpha).exp_m1()
        }
    }
}

/// Free-function form of [`PenaltyModel::penalty`].
pub fn penalty(alpha: f64, model: &PenaltyModel) -> f64 {
    model.penalty(alpha)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum AllowanceMode {
    /// Whole-stream allowance, evaluated at the multi-tier level.
    #[serde(rename = "wal")]
    MultiTier,
    /// Per-tier allowance shares.
    #[serde(rename = "wpt")]
    Differentiated,
}

impl AllowanceMode {
    pub const ALL: [AllowanceMode; 2] = [AllowanceMode::MultiTier, AllowanceMode::Differentiated];

    pub fn as_str(self) -> &'static str {
        match self {
            AllowanceMode::MultiTier => "wal",
            AllowanceMode::Differentiated => "wpt",
        }
    }
}

impl fmt::Display for AllowanceMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for AllowanceMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "wal" | "multi-tier" | "multitier" => Ok(AllowanceMode::MultiTier),
            "wpt" | "differentiated" => Ok(AllowanceMode::Differentiated),
            other => Err(format!("unknown allowance mode `{other}` (expected wal or wpt)")),
        }
    }
}

/// Share of the job's total allowance granted to `tier`.
pub fn differentiated_allowance(job: &Job, tier: usize) -> Result<f64, PenaltyError> {
    let total = job.total_exec();
    if total <= 0.0 {
        return Err(PenaltyError::ZeroExecution(job.id));
    }
    Ok(job.allowance() * job.exec_at(tier) / total)
}

fn resident_tier(p: &JobProgress) -> Result<usize, ModelError> {
    p.location.tier().ok_or(ModelError::NotResident { job: p.id })
}

/// Expected total wait of a resident job: finalized waits of the tiers it
/// left, elapsed wait in its current tier, and the remaining wait implied by
/// the snapshot's schedule.
pub fn expected_wait_multitier(snapshot: &Snapshot, job: JobId) -> Result<f64, ModelError> {
    multitier_under(snapshot, &snapshot.schedule, job)
}

/// Expected wait of a job in `tier`: elapsed plus remaining.
pub fn expected_wait_tier(snapshot: &Snapshot, job: JobId, tier: usize) -> Result<f64, ModelError> {
    tier_under(snapshot, &snapshot.schedule, job, tier)
}

fn multitier_under(snapshot: &Snapshot, schedule: &Schedule, job: JobId) -> Result<f64, ModelError> {
    let p = snapshot.progress(job);
    let tier = resident_tier(p)?;
    Ok(p.completed_waits_before(tier) + tier_under(snapshot, schedule, job, tier)?)
}

fn tier_under(snapshot: &Snapshot, schedule: &Schedule, job: JobId, tier: usize) -> Result<f64, ModelError> {
    let p = snapshot.progress(job);
    if resident_tier(p)? != tier {
        return Err(ModelError::NotInTier { job, tier });
    }
    let remaining = remaining_wait(schedule, &snapshot.servers, &snapshot.jobs, job, tier)?;
    Ok(p.elapsed_wait(snapshot.time) + remaining)
}

/// Signed violation time of a resident job under the snapshot's schedule.
/// In differentiated mode this is the violation in the job's current tier.
pub fn violation_time(snapshot: &Snapshot, job: JobId, mode: AllowanceMode) -> Result<f64, PenaltyError> {
    violation_under(snapshot, &snapshot.schedule, job, mode)
}

fn violation_under(
    snapshot: &Snapshot,
    schedule: &Schedule,
    job: JobId,
    mode: AllowanceMode,
) -> Result<f64, PenaltyError> {
    let j = snapshot.jobs.job(job);
    Ok(match mode {
        AllowanceMode::MultiTier => multitier_under(snapshot, schedule, job)? - j.allowance(),
        AllowanceMode::Differentiated => {
            let tier = resident_tier(snapshot.progress(job))?;
            tier_under(snapshot, schedule, job, tier)? - differentiated_allowance(j, tier)?
        }
    })
}

/// Violation of one job. `tier_alpha` lists `(tier, alpha)` pairs in
/// differentiated mode and is empty otherwise.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct JobViolation {
    pub job: JobId,
    pub alpha: f64,
    pub tier_alpha: Vec<(usize, f64)>,
    pub penalty: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ViolationBreakdown {
    pub mode: AllowanceMode,
    pub jobs: Vec<JobViolation>,
    /// Signed sum of per-job violation times.
    pub total_violation: f64,
    pub total_penalty: f64,
}

impl ViolationBreakdown {
    /// Aggregates per-job entries. Entries are summed in job-id order so the
    /// totals do not depend on the order they were supplied in.
    pub fn from_jobs(mode: AllowanceMode, mut jobs: Vec<JobViolation>) -> Self {
        jobs.sort_by_key(|v| v.job);
        let total_violation = jobs.iter().map(|v| v.alpha).sum();
        let total_penalty = jobs.iter().map(|v| v.penalty).sum();
        Self {
            mode,
            jobs,
            total_violation,
            total_penalty,
        }
    }

    pub fn mean_violation(&self) -> f64 {
        if self.jobs.is_empty() {
            0.0
        } else {
            self.total_violation / self.jobs.len() as f64
        }
    }

    pub fn max_violation(&self) -> f64 {
        self.jobs.iter().map(|v| v.alpha).fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Expected violations and penalties of every resident job of `snapshot`.
pub fn snapshot_breakdown(snapshot: &Snapshot, mode: AllowanceMode) -> Result<ViolationBreakdown, PenaltyError> {
    breakdown_under(snapshot, &snapshot.schedule, mode)
}

fn breakdown_under(
    snapshot: &Snapshot,
    schedule: &Schedule,
    mode: AllowanceMode,
) -> Result<ViolationBreakdown, PenaltyError> {
    let model = snapshot.env.penalty;
    let mut out = Vec::new();
    for p in snapshot.resident_jobs() {
        let alpha = violation_under(snapshot, schedule, p.id, mode)?;
        let tier_alpha = match mode {
            AllowanceMode::MultiTier => Vec::new(),
            AllowanceMode::Differentiated => vec![(resident_tier(p)?, alpha)],
        };
        out.push(JobViolation {
            job: p.id,
            alpha,
            tier_alpha,
            penalty: model.penalty(alpha),
        });
    }
    Ok(ViolationBreakdown::from_jobs(mode, out))
}

/// Expected breakdown of `snapshot` if `schedule` were installed. The
/// schedule is validated against the snapshot first.
pub fn total_penalty(
    snapshot: &Snapshot,
    schedule: &Schedule,
    mode: AllowanceMode,
) -> Result<ViolationBreakdown, PenaltyError> {
    snapshot.validate_schedule(schedule).into_result()?;
    breakdown_under(snapshot, schedule, mode)
}

/// Realized violation of a job that has left the environment.
pub fn realized_violation(
    job: &Job,
    progress: &JobProgress,
    mode: AllowanceMode,
    model: &PenaltyModel,
) -> Result<JobViolation, PenaltyError> {
    if progress.location != Location::Departed {
        return Err(ModelError::NotResident { job: job.id }.into());
    }
    let tiers = job.exec.len();
    let wait = |j: usize| progress.wait(j).unwrap_or(0.0);
    let (alpha, tier_alpha) = match mode {
        AllowanceMode::MultiTier => (progress.total_wait() - job.allowance(), Vec::new()),
        AllowanceMode::Differentiated => {
            let per_tier = (0..tiers)
                .map(|j| Ok((j, wait(j) - differentiated_allowance(job, j)?)))
                .collect::<Result<Vec<_>, PenaltyError>>()?;
            (per_tier.iter().map(|(_, a)| a).sum(), per_tier)
        }
    };
    Ok(JobViolation {
        job: job.id,
        alpha,
        tier_alpha,
        penalty: model.penalty(alpha),
    })
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use proptest::prelude::*;

    use super::*;
    use crate::model::{EnvironmentConfig, JobSet, ServerStatus};

    fn job_with(exec: Vec<f64>, allowance: f64) -> Job {
        let et: f64 = exec.iter().sum();
        Job::new(JobId(1), 0.0, exec, et + allowance).unwrap()
    }

    #[test]
    fn differentiated_allowance_is_proportional() {
        let j = job_with(vec![2.0, 3.0], 10.0);
        assert!((differentiated_allowance(&j, 0).unwrap() - 4.0).abs() < 1e-12);
        assert!((differentiated_allowance(&j, 1).unwrap() - 6.0).abs() < 1e-12);
        let z = job_with(vec![2.0, 3.0], 0.0);
        assert_eq!(differentiated_allowance(&z, 0).unwrap(), 0.0);
        assert_eq!(differentiated_allowance(&z, 1).unwrap(), 0.0);
    }

    #[test]
    fn penalty_values() {
        let m = PenaltyModel::new(1.0, 0.01);
        assert_eq!(m.penalty(0.0), 0.0);
        assert_eq!(m.penalty(-7.0), 0.0);
        // 1 - e^-1
        assert!((m.penalty(100.0) - 0.632_120_558_828_557_7).abs() < 1e-15);
        assert!(m.penalty(1e9) <= 1.0);
        let m2 = PenaltyModel::new(3.0, 0.5);
        assert!((penalty(2.0, &m2) - 3.0 * (1.0 - (-1.0f64).exp())).abs() < 1e-12);
    }

    #[test]
    fn mode_parsing() {
        assert_eq!("wal".parse::<AllowanceMode>().unwrap(), AllowanceMode::MultiTier);
        assert_eq!("WPT".parse::<AllowanceMode>().unwrap(), AllowanceMode::Differentiated);
        assert!("xyz".parse::<AllowanceMode>().is_err());
    }

    /// One tier, one resource, `ids` queued behind an idle server at t=0.
    fn one_queue_snapshot(exec: &[f64], allowance: &[f64], order: &[u32]) -> Snapshot {
        let jobs: Vec<Job> = exec
            .iter()
            .zip(allowance)
            .enumerate()
            .map(|(i, (&e, &a))| Job::new(JobId::from_index(i), 0.0, vec![e], e + a).unwrap())
            .collect();
        let jobs = Arc::new(JobSet::new(1, jobs).unwrap());
        let progress = (0..exec.len())
            .map(|i| {
                let mut p = JobProgress::new(JobId::from_index(i), 1);
                p.arrivals[0] = Some(0.0);
                p.location = Location::Waiting { tier: 0 };
                p
            })
            .collect();
        Snapshot {
            env: EnvironmentConfig::uniform(1, 1, PenaltyModel::default()).unwrap(),
            jobs,
            time: 0.0,
            schedule: Schedule {
                queues: vec![vec![order.iter().map(|&i| JobId(i)).collect()]],
            },
            servers: vec![vec![ServerStatus::Idle]],
            progress,
        }
    }

    #[test]
    fn violation_boundaries() {
        // A job with wait 5 against an allowance of 5 is exactly satisfied.
        let s = one_queue_snapshot(&[5.0, 1.0], &[0.0, 5.0], &[1, 2]);
        assert!(violation_time(&s, JobId(2), AllowanceMode::MultiTier).unwrap().abs() < 1e-12);
        let s = one_queue_snapshot(&[8.0, 1.0], &[0.0, 5.0], &[1, 2]);
        assert!((violation_time(&s, JobId(2), AllowanceMode::MultiTier).unwrap() - 3.0).abs() < 1e-12);
        // single tier: wPT == wAL, wait 1 against 4 leaves 3 of slack
        let s = one_queue_snapshot(&[1.0, 1.0], &[0.0, 4.0], &[1, 2]);
        assert!((violation_time(&s, JobId(2), AllowanceMode::Differentiated).unwrap() + 3.0).abs() < 1e-12);
    }

    #[test]
    fn lone_job_has_no_penalty() {
        let s = one_queue_snapshot(&[2.0], &[0.4], &[1]);
        for mode in AllowanceMode::ALL {
            let b = snapshot_breakdown(&s, mode).unwrap();
            assert_eq!(b.total_penalty, 0.0);
            assert!((b.total_violation + 0.4).abs() < 1e-12);
        }
    }

    #[test]
    fn swapping_two_jobs_only_moves_the_second() {
        // E = (2, 3), wAL = (0.4, 0.6)
        let a = one_queue_snapshot(&[2.0, 3.0], &[0.4, 0.6], &[1, 2]);
        let b = one_queue_snapshot(&[2.0, 3.0], &[0.4, 0.6], &[2, 1]);
        let ba = snapshot_breakdown(&a, AllowanceMode::MultiTier).unwrap();
        let bb = snapshot_breakdown(&b, AllowanceMode::MultiTier).unwrap();
        // first position: alpha = -wAL; second: E_first - wAL
        assert!((ba.jobs[0].alpha + 0.4).abs() < 1e-12);
        assert!((ba.jobs[1].alpha - (2.0 - 0.6)).abs() < 1e-12);
        assert!((bb.jobs[1].alpha + 0.6).abs() < 1e-12);
        assert!((bb.jobs[0].alpha - (3.0 - 0.4)).abs() < 1e-12);
    }

    #[test]
    fn total_penalty_rejects_invalid_schedule() {
        let s = one_queue_snapshot(&[1.0, 1.0], &[0.0, 0.0], &[1, 2]);
        let bad = Schedule {
            queues: vec![vec![vec![JobId(1)]]],
        };
        assert!(matches!(
            total_penalty(&s, &bad, AllowanceMode::MultiTier),
            Err(PenaltyError::Model(ModelError::InvalidSchedule(_)))
        ));
    }

    #[test]
    fn expected_wait_terms_add_up() {
        // completed tier-1 wait 3, elapsed 1 in tier 2, one predecessor with E=2
        let jobs = vec![
            Job::new(JobId(1), 0.0, vec![1.0, 2.0], 10.0).unwrap(),
            Job::new(JobId(2), 0.0, vec![1.0, 1.0], 10.0).unwrap(),
        ];
        let jobs = Arc::new(JobSet::new(2, jobs).unwrap());
        let mut p1 = JobProgress::new(JobId(1), 2);
        p1.arrivals[1] = Some(4.0);
        p1.location = Location::Waiting { tier: 1 };
        let mut p2 = JobProgress::new(JobId(2), 2);
        p2.arrivals[0] = Some(0.0);
        p2.starts[0] = Some(3.0);
        p2.departures[0] = Some(4.0);
        p2.arrivals[1] = Some(4.0);
        p2.location = Location::Waiting { tier: 1 };
        let s = Snapshot {
            env: EnvironmentConfig::uniform(2, 1, PenaltyModel::default()).unwrap(),
            jobs,
            time: 5.0,
            schedule: Schedule {
                queues: vec![vec![vec![]], vec![vec![JobId(1), JobId(2)]]],
            },
            servers: vec![vec![ServerStatus::Idle], vec![ServerStatus::Idle]],
            progress: vec![p1, p2],
        };
        assert!((expected_wait_multitier(&s, JobId(2)).unwrap() - 6.0).abs() < 1e-12);
        assert!((expected_wait_tier(&s, JobId(2), 1).unwrap() - 3.0).abs() < 1e-12);
        assert!(expected_wait_tier(&s, JobId(2), 0).is_err());
    }

    proptest! {
        #[test]
        fn shares_sum_to_allowance(exec in prop::collection::vec(0.01f64..20.0, 1..6), frac in 0.0f64..2.0) {
            let et: f64 = exec.iter().sum();
            let j = Job::new(JobId(1), 0.0, exec.clone(), et * (1.0 + frac)).unwrap();
            let sum: f64 = (0..exec.len()).map(|t| differentiated_allowance(&j, t).unwrap()).sum();
            prop_assert!((sum - j.allowance()).abs() < 1e-9);
        }

        #[test]
        fn penalty_bounded_and_monotone(a in -100.0f64..1e4, d in 0.0f64..100.0, chi in 0.1f64..10.0, nu in 1e-4f64..1.0) {
            let m = PenaltyModel::new(chi, nu);
            let p = m.penalty(a);
            // strict bound holds until exp(-nu*a) underflows relative to 1
            prop_assert!(p >= 0.0 && p <= chi);
            if nu * a < 30.0 { prop_assert!(p < chi); }
            prop_assert!(m.penalty(a + d) >= p);
        }
    }
}
