//! Discrete-event simulation of the multi-tier environment.
//!
//! Jobs arrive at the first tier, are placed on a resource queue by a
//! [`Dispatcher`], are served non-preemptively and then arrive at the next
//! tier at the instant they depart. An optional [`Rescheduler`] may replace
//! the order and allocation of waiting jobs at configurable epochs.
//!
//! Events at the same instant are ordered completions first, then arrivals,
//! then by job id.

use std::cmp::{Ordering, Reverse};
use std::collections::BinaryHeap;
use std::fmt::Write as _;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{
    EnvironmentConfig, Job, JobId, JobProgress, JobSet, Location, ModelError, Schedule, ServerStatus, Snapshot,
    ValidationReport,
};
use crate::penalty::{realized_violation, AllowanceMode, JobViolation, PenaltyError, ViolationBreakdown};

pub const TRACE_HEADER: &str = "#tiersla-trace v1";

#[derive(Debug, Error)]
pub enum SimError {
    #[error("jobs have {jobs} tiers but the environment has {env}")]
    TierMismatch { jobs: usize, env: usize },
    #[error("policy `{policy}` placed {job} at Q({},{}) position {position}: {reason}", tier + 1, resource + 1)]
    InvalidPlacement {
        policy: String,
        job: JobId,
        tier: usize,
        resource: usize,
        position: usize,
        reason: String,
    },
    #[error("no pending events")]
    Idle,
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Penalty(#[from] PenaltyError),
}

/// Where a dispatcher puts an arriving job. `position` indexes the queue
/// including an in-service head.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Placement {
    pub resource: usize,
    pub position: usize,
}

impl Placement {
    pub fn tail(state: &SimState, tier: usize, resource: usize) -> Self {
        Self {
            resource,
            position: state.schedule().queue(tier, resource).len(),
        }
    }
}

/// Chooses the queue (and position) of a job arriving at a tier.
pub trait Dispatcher {
    fn assign(&mut self, job: &Job, tier: usize, state: &SimState) -> Placement;

    fn name(&self) -> &str;
}

/// Proposes a new schedule for a frozen snapshot. Returning `None` keeps
/// the current schedule.
pub trait Rescheduler {
    fn reschedule(&mut self, snapshot: &Snapshot) -> Option<Schedule>;
}

/// Rescheduler that hands back the snapshot's own schedule.
#[derive(Clone, Copy, Debug, Default)]
pub struct Identity;

impl Rescheduler for Identity {
    fn reschedule(&mut self, snapshot: &Snapshot) -> Option<Schedule> {
        Some(snapshot.schedule.clone())
    }
}

/// When the rescheduling hook fires.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub enum Epoch {
    /// After every arrival and every service completion.
    #[default]
    EveryEvent,
    /// After every `k`-th arrival at any tier.
    Arrivals(usize),
    /// At the first event at least `dt` after the previous firing.
    Interval(f64),
}

impl std::str::FromStr for Epoch {
    type Err = String;

    /// `event`, `arrivals:K` or `interval:DT`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || format!("bad epoch `{s}` (expected event, arrivals:K or interval:DT)");
        match s.split_once(':') {
            None if s == "event" => Ok(Epoch::EveryEvent),
            Some(("arrivals", k)) => k.parse().ok().filter(|&k| k > 0).map(Epoch::Arrivals).ok_or_else(bad),
            Some(("interval", dt)) => dt
                .parse()
                .ok()
                .filter(|&d: &f64| d > 0.0)
                .map(Epoch::Interval)
                .ok_or_else(bad),
            _ => Err(bad()),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum EventKind {
    Completion { resource: usize },
    Arrival,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Event {
    pub time: f64,
    pub kind: EventKind,
    pub job: JobId,
    pub tier: usize,
}

impl Event {
    fn rank(&self) -> u8 {
        match self.kind {
            EventKind::Completion { .. } => 0,
            EventKind::Arrival => 1,
        }
    }
}

impl Eq for Event {}

impl Ord for Event {
    fn cmp(&self, other: &Self) -> Ordering {
        self.time
            .total_cmp(&other.time)
            .then(self.rank().cmp(&other.rank()))
            .then(self.job.cmp(&other.job))
            .then(self.tier.cmp(&other.tier))
    }
}

impl PartialOrd for Event {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum TraceKind {
    Arrive,
    Start,
    Complete,
    Reschedule,
    Reject,
}

impl TraceKind {
    fn as_str(self) -> &'static str {
        match self {
            TraceKind::Arrive => "arrive",
            TraceKind::Start => "start",
            TraceKind::Complete => "complete",
            TraceKind::Reschedule => "reschedule",
            TraceKind::Reject => "reject",
        }
    }
}

/// One line of the trace log. Tier and resource are 0-based in memory and
/// written 1-based.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub time: f64,
    pub kind: TraceKind,
    pub job: Option<JobId>,
    pub tier: Option<usize>,
    pub resource: Option<usize>,
}

/// Renders a trace as `time kind job tier resource` lines, `-` for n/a.
pub fn trace_to_string(trace: &[TraceRecord]) -> String {
    let mut out = format!("{TRACE_HEADER}\n# time kind job tier resource\n");
    let opt = |v: Option<usize>| v.map_or("-".to_string(), |x| (x + 1).to_string());
    for r in trace {
        let job = r.job.map_or("-".to_string(), |j| j.0.to_string());
        let _ = writeln!(
            out,
            "{} {} {} {} {}",
            r.time,
            r.kind.as_str(),
            job,
            opt(r.tier),
            opt(r.resource)
        );
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq)]
struct Server {
    job: Option<JobId>,
    ends: f64,
}

/// Outcome of one call to the rescheduling hook.
#[derive(Clone, Debug, PartialEq)]
pub enum Rescheduled {
    Installed,
    Kept,
    Rejected(ValidationReport),
}

/// Live state of the simulator. Single writer.
#[derive(Clone, Debug)]
pub struct SimState {
    env: EnvironmentConfig,
    jobs: Arc<JobSet>,
    clock: f64,
    schedule: Schedule,
    servers: Vec<Vec<Server>>,
    progress: Vec<JobProgress>,
    events: BinaryHeap<Reverse<Event>>,
    arrived: Vec<usize>,
    departed: Vec<usize>,
    trace: Option<Vec<TraceRecord>>,
    incidents: Vec<String>,
    reschedules: usize,
    arrivals_seen: usize,
    next_interval: f64,
}

impl SimState {
    pub fn new(jobs: Arc<JobSet>, env: EnvironmentConfig) -> Result<Self, SimError> {
        if jobs.num_tiers() != env.num_tiers() {
            return Err(SimError::TierMismatch {
                jobs: jobs.num_tiers(),
                env: env.num_tiers(),
            });
        }
        let n = env.num_tiers();
        let events = jobs
            .iter()
            .map(|j| {
                Reverse(Event {
                    time: j.arrival,
                    kind: EventKind::Arrival,
                    job: j.id,
                    tier: 0,
                })
            })
            .collect();
        Ok(Self {
            schedule: Schedule::empty(&env),
            servers: env
                .resources_per_tier()
                .iter()
                .map(|&m| vec![Server { job: None, ends: 0.0 }; m])
                .collect(),
            progress: jobs.iter().map(|j| JobProgress::new(j.id, n)).collect(),
            events,
            arrived: vec![0; n],
            departed: vec![0; n],
            trace: None,
            incidents: Vec::new(),
            reschedules: 0,
            arrivals_seen: 0,
            next_interval: f64::NEG_INFINITY,
            clock: 0.0,
            env,
            jobs,
        })
    }

    pub fn with_trace(mut self) -> Self {
        self.trace = Some(Vec::new());
        self
    }

    pub fn env(&self) -> &EnvironmentConfig {
        &self.env
    }

    pub fn jobs(&self) -> &Arc<JobSet> {
        &self.jobs
    }

    pub fn clock(&self) -> f64 {
        self.clock
    }

    pub fn schedule(&self) -> &Schedule {
        &self.schedule
    }

    pub fn progress(&self) -> &[JobProgress] {
        &self.progress
    }

    pub fn trace(&self) -> Option<&[TraceRecord]> {
        self.trace.as_deref()
    }

    pub fn incidents(&self) -> &[String] {
        &self.incidents
    }

    pub fn reschedules(&self) -> usize {
        self.reschedules
    }

    pub fn is_done(&self) -> bool {
        self.events.is_empty()
    }

    pub fn next_event(&self) -> Option<Event> {
        self.events.peek().map(|r| r.0)
    }

    /// External arrivals processed so far.
    pub fn external_arrivals(&self) -> usize {
        self.arrived[0]
    }

    pub fn server_status(&self, tier: usize, resource: usize) -> ServerStatus {
        let s = self.servers[tier][resource];
        match s.job {
            Some(job) => ServerStatus::Busy {
                job,
                residual: (s.ends - self.clock).max(0.0),
            },
            None => ServerStatus::Idle,
        }
    }

    /// Remaining work on a resource: residual of the job in service plus
    /// the execution times of the waiting jobs.
    pub fn queue_work(&self, tier: usize, resource: usize) -> f64 {
        let status = self.server_status(tier, resource);
        self.schedule
            .queue(tier, resource)
            .iter()
            .map(|&h| {
                if status.job() == Some(h) {
                    status.residual()
                } else {
                    self.jobs.job(h).exec_at(tier)
                }
            })
            .sum()
    }

    pub fn waiting_count(&self) -> usize {
        let busy = self.servers.iter().flatten().filter(|s| s.job.is_some()).count();
        self.schedule.len() - busy
    }

    /// Freezes the current instant.
    pub fn snapshot(&self) -> Snapshot {
        Snapshot {
            env: self.env.clone(),
            jobs: Arc::clone(&self.jobs),
            time: self.clock,
            schedule: self.schedule.clone(),
            servers: (0..self.env.num_tiers())
                .map(|t| (0..self.env.resources(t)).map(|k| self.server_status(t, k)).collect())
                .collect(),
            progress: self.progress.clone(),
        }
    }

    fn log(&mut self, kind: TraceKind, job: Option<JobId>, tier: Option<usize>, resource: Option<usize>) {
        if let Some(trace) = self.trace.as_mut() {
            trace.push(TraceRecord {
                time: self.clock,
                kind,
                job,
                tier,
                resource,
            });
        }
    }

    fn start_idle(&mut self) {
        for tier in 0..self.env.num_tiers() {
            for k in 0..self.env.resources(tier) {
                if self.servers[tier][k].job.is_some() {
                    continue;
                }
                let Some(&head) = self.schedule.queue(tier, k).first() else {
                    continue;
                };
                let ends = self.clock + self.jobs.job(head).exec_at(tier);
                self.servers[tier][k] = Server { job: Some(head), ends };
                let p = &mut self.progress[head.index()];
                p.starts[tier] = Some(self.clock);
                p.location = Location::InService { tier };
                self.events.push(Reverse(Event {
                    time: ends,
                    kind: EventKind::Completion { resource: k },
                    job: head,
                    tier,
                }));
                self.log(TraceKind::Start, Some(head), Some(tier), Some(k));
            }
        }
    }

    /// Processes the next event and returns it.
    pub fn step(&mut self, dispatcher: &mut dyn Dispatcher) -> Result<Event, SimError> {
        let Reverse(event) = self.events.pop().ok_or(SimError::Idle)?;
        debug_assert!(event.time >= self.clock);
        self.clock = event.time;
        let tier = event.tier;
        match event.kind {
            EventKind::Arrival => {
                let job = self.jobs.job(event.job);
                let placement = dispatcher.assign(job, tier, self);
                let queue_len = self
                    .schedule
                    .queue(tier, placement.resource.min(self.env.resources(tier) - 1))
                    .len();
                let reject = |reason: &str| SimError::InvalidPlacement {
                    policy: dispatcher.name().to_string(),
                    job: event.job,
                    tier,
                    resource: placement.resource,
                    position: placement.position,
                    reason: reason.to_string(),
                };
                if placement.resource >= self.env.resources(tier) {
                    return Err(reject("no such resource"));
                }
                let pinned = usize::from(self.servers[tier][placement.resource].job.is_some());
                if placement.position < pinned {
                    return Err(reject("ahead of the job in service"));
                }
                if placement.position > queue_len {
                    return Err(reject("past the queue tail"));
                }
                self.schedule.queues[tier][placement.resource].insert(placement.position, event.job);
                let p = &mut self.progress[event.job.index()];
                p.arrivals[tier] = Some(self.clock);
                p.location = Location::Waiting { tier };
                self.arrived[tier] += 1;
                self.arrivals_seen += 1;
                self.log(TraceKind::Arrive, Some(event.job), Some(tier), Some(placement.resource));
            }
            EventKind::Completion { resource } => {
                let head = self.schedule.queues[tier][resource].remove(0);
                debug_assert_eq!(head, event.job);
                self.servers[tier][resource] = Server {
                    job: None,
                    ends: self.clock,
                };
                let p = &mut self.progress[event.job.index()];
                p.departures[tier] = Some(self.clock);
                self.departed[tier] += 1;
                if tier + 1 < self.env.num_tiers() {
                    // the job is in transit until its arrival event is processed
                    p.location = Location::Pending;
                    self.events.push(Reverse(Event {
                        time: self.clock,
                        kind: EventKind::Arrival,
                        job: event.job,
                        tier: tier + 1,
                    }));
                } else {
                    p.location = Location::Departed;
                }
                self.log(TraceKind::Complete, Some(event.job), Some(tier), Some(resource));
            }
        }
        self.start_idle();
        Ok(event)
    }

    fn epoch_due(&mut self, epoch: Epoch, event: &Event) -> bool {
        match epoch {
            Epoch::EveryEvent => true,
            Epoch::Arrivals(k) => event.kind == EventKind::Arrival && self.arrivals_seen.is_multiple_of(k),
            Epoch::Interval(dt) => {
                if self.clock >= self.next_interval {
                    self.next_interval = self.clock + dt;
                    true
                } else {
                    false
                }
            }
        }
    }

    /// Offers the current instant to `optimizer` and installs its schedule
    /// if it passes validation. Rejections keep the current schedule and are
    /// recorded as incidents.
    pub fn reschedule(&mut self, optimizer: &mut dyn Rescheduler) -> Rescheduled {
        let snapshot = self.snapshot();
        let Some(candidate) = optimizer.reschedule(&snapshot) else {
            return Rescheduled::Kept;
        };
        let report = snapshot.validate_schedule(&candidate);
        if !report.is_valid() {
            self.incidents
                .push(format!("t={}: rejected schedule: {report}", self.clock));
            self.log(TraceKind::Reject, None, None, None);
            return Rescheduled::Rejected(report);
        }
        self.schedule = candidate;
        self.reschedules += 1;
        self.log(TraceKind::Reschedule, None, None, None);
        self.start_idle();
        Rescheduled::Installed
    }

    /// Checks conservation, head-of-queue service and work conservation.
    pub fn check_invariants(&self) -> Result<(), String> {
        for tier in 0..self.env.num_tiers() {
            let queued = self.schedule.queues[tier].iter().map(Vec::len).sum::<usize>();
            if self.arrived[tier] != queued + self.departed[tier] {
                return Err(format!(
                    "tier {}: arrived {} != queued {} + departed {}",
                    tier + 1,
                    self.arrived[tier],
                    queued,
                    self.departed[tier]
                ));
            }
            for k in 0..self.env.resources(tier) {
                let q = self.schedule.queue(tier, k);
                match self.servers[tier][k].job {
                    Some(job) if q.first() != Some(&job) => {
                        return Err(format!("Q({},{}): in-service {job} is not the head", tier + 1, k + 1))
                    }
                    None if !q.is_empty() => {
                        return Err(format!("Q({},{}): idle resource with waiting jobs", tier + 1, k + 1))
                    }
                    _ => {}
                }
            }
        }
        let report = self.snapshot().validate_schedule(&self.schedule);
        if !report.is_valid() {
            return Err(report.to_string());
        }
        Ok(())
    }

    fn epoch_hook(&mut self, hook: &mut Option<(&mut dyn Rescheduler, Epoch)>, event: &Event) {
        if let Some((optimizer, epoch)) = hook {
            if self.epoch_due(*epoch, event) && self.waiting_count() > 0 {
                self.reschedule(&mut **optimizer);
            }
        }
    }

    /// Runs until `stop` holds (checked after every event) or events run out.
    pub fn run_until(
        &mut self,
        dispatcher: &mut dyn Dispatcher,
        mut hook: Option<(&mut dyn Rescheduler, Epoch)>,
        mut stop: impl FnMut(&SimState) -> bool,
    ) -> Result<(), SimError> {
        while !self.is_done() {
            let event = self.step(dispatcher)?;
            self.epoch_hook(&mut hook, &event);
            if stop(self) {
                break;
            }
        }
        Ok(())
    }

    /// Consumes a finished simulation into its report.
    pub fn into_report(self) -> Result<SimReport, SimError> {
        let model = self.env.penalty;
        let mut records = Vec::with_capacity(self.jobs.len());
        let mut wal = Vec::with_capacity(self.jobs.len());
        let mut wpt = Vec::with_capacity(self.jobs.len());
        for (job, p) in self.jobs.iter().zip(&self.progress) {
            let a = realized_violation(job, p, AllowanceMode::MultiTier, &model)?;
            let b = realized_violation(job, p, AllowanceMode::Differentiated, &model)?;
            records.push(JobRecord::new(job, p, &a, &b));
            wal.push(a);
            wpt.push(b);
        }
        Ok(SimReport {
            jobs: records,
            wal: ViolationBreakdown::from_jobs(AllowanceMode::MultiTier, wal),
            wpt: ViolationBreakdown::from_jobs(AllowanceMode::Differentiated, wpt),
            trace: self.trace.unwrap_or_default(),
            incidents: self.incidents,
            reschedules: self.reschedules,
        })
    }
}

/// Realized timeline and SLA outcome of one job.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct JobRecord {
    pub job: JobId,
    pub arrivals: Vec<f64>,
    pub starts: Vec<f64>,
    pub departures: Vec<f64>,
    pub waits: Vec<f64>,
    pub total_exec: f64,
    pub total_wait: f64,
    pub response_time: f64,
    pub alpha_wal: f64,
    pub penalty_wal: f64,
    pub tier_alpha_wpt: Vec<f64>,
    pub alpha_wpt: f64,
    pub penalty_wpt: f64,
}

impl JobRecord {
    fn new(job: &Job, p: &JobProgress, wal: &JobViolation, wpt: &JobViolation) -> Self {
        let get = |v: &[Option<f64>]| v.iter().map(|x| x.unwrap_or(f64::NAN)).collect::<Vec<_>>();
        let departures = get(&p.departures);
        let n = departures.len();
        Self {
            job: job.id,
            arrivals: get(&p.arrivals),
            starts: get(&p.starts),
            waits: (0..n).map(|j| p.wait(j).unwrap_or(f64::NAN)).collect(),
            total_exec: job.total_exec(),
            total_wait: p.total_wait(),
            response_time: departures[n - 1] - job.arrival,
            departures,
            alpha_wal: wal.alpha,
            penalty_wal: wal.penalty,
            tier_alpha_wpt: wpt.tier_alpha.iter().map(|&(_, a)| a).collect(),
            alpha_wpt: wpt.alpha,
            penalty_wpt: wpt.penalty,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimReport {
    pub jobs: Vec<JobRecord>,
    pub wal: ViolationBreakdown,
    pub wpt: ViolationBreakdown,
    pub trace: Vec<TraceRecord>,
    pub incidents: Vec<String>,
    pub reschedules: usize,
}

impl SimReport {
    pub fn breakdown(&self, mode: AllowanceMode) -> &ViolationBreakdown {
        match mode {
            AllowanceMode::MultiTier => &self.wal,
            AllowanceMode::Differentiated => &self.wpt,
        }
    }
}

/// Simulates the whole stream with `dispatcher` and no rescheduling.
pub fn run_to_completion(
    jobs: Arc<JobSet>,
    env: &EnvironmentConfig,
    dispatcher: &mut dyn Dispatcher,
) -> Result<SimReport, SimError> {
    run_with_hook(jobs, env, dispatcher, None, false)
}

/// Simulates the whole stream, calling `hook` at its epochs.
pub fn run_with_hook(
    jobs: Arc<JobSet>,
    env: &EnvironmentConfig,
    dispatcher: &mut dyn Dispatcher,
    hook: Option<(&mut dyn Rescheduler, Epoch)>,
    trace: bool,
) -> Result<SimReport, SimError> {
    let mut state = SimState::new(jobs, env.clone())?;
    if trace {
        state = state.with_trace();
    }
    state.run_until(dispatcher, hook, |_| false)?;
    state.into_report()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::baselines::{Baseline, PolicyKind};
    use crate::penalty::PenaltyModel;

    fn env(tiers: usize, m: usize) -> EnvironmentConfig {
        EnvironmentConfig::uniform(tiers, m, PenaltyModel::default()).unwrap()
    }

    fn jobs(spec: &[(f64, Vec<f64>)]) -> Arc<JobSet> {
        let js = spec
            .iter()
            .enumerate()
            .map(|(i, (a, e))| {
                let et: f64 = e.iter().sum();
                Job::new(JobId::from_index(i), *a, e.clone(), a + 1.2 * et).unwrap()
            })
            .collect();
        Arc::new(JobSet::new(spec[0].1.len(), js).unwrap())
    }

    fn fcfs(e: &EnvironmentConfig) -> Baseline {
        Baseline::new(PolicyKind::Fcfs, e, 0)
    }

    #[test]
    fn lone_job_never_waits() {
        let e = env(2, 1);
        let r = run_to_completion(jobs(&[(1.0, vec![2.0, 3.0])]), &e, &mut fcfs(&e)).unwrap();
        let j = &r.jobs[0];
        assert_eq!(j.waits, vec![0.0, 0.0]);
        assert_eq!(j.response_time, 5.0);
        assert_eq!(j.departures[0], j.arrivals[1]);
    }

    #[test]
    fn serial_queue() {
        let e = env(2, 1);
        let r = run_to_completion(jobs(&[(0.0, vec![2.0, 1.0]), (0.0, vec![1.5, 1.0])]), &e, &mut fcfs(&e)).unwrap();
        assert_eq!(r.jobs[1].waits[0], 2.0);
        // job 2 reaches tier 2 at 3.5, after job 1 left it at 3.0
        assert_eq!(r.jobs[1].waits[1], 0.0);
        assert_eq!(r.jobs[1].response_time, 2.5 + 2.0);
    }

    #[test]
    fn tier_two_interaction() {
        // job 2 finishes tier 1 at 3.0 while job 1 still occupies tier 2 until 4.0
        let e = env(2, 1);
        let r = run_to_completion(jobs(&[(0.0, vec![1.0, 3.0]), (0.0, vec![2.0, 1.0])]), &e, &mut fcfs(&e)).unwrap();
        assert_eq!(r.jobs[1].waits, vec![1.0, 1.0]);
        assert_eq!(r.jobs[1].response_time, 5.0);
    }

    #[test]
    fn empty_stream() {
        let e = env(2, 3);
        let js = Arc::new(JobSet::new(2, vec![]).unwrap());
        let r = run_to_completion(js, &e, &mut fcfs(&e)).unwrap();
        assert!(r.jobs.is_empty());
        assert_eq!(r.wal.total_violation, 0.0);
    }

    #[test]
    fn event_ordering() {
        let a = Event {
            time: 1.0,
            kind: EventKind::Arrival,
            job: JobId(1),
            tier: 0,
        };
        let c = Event {
            time: 1.0,
            kind: EventKind::Completion { resource: 0 },
            job: JobId(5),
            tier: 0,
        };
        let a2 = Event { job: JobId(2), ..a };
        assert!(c < a);
        assert!(a < a2);
        assert!(Event { time: 0.5, ..a2 } < c);
    }

    struct Bad;

    impl Dispatcher for Bad {
        fn assign(&mut self, _job: &Job, _tier: usize, _state: &SimState) -> Placement {
            Placement {
                resource: 0,
                position: 0,
            }
        }

        fn name(&self) -> &str {
            "bad"
        }
    }

    #[test]
    fn placement_ahead_of_service_halts() {
        let e = env(1, 1);
        let err = run_to_completion(jobs(&[(0.0, vec![1.0]), (0.5, vec![1.0])]), &e, &mut Bad).unwrap_err();
        assert!(matches!(err, SimError::InvalidPlacement { position: 0, .. }), "{err}");
    }

    struct MoveInService;

    impl Rescheduler for MoveInService {
        fn reschedule(&mut self, snapshot: &Snapshot) -> Option<Schedule> {
            let mut s = snapshot.schedule.clone();
            let q = &mut s.queues[0][0];
            if q.len() >= 2 {
                q.swap(0, 1);
            }
            Some(s)
        }
    }

    #[test]
    fn hook_cannot_move_in_service_job() {
        let e = env(1, 1);
        let js = jobs(&[(0.0, vec![1.0]), (0.1, vec![1.0]), (0.2, vec![1.0])]);
        let mut state = SimState::new(js, e.clone()).unwrap();
        let mut d = fcfs(&e);
        state.step(&mut d).unwrap();
        state.step(&mut d).unwrap();
        let before = state.schedule().clone();
        let out = state.reschedule(&mut MoveInService);
        assert!(matches!(out, Rescheduled::Rejected(_)));
        assert_eq!(state.schedule(), &before);
        assert_eq!(state.incidents().len(), 1);
    }

    #[test]
    fn identity_hook_changes_nothing() {
        let e = env(2, 3);
        let spec: Vec<(f64, Vec<f64>)> = (0..40)
            .map(|i| (i as f64 * 0.3, vec![1.0 + (i % 5) as f64 * 0.4, 0.5 + (i % 3) as f64]))
            .collect();
        let js = jobs(&spec);
        let plain = run_with_hook(js.clone(), &e, &mut fcfs(&e), None, true).unwrap();
        let mut id = Identity;
        let hooked = run_with_hook(js, &e, &mut fcfs(&e), Some((&mut id, Epoch::EveryEvent)), false).unwrap();
        assert_eq!(plain.jobs, hooked.jobs);
        assert!(hooked.reschedules > 0);
        let text = trace_to_string(&plain.trace);
        assert!(text.starts_with(TRACE_HEADER));
        assert_eq!(text.lines().count(), 2 + plain.trace.len());
    }

    #[test]
    fn epoch_parsing() {
        assert_eq!("event".parse::<Epoch>().unwrap(), Epoch::EveryEvent);
        assert_eq!("arrivals:5".parse::<Epoch>().unwrap(), Epoch::Arrivals(5));
        assert_eq!("interval:0.5".parse::<Epoch>().unwrap(), Epoch::Interval(0.5));
        assert!("arrivals:0".parse::<Epoch>().is_err());
        assert!("sometimes".parse::<Epoch>().is_err());
    }
}
