//! Multi-tier cloud job scheduling with SLA violation penalties.
//!
//! Jobs pass through a chain of tiers, each holding a pool of resources
//! with one FIFO queue apiece. A job's slack before its target completion
//! (its allowance) is either shared across all tiers or split per tier in
//! proportion to the tier's execution time. Violation time and an
//! exponential penalty follow from it.
//!
//! The crate provides a discrete-event simulator ([`sim`]), the penalty
//! engine ([`penalty`]), a permutation GA that reorders and migrates
//! waiting jobs ([`ga`]), dispatch baselines ([`baselines`]), a brute-force
//! minimizer for tiny instances ([`oracle`]) and experiment pipelines
//! ([`experiment`], [`report`]).

pub mod baselines;
pub mod experiment;
pub mod ga;
pub mod model;
pub mod oracle;
pub mod penalty;
pub mod report;
pub mod sim;
pub mod workload;

pub use baselines::{Baseline, PolicyKind};
pub use experiment::{ExperimentConfig, ExperimentError, FreezePoint, PolicySpec, RunReport, Scenario};
pub use ga::{GaConfig, GaError, GaOutcome, GaRescheduler, QueueMode};
pub use model::{
    EnvironmentConfig, Job, JobId, JobProgress, JobSet, Location, ModelError, Schedule, ServerStatus, Snapshot,
    ValidationReport, Violation,
};
pub use oracle::{exhaustive_best, OracleError, OracleResult};
pub use penalty::{AllowanceMode, JobViolation, PenaltyError, PenaltyModel, ViolationBreakdown};
pub use sim::{Dispatcher, Epoch, Rescheduler, SimError, SimReport, SimState};
pub use workload::{WorkloadError, WorkloadSpec};
