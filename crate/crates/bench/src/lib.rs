//! Fixtures shared by the benchmarks.

use std::sync::Arc;

use tiersla_core::experiment::{freeze, FreezePoint};
use tiersla_core::{workload, Baseline, EnvironmentConfig, JobSet, PolicyKind, Snapshot, WorkloadSpec};

/// Job stream for the default 2 x 3 environment.
pub fn stream(jobs: usize, lambda: f64, seed: u64) -> Arc<JobSet> {
    let spec = WorkloadSpec {
        num_jobs: jobs,
        arrival_rate: lambda,
        seed,
        ..WorkloadSpec::default()
    };
    Arc::new(workload::generate(&spec, 2).expect("valid spec"))
}

/// A loaded snapshot of the default environment, frozen at the last
/// arrival.
pub fn loaded_snapshot(jobs: usize, lambda: f64, seed: u64) -> Snapshot {
    let env = EnvironmentConfig::default();
    let mut d = Baseline::new(PolicyKind::Fcfs, &env, seed);
    freeze(stream(jobs, lambda, seed), &env, &mut d, FreezePoint::LastArrival).expect("simulation runs")
}
