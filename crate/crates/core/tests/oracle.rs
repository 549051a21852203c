use std::sync::Arc;

use tiersla_core::experiment::{freeze, FreezePoint};
use tiersla_core::oracle::{exhaustive_best_with, search_space, OracleLimits};
use tiersla_core::penalty::total_penalty;
use tiersla_core::*;

fn small_snapshot(seed: u64, jobs: usize, resources: usize) -> Snapshot {
    let env = EnvironmentConfig::uniform(2, resources, PenaltyModel::default()).unwrap();
    let spec = WorkloadSpec {
        num_jobs: jobs,
        arrival_rate: 5.0,
        seed,
        ..WorkloadSpec::default()
    };
    let set = Arc::new(workload::generate(&spec, 2).unwrap());
    let mut d = Baseline::new(PolicyKind::RandomAssign, &env, seed);
    freeze(set, &env, &mut d, FreezePoint::LastArrival).unwrap()
}

#[test]
fn oracle_is_a_lower_bound_and_valid() {
    let mut nontrivial = 0;
    for seed in 0..40 {
        let s = small_snapshot(seed, 9, 2);
        if s.waiting_count() > 7 {
            continue;
        }
        let best = exhaustive_best(&s, AllowanceMode::MultiTier).unwrap();
        assert_eq!(best.states, search_space(&s));
        assert!(s.validate_schedule(&best.schedule).is_valid());
        let initial = total_penalty(&s, &s.schedule, AllowanceMode::MultiTier)
            .unwrap()
            .total_violation;
        assert!(best.fitness <= initial + 1e-9);
        let ga = ga::evolve(
            &s,
            &GaConfig {
                generations: 200,
                seed,
                ..Default::default()
            },
        )
        .unwrap();
        assert!(
            ga.best_fitness >= best.fitness - 1e-9,
            "seed {seed}: GA beat the oracle"
        );
        nontrivial += usize::from(s.waiting_count() >= 3);
    }
    assert!(nontrivial >= 10);
}

/// On one queue the optimum of a sum of waits is shortest-first.
#[test]
fn single_queue_optimum_is_shortest_first() {
    let env = EnvironmentConfig::uniform(1, 1, PenaltyModel::default()).unwrap();
    let exec = [3.0, 1.0, 4.0, 1.5, 5.0, 2.0];
    let jobs: Vec<Job> = exec
        .iter()
        .enumerate()
        .map(|(i, &e)| Job::new(JobId::from_index(i), 0.0, vec![e], 50.0).unwrap())
        .collect();
    let set = Arc::new(JobSet::new(1, jobs).unwrap());
    let mut d = Baseline::new(PolicyKind::Fcfs, &env, 0);
    let s = freeze(set, &env, &mut d, FreezePoint::LastArrival).unwrap();
    let best = exhaustive_best(&s, AllowanceMode::MultiTier).unwrap();
    let order: Vec<u32> = best.schedule.queue(0, 0).iter().map(|j| j.0).collect();
    assert_eq!(order, vec![1, 2, 4, 6, 3, 5]);
}

#[test]
fn limits_are_enforced() {
    let s = small_snapshot(3, 40, 2);
    assert!(s.waiting_count() > 9);
    assert!(matches!(
        exhaustive_best(&s, AllowanceMode::MultiTier),
        Err(OracleError::TooManyJobs { .. })
    ));
    let tiny = small_snapshot(1, 9, 2);
    let limits = OracleLimits {
        max_jobs: 9,
        max_states: 0,
    };
    if search_space(&tiny) > 1 {
        assert!(matches!(
            exhaustive_best_with(&tiny, AllowanceMode::MultiTier, limits),
            Err(OracleError::TooManyStates { .. })
        ));
    }
}
