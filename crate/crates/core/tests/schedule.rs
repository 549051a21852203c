use std::sync::Arc;

use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use tiersla_core::experiment::{freeze, FreezePoint};
use tiersla_core::penalty::{snapshot_breakdown, total_penalty};
use tiersla_core::*;

fn loaded(seed: u64) -> Snapshot {
    let env = EnvironmentConfig::uniform(2, 3, PenaltyModel::default()).unwrap();
    let spec = WorkloadSpec {
        num_jobs: 30,
        arrival_rate: 6.0,
        seed,
        ..WorkloadSpec::default()
    };
    let set = Arc::new(workload::generate(&spec, 2).unwrap());
    let mut d = Baseline::new(PolicyKind::WeightedRoundRobin, &env, seed);
    freeze(set, &env, &mut d, FreezePoint::LastArrival).unwrap()
}

/// Applies one random corruption and reports whether it must be caught.
fn corrupt(s: &Snapshot, rng: &mut ChaCha8Rng) -> (Schedule, bool) {
    let mut sched = s.schedule.clone();
    let t = rng.random_range(0..2);
    let k = rng.random_range(0..3);
    match rng.random_range(0..6) {
        // shuffle waiting jobs within a queue: still valid
        0 => {
            let q = &mut sched.queues[t][k];
            let pinned = usize::from(s.servers[t][k].job().is_some()).min(q.len());
            q[pinned..].shuffle(rng);
            (sched, false)
        }
        // drop a job
        1 => match sched.queues[t].iter().position(|q| !q.is_empty()) {
            Some(k) => {
                sched.queues[t][k].pop();
                (sched, true)
            }
            None => (sched, false),
        },
        // duplicate a job inside the tier
        2 => match sched.queues[t].iter().flatten().next().copied() {
            Some(j) => {
                sched.queues[t][k].push(j);
                (sched, true)
            }
            None => (sched, false),
        },
        // move a job to the other tier
        3 => match sched.queues[t].iter().position(|q| !q.is_empty()) {
            Some(k2) => {
                let j = sched.queues[t][k2].pop().unwrap();
                sched.queues[1 - t][0].push(j);
                (sched, true)
            }
            None => (sched, false),
        },
        // unknown job
        4 => {
            sched.queues[t][k].push(JobId(10_000));
            (sched, true)
        }
        // displace an in-service head
        _ => match s.servers[t][k].job() {
            Some(_) if sched.queues[t][k].len() >= 2 => {
                sched.queues[t][k].swap(0, 1);
                (sched, true)
            }
            _ => (sched, false),
        },
    }
}

#[test]
fn validation_fuzz() {
    let snaps: Vec<Snapshot> = (0..20).map(loaded).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let mut caught = 0;
    for i in 0..2000 {
        let s = &snaps[i % snaps.len()];
        let (sched, invalid) = corrupt(s, &mut rng);
        let report = s.validate_schedule(&sched);
        assert_eq!(!report.is_valid(), invalid, "case {i}: {report}");
        if invalid {
            caught += 1;
            assert!(total_penalty(s, &sched, AllowanceMode::MultiTier).is_err());
        }
    }
    assert!(caught > 500);
}

#[test]
fn violation_messages_are_one_based() {
    let s = loaded(1);
    let mut sched = s.schedule.clone();
    let j = *sched.queues[0].iter().flatten().next().unwrap();
    sched.queues[0][2].push(j);
    let text = s.validate_schedule(&sched).to_string();
    assert!(text.contains(&format!("duplicate {j} within tier 1")), "{text}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    /// Totals equal the sum of per-job values and do not depend on the
    /// listing order of queues within a tier.
    #[test]
    fn totals_are_sums(seed in 0u64..300) {
        let s = loaded(seed);
        for mode in AllowanceMode::ALL {
            let b = snapshot_breakdown(&s, mode).unwrap();
            let sum: f64 = b.jobs.iter().map(|j| j.alpha).sum();
            prop_assert!((sum - b.total_violation).abs() < 1e-9);
            let pen: f64 = b.jobs.iter().map(|j| j.penalty).sum();
            prop_assert!((pen - b.total_penalty).abs() < 1e-12);
            prop_assert!(b.jobs.iter().all(|j| j.penalty >= 0.0 && j.penalty <= s.env.penalty.chi));
        }
    }

    /// The two allowance modes differ only by a schedule-independent
    /// constant.
    #[test]
    fn modes_differ_by_a_constant(seed in 0u64..200, shuffle_seed in 0u64..1000) {
        let s = loaded(seed);
        let mut rng = ChaCha8Rng::seed_from_u64(shuffle_seed);
        let mut other = s.schedule.clone();
        for t in 0..2 {
            for k in 0..3 {
                let pinned = usize::from(s.servers[t][k].job().is_some()).min(other.queues[t][k].len());
                other.queues[t][k][pinned..].shuffle(&mut rng);
            }
        }
        let d = |sched: &Schedule| {
            total_penalty(&s, sched, AllowanceMode::MultiTier).unwrap().total_violation
                - total_penalty(&s, sched, AllowanceMode::Differentiated).unwrap().total_violation
        };
        prop_assert!((d(&s.schedule) - d(&other)).abs() < 1e-9);
    }
}
