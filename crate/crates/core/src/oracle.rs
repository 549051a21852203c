//! Exhaustive minimizer for tiny frozen snapshots.
//!
//! Enumerates every way of distributing each tier's waiting jobs over the
//! tier's queues, in every order, and scores each candidate through the
//! penalty engine (not the GA's evaluator). Ties go to the lexicographically
//! smallest schedule.

use thiserror::Error;

use crate::model::{JobId, Schedule, Snapshot};
use crate::penalty::{total_penalty, AllowanceMode, PenaltyError};

/// Largest number of waiting jobs accepted by default.
pub const MAX_WAITING_JOBS: usize = 9;
/// Default ceiling on the number of schedules scored.
pub const MAX_STATES: u128 = 20_000_000;

#[derive(Debug, Error)]
pub enum OracleError {
    #[error("{waiting} waiting jobs exceed the limit of {limit}")]
    TooManyJobs { waiting: usize, limit: usize },
    #[error("search space of {states} schedules exceeds the ceiling of {limit}")]
    TooManyStates { states: u128, limit: u128 },
    #[error(transparent)]
    Penalty(#[from] PenaltyError),
}

#[derive(Clone, Copy, Debug)]
pub struct OracleLimits {
    pub max_jobs: usize,
    pub max_states: u128,
}

impl Default for OracleLimits {
    fn default() -> Self {
        Self {
            max_jobs: MAX_WAITING_JOBS,
            max_states: MAX_STATES,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct OracleResult {
    pub schedule: Schedule,
    pub fitness: f64,
    pub states: u128,
}

fn factorial(n: usize) -> u128 {
    (1..=n as u128).product()
}

fn binomial(n: usize, k: usize) -> u128 {
    (0..k as u128).fold(1, |acc, i| acc * (n as u128 - i) / (i + 1))
}

/// Number of ways to arrange `w` distinct jobs into `m` ordered queues.
pub fn arrangements(w: usize, m: usize) -> u128 {
    factorial(w) * binomial(w + m - 1, m - 1)
}

/// Size of the search space of `snapshot`.
pub fn search_space(snapshot: &Snapshot) -> u128 {
    (0..snapshot.env.num_tiers())
        .map(|t| arrangements(snapshot.waiting_in_tier(t).count(), snapshot.env.resources(t)))
        .product()
}

/// Next permutation in lexicographic order; false after the last one.
fn next_permutation(v: &mut [JobId]) -> bool {
    let Some(i) = v.windows(2).rposition(|w| w[0] < w[1]) else {
        return false;
    };
    let j = v.iter().rposition(|x| *x > v[i]).expect("a larger element exists");
    v.swap(i, j);
    v[i + 1..].reverse();
    true
}

/// All compositions of `w` into `m` non-negative parts.
fn compositions(w: usize, m: usize) -> Vec<Vec<usize>> {
    if m == 1 {
        return vec![vec![w]];
    }
    (0..=w)
        .flat_map(|first| {
            compositions(w - first, m - 1).into_iter().map(move |mut rest| {
                rest.insert(0, first);
                rest
            })
        })
        .collect()
}

/// Every queue layout of one tier's waiting jobs.
fn tier_arrangements(jobs: &[JobId], m: usize) -> Vec<Vec<Vec<JobId>>> {
    let mut perm = jobs.to_vec();
    perm.sort_unstable();
    let comps = compositions(perm.len(), m);
    let mut out = Vec::new();
    loop {
        for comp in &comps {
            let mut start = 0;
            out.push(
                comp.iter()
                    .map(|&len| {
                        let q = perm[start..start + len].to_vec();
                        start += len;
                        q
                    })
                    .collect(),
            );
        }
        if !next_permutation(&mut perm) {
            break;
        }
    }
    out
}

pub fn exhaustive_best(snapshot: &Snapshot, mode: AllowanceMode) -> Result<OracleResult, OracleError> {
    exhaustive_best_with(snapshot, mode, OracleLimits::default())
}

pub fn exhaustive_best_with(
    snapshot: &Snapshot,
    mode: AllowanceMode,
    limits: OracleLimits,
) -> Result<OracleResult, OracleError> {
    let waiting = snapshot.waiting_count();
    if waiting > limits.max_jobs {
        return Err(OracleError::TooManyJobs {
            waiting,
            limit: limits.max_jobs,
        });
    }
    let states = search_space(snapshot);
    if states > limits.max_states {
        return Err(OracleError::TooManyStates {
            states,
            limit: limits.max_states,
        });
    }

    let tiers = snapshot.env.num_tiers();
    let options: Vec<Vec<Vec<Vec<JobId>>>> = (0..tiers)
        .map(|t| {
            let jobs: Vec<JobId> = snapshot.waiting_in_tier(t).collect();
            tier_arrangements(&jobs, snapshot.env.resources(t))
        })
        .collect();

    let mut best: Option<(f64, Schedule)> = None;
    let mut index = vec![0usize; tiers];
    loop {
        let queues = (0..tiers)
            .map(|t| {
                options[t][index[t]]
                    .iter()
                    .enumerate()
                    .map(|(k, seg)| {
                        snapshot.servers[t][k]
                            .job()
                            .into_iter()
                            .chain(seg.iter().copied())
                            .collect()
                    })
                    .collect()
            })
            .collect();
        let schedule = Schedule { queues };
        let fitness = total_penalty(snapshot, &schedule, mode)?.total_violation;
        let better = match &best {
            None => true,
            Some((f, s)) => fitness < f - 1e-9 || (fitness <= f + 1e-9 && schedule < *s),
        };
        if better {
            best = Some((fitness, schedule));
        }

        // odometer over the per-tier options
        let mut t = tiers;
        loop {
            if t == 0 {
                let (fitness, schedule) = best.expect("at least one schedule");
                return Ok(OracleResult {
                    schedule,
                    fitness,
                    states,
                });
            }
            t -= 1;
            index[t] += 1;
            if index[t] < options[t].len() {
                break;
            }
            index[t] = 0;
        }
    }
}
