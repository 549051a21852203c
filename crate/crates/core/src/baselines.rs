//! Dispatch policies used when a job arrives at a tier: FCFS (least
//! remaining work), weighted round robin, weighted least connection and
//! uniform random assignment. All of them append at the queue tail.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::model::{EnvironmentConfig, Job, TIME_EPS};
use crate::sim::{Dispatcher, Placement, SimState};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PolicyKind {
    #[serde(rename = "fcfs")]
    Fcfs,
    #[serde(rename = "wrr")]
    WeightedRoundRobin,
    #[serde(rename = "wlc")]
    WeightedLeastConnection,
    #[serde(rename = "random")]
    RandomAssign,
}

impl PolicyKind {
    pub fn as_str(self) -> &'static str {
        match self {
            PolicyKind::Fcfs => "fcfs",
            PolicyKind::WeightedRoundRobin => "wrr",
            PolicyKind::WeightedLeastConnection => "wlc",
            PolicyKind::RandomAssign => "random",
        }
    }
}

impl fmt::Display for PolicyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for PolicyKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "fcfs" => Ok(PolicyKind::Fcfs),
            "wrr" => Ok(PolicyKind::WeightedRoundRobin),
            "wlc" => Ok(PolicyKind::WeightedLeastConnection),
            "random" => Ok(PolicyKind::RandomAssign),
            other => Err(format!("unknown baseline policy `{other}`")),
        }
    }
}

#[derive(Clone, Debug)]
struct RoundRobin {
    current: usize,
    served: u32,
}

/// A baseline dispatcher. Weights are per tier and per resource; identical
/// resources default to weight 1.
#[derive(Clone, Debug)]
pub struct Baseline {
    kind: PolicyKind,
    weights: Vec<Vec<u32>>,
    rr: Vec<RoundRobin>,
    rng: ChaCha8Rng,
}

impl Baseline {
    pub fn new(kind: PolicyKind, env: &EnvironmentConfig, seed: u64) -> Self {
        let weights = env.resources_per_tier().iter().map(|&m| vec![1; m]).collect();
        Self::with_weights(kind, weights, seed).expect("unit weights are valid")
    }

    /// Fails if a tier has no resource with positive weight.
    pub fn with_weights(kind: PolicyKind, weights: Vec<Vec<u32>>, seed: u64) -> Result<Self, String> {
        if let Some(t) = weights.iter().position(|w| w.iter().all(|&x| x == 0)) {
            return Err(format!("tier {} has no resource with positive weight", t + 1));
        }
        let rr = weights
            .iter()
            .map(|w| RoundRobin {
                current: w.iter().position(|&x| x > 0).unwrap_or(0),
                served: 0,
            })
            .collect();
        Ok(Self {
            kind,
            weights,
            rr,
            rng: ChaCha8Rng::seed_from_u64(seed),
        })
    }

    pub fn kind(&self) -> PolicyKind {
        self.kind
    }

    fn round_robin(&mut self, tier: usize) -> usize {
        let w = &self.weights[tier];
        let rr = &mut self.rr[tier];
        while rr.served >= w[rr.current] {
            rr.current = (rr.current + 1) % w.len();
            rr.served = 0;
        }
        rr.served += 1;
        rr.current
    }

    fn least_connection(&self, tier: usize, connections: impl Iterator<Item = usize>) -> usize {
        let w = &self.weights[tier];
        let mut best: Option<(usize, u64, u64)> = None;
        for (k, conn) in connections.enumerate() {
            if w[k] == 0 {
                continue;
            }
            let (c, wk) = (conn as u64, w[k] as u64);
            // conn/w < best_conn/best_w without division
            if best.is_none_or(|(_, bc, bw)| c * bw < bc * wk) {
                best = Some((k, c, wk));
            }
        }
        best.expect("tier has a weighted resource").0
    }
}

/// Index of the smallest value; ties go to the lowest index.
fn argmin_with_tolerance(values: impl Iterator<Item = f64>) -> usize {
    let mut best = (0, f64::INFINITY);
    for (k, v) in values.enumerate() {
        if v < best.1 - TIME_EPS {
            best = (k, v);
        }
    }
    best.0
}

impl Dispatcher for Baseline {
    fn assign(&mut self, _job: &Job, tier: usize, state: &SimState) -> Placement {
        let m = state.env().resources(tier);
        let resource = match self.kind {
            PolicyKind::Fcfs => argmin_with_tolerance((0..m).map(|k| state.queue_work(tier, k))),
            PolicyKind::WeightedRoundRobin => self.round_robin(tier),
            PolicyKind::WeightedLeastConnection => {
                self.least_connection(tier, (0..m).map(|k| state.schedule().queue(tier, k).len()))
            }
            PolicyKind::RandomAssign => self.rng.random_range(0..m),
        };
        Placement::tail(state, tier, resource)
    }

    fn name(&self) -> &str {
        self.kind.as_str()
    }
}
