use serde::{Deserialize, Serialize};

use crate::model::{JobId, Schedule, Snapshot};

use super::GaError;

/// Waiting jobs of one tier: the tier's resource queues cascaded into one
/// sequence. `lengths[k]` genes belong to queue `k`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TierGenes {
    pub genes: Vec<JobId>,
    pub lengths: Vec<usize>,
}

impl TierGenes {
    /// `(queue, genes)` pairs in queue order.
    pub fn segments(&self) -> impl Iterator<Item = (usize, &[JobId])> + '_ {
        let mut start = 0;
        self.lengths.iter().enumerate().map(move |(k, &len)| {
            let seg = &self.genes[start..start + len];
            start += len;
            (k, seg)
        })
    }

    pub fn segment_of(&self, position: usize) -> usize {
        let mut end = 0;
        for (k, &len) in self.lengths.iter().enumerate() {
            end += len;
            if position < end {
                return k;
            }
        }
        self.lengths.len() - 1
    }
}

/// The system virtual queue: every tier's cascade, tier-major. Jobs in
/// service are not genes.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Chromosome {
    pub tiers: Vec<TierGenes>,
}

impl Chromosome {
    pub fn len(&self) -> usize {
        self.tiers.iter().map(|t| t.genes.len()).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Flattened gene sequence, tier-major.
    pub fn genes(&self) -> impl Iterator<Item = JobId> + '_ {
        self.tiers.iter().flat_map(|t| t.genes.iter().copied())
    }

    /// Same per-tier job multisets and queue counts, no duplicates.
    pub fn check_compatible(&self, other: &Chromosome) -> Result<(), GaError> {
        if self.tiers.len() != other.tiers.len() {
            return Err(GaError::Mismatch(format!(
                "{} tiers vs {}",
                self.tiers.len(),
                other.tiers.len()
            )));
        }
        for (t, (a, b)) in self.tiers.iter().zip(&other.tiers).enumerate() {
            if a.lengths.len() != b.lengths.len() {
                return Err(GaError::Mismatch(format!("tier {}: queue count differs", t + 1)));
            }
            if a.lengths.iter().sum::<usize>() != a.genes.len() {
                return Err(GaError::Mismatch(format!(
                    "tier {}: segment lengths do not cover genes",
                    t + 1
                )));
            }
            let mut x = a.genes.clone();
            let mut y = b.genes.clone();
            x.sort_unstable();
            y.sort_unstable();
            if x.windows(2).any(|w| w[0] == w[1]) {
                return Err(GaError::Mismatch(format!("tier {}: duplicate gene", t + 1)));
            }
            if x != y {
                return Err(GaError::Mismatch(format!("tier {}: job sets differ", t + 1)));
            }
        }
        Ok(())
    }
}

/// Waiting jobs of every queue of `snapshot`, in their current order.
pub fn encode(snapshot: &Snapshot) -> Chromosome {
    let tiers = snapshot
        .schedule
        .queues
        .iter()
        .enumerate()
        .map(|(t, queues)| {
            let mut genes = Vec::new();
            let mut lengths = Vec::with_capacity(queues.len());
            for (k, q) in queues.iter().enumerate() {
                let pinned = snapshot.servers[t][k].job();
                let before = genes.len();
                genes.extend(q.iter().copied().filter(|&h| Some(h) != pinned));
                lengths.push(genes.len() - before);
            }
            TierGenes { genes, lengths }
        })
        .collect();
    Chromosome { tiers }
}

/// Schedule realized by `chromosome` on `snapshot`: in-service jobs stay at
/// the head of their queues, followed by the queue's segment.
pub fn decode(chromosome: &Chromosome, snapshot: &Snapshot) -> Result<Schedule, GaError> {
    encode(snapshot).check_compatible(chromosome)?;
    Ok(decode_unchecked(chromosome, snapshot))
}

pub(crate) fn decode_unchecked(chromosome: &Chromosome, snapshot: &Snapshot) -> Schedule {
    let queues = chromosome
        .tiers
        .iter()
        .enumerate()
        .map(|(t, tier)| {
            tier.segments()
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
    Schedule { queues }
}
