//! Selection, crossover and mutation on [`Chromosome`]s. Every operator
//! keeps each tier's job set intact; genes never leave their tier.

use std::collections::HashSet;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::model::JobId;

use super::chromosome::{Chromosome, TierGenes};

/// Roulette probabilities for a minimization fitness.
///
/// Raw fitness is inverted to `w = (max f - f) + eps` so lower violation
/// gets more weight, then normalized to sum to one. A population with no
/// spread gets uniform probabilities.
pub fn selection_probabilities(fitness: &[f64]) -> Vec<f64> {
    assert!(!fitness.is_empty(), "empty population");
    let max = fitness.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = fitness.iter().copied().fold(f64::INFINITY, f64::min);
    let n = fitness.len() as f64;
    // also catches NaN fitness
    if max.partial_cmp(&min) != Some(std::cmp::Ordering::Greater) {
        return vec![1.0 / n; fitness.len()];
    }
    let scale = fitness.iter().fold(1.0f64, |acc, f| acc.max(f.abs()));
    let eps = 1e-12 * scale;
    let weights: Vec<f64> = fitness.iter().map(|f| (max - f) + eps).collect();
    let total: f64 = weights.iter().sum();
    weights.into_iter().map(|w| w / total).collect()
}

/// Spins the wheel once; `probs` must sum to one.
pub fn spin<R: Rng + ?Sized>(probs: &[f64], rng: &mut R) -> usize {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    for (i, p) in probs.iter().enumerate() {
        acc += p;
        if u < acc {
            return i;
        }
    }
    // u landed in the rounding gap above the last cumulative sum
    probs.iter().rposition(|&p| p > 0.0).unwrap_or(probs.len() - 1)
}

/// Draws `count` parent indices.
pub fn select<R: Rng + ?Sized>(fitness: &[f64], count: usize, rng: &mut R) -> Vec<usize> {
    let probs = selection_probabilities(fitness);
    (0..count).map(|_| spin(&probs, rng)).collect()
}

fn order_fill(prefix: &[JobId], donor: &[JobId]) -> Vec<JobId> {
    let taken: HashSet<JobId> = prefix.iter().copied().collect();
    let mut child = prefix.to_vec();
    child.extend(donor.iter().copied().filter(|g| !taken.contains(g)));
    child
}

/// Single-point crossover with order-preserving repair, tier by tier.
///
/// For each tier a cut `c` in `0..=len` is drawn. Child A keeps parent A's
/// first `c` genes and takes the rest in parent B's relative order; child B
/// mirrors it. Each child keeps its own parent's segment lengths, so genes
/// shifted across a boundary migrate to another queue.
pub fn crossover<R: Rng + ?Sized>(a: &Chromosome, b: &Chromosome, rng: &mut R) -> (Chromosome, Chromosome) {
    let mut ca = Vec::with_capacity(a.tiers.len());
    let mut cb = Vec::with_capacity(a.tiers.len());
    for (ta, tb) in a.tiers.iter().zip(&b.tiers) {
        let cut = rng.random_range(0..=ta.genes.len());
        ca.push(TierGenes {
            genes: order_fill(&ta.genes[..cut], &tb.genes),
            lengths: ta.lengths.clone(),
        });
        cb.push(TierGenes {
            genes: order_fill(&tb.genes[..cut], &ta.genes),
            lengths: tb.lengths.clone(),
        });
    }
    (Chromosome { tiers: ca }, Chromosome { tiers: cb })
}

/// Insert mutation: removes one uniformly chosen gene and reinserts it at a
/// uniformly chosen slot of its tier. A slot in the same segment reorders
/// the queue; a slot in another segment migrates the job.
pub fn mutate<R: Rng + ?Sized>(c: &mut Chromosome, rng: &mut R) {
    let total = c.len();
    if total == 0 {
        return;
    }
    let mut pick = rng.random_range(0..total);
    let tier = c
        .tiers
        .iter_mut()
        .find(|t| {
            if pick < t.genes.len() {
                true
            } else {
                pick -= t.genes.len();
                false
            }
        })
        .expect("pick is within the gene count");
    let from_seg = tier.segment_of(pick);
    let gene = tier.genes.remove(pick);
    tier.lengths[from_seg] -= 1;

    // each segment of length L offers L + 1 insertion slots
    let slots = tier.genes.len() + tier.lengths.len();
    let mut slot = rng.random_range(0..slots);
    let mut start = 0;
    for len in tier.lengths.iter_mut() {
        if slot <= *len {
            tier.genes.insert(start + slot, gene);
            *len += 1;
            return;
        }
        slot -= *len + 1;
        start += *len;
    }
    unreachable!("slot out of range");
}

/// A uniformly random chromosome with the same per-tier jobs and queue
/// counts as `template`: random order, each job on a uniform queue.
pub fn random_like<R: Rng + ?Sized>(template: &Chromosome, rng: &mut R) -> Chromosome {
    let tiers = template
        .tiers
        .iter()
        .map(|t| {
            let m = t.lengths.len();
            let mut genes = t.genes.clone();
            genes.shuffle(rng);
            if m == 1 {
                return TierGenes {
                    genes,
                    lengths: vec![t.genes.len()],
                };
            }
            let mut assigned: Vec<Vec<JobId>> = vec![Vec::new(); m];
            for g in genes {
                assigned[rng.random_range(0..m)].push(g);
            }
            TierGenes {
                lengths: assigned.iter().map(Vec::len).collect(),
                genes: assigned.concat(),
            }
        })
        .collect();
    Chromosome { tiers }
}
