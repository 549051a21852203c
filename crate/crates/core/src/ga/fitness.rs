use std::cell::Cell;

use crate::model::{JobId, Snapshot};
use crate::penalty::{differentiated_allowance, violation_time, AllowanceMode, PenaltyError};

use super::chromosome::Chromosome;

/// Signed total violation of a chromosome on a frozen snapshot.
///
/// Every term that does not depend on the schedule is folded in up front:
/// a waiting job contributes `offset + remaining_wait`, and the violations
/// of jobs in service are a constant. Evaluation is then one pass over the
/// genes, each segment starting from its queue's in-service residual.
#[derive(Debug)]
pub struct Evaluator {
    mode: AllowanceMode,
    fixed: f64,
    exec: Vec<f64>,
    offset: Vec<f64>,
    residual: Vec<Vec<f64>>,
    evaluations: Cell<u64>,
}

impl Evaluator {
    /// Evaluator for the whole system virtual queue.
    pub fn new(snapshot: &Snapshot, mode: AllowanceMode) -> Result<Self, PenaltyError> {
        let queues: Vec<(usize, usize)> = (0..snapshot.env.num_tiers())
            .flat_map(|t| (0..snapshot.env.resources(t)).map(move |k| (t, k)))
            .collect();
        let mut ev = Self::tables(snapshot, mode, &queues)?;
        ev.residual = (0..snapshot.env.num_tiers())
            .map(|t| snapshot.servers[t].iter().map(|s| s.residual()).collect())
            .collect();
        Ok(ev)
    }

    /// Evaluator for a single resource queue, seen as a one-tier,
    /// one-segment chromosome.
    pub fn for_queue(
        snapshot: &Snapshot,
        mode: AllowanceMode,
        tier: usize,
        queue: usize,
    ) -> Result<Self, PenaltyError> {
        let mut ev = Self::tables(snapshot, mode, &[(tier, queue)])?;
        ev.residual = vec![vec![snapshot.servers[tier][queue].residual()]];
        Ok(ev)
    }

    fn tables(snapshot: &Snapshot, mode: AllowanceMode, queues: &[(usize, usize)]) -> Result<Self, PenaltyError> {
        let n = snapshot.jobs.len();
        let mut exec = vec![0.0; n];
        let mut offset = vec![0.0; n];
        let mut fixed = 0.0;
        for &(t, k) in queues {
            let pinned = snapshot.servers[t][k].job();
            for &h in snapshot.schedule.queue(t, k) {
                if Some(h) == pinned {
                    fixed += violation_time(snapshot, h, mode)?;
                    continue;
                }
                let job = snapshot.jobs.job(h);
                let p = snapshot.progress(h);
                let elapsed = p.elapsed_wait(snapshot.time);
                exec[h.index()] = job.exec_at(t);
                offset[h.index()] = match mode {
                    AllowanceMode::MultiTier => p.completed_waits_before(t) + elapsed - job.allowance(),
                    AllowanceMode::Differentiated => elapsed - differentiated_allowance(job, t)?,
                };
            }
        }
        Ok(Self {
            mode,
            fixed,
            exec,
            offset,
            residual: Vec::new(),
            evaluations: Cell::new(0),
        })
    }

    pub fn mode(&self) -> AllowanceMode {
        self.mode
    }

    /// Sum of the violations of in-service jobs.
    pub fn fixed(&self) -> f64 {
        self.fixed
    }

    pub fn exec_time(&self, job: JobId) -> f64 {
        self.exec[job.index()]
    }

    /// Raw fitness (lower is better). Counts toward [`Evaluator::evaluations`].
    pub fn evaluate(&self, c: &Chromosome) -> f64 {
        self.evaluations.set(self.evaluations.get() + 1);
        self.peek(c)
    }

    /// Raw fitness without touching the evaluation counter.
    pub fn peek(&self, c: &Chromosome) -> f64 {
        let mut total = self.fixed;
        for (t, tier) in c.tiers.iter().enumerate() {
            for (k, seg) in tier.segments() {
                let mut ahead = self.residual[t][k];
                for &h in seg {
                    total += self.offset[h.index()] + ahead;
                    ahead += self.exec[h.index()];
                }
            }
        }
        total
    }

    pub fn evaluations(&self) -> u64 {
        self.evaluations.get()
    }
}
