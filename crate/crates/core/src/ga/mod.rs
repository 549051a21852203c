//! Permutation genetic algorithm over the system virtual queue.
//!
//! A chromosome cascades the waiting jobs of every resource queue of every
//! tier. Fitness is the signed total violation time of the resident jobs
//! under the decoded schedule. Each generation evaluates the whole
//! population once, so a run costs exactly `population * generations`
//! evaluations.
//!
//! The segmented variant runs an independent GA per resource queue
//! (reordering only) and concatenates the winners.

mod chromosome;
mod fitness;
pub mod operators;

use std::fmt;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use chromosome::{decode, encode, Chromosome, TierGenes};
pub use fitness::Evaluator;

use crate::model::{ModelError, Schedule, Snapshot};
use crate::penalty::{AllowanceMode, PenaltyError};
use crate::sim::Rescheduler;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GaError {
    #[error("chromosome does not match the snapshot: {0}")]
    Mismatch(String),
    #[error("invalid GA configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Penalty(#[from] PenaltyError),
    #[error(transparent)]
    Model(#[from] ModelError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum QueueMode {
    /// One chromosome over all queues of all tiers; reorders and migrates.
    #[serde(rename = "virtualized")]
    SystemVirtualized,
    /// One GA per resource queue; reorders only.
    #[serde(rename = "segmented")]
    Segmented,
}

impl QueueMode {
    pub fn as_str(self) -> &'static str {
        match self {
            QueueMode::SystemVirtualized => "virtualized",
            QueueMode::Segmented => "segmented",
        }
    }
}

impl fmt::Display for QueueMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for QueueMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "virtualized" | "system" | "virtual" => Ok(QueueMode::SystemVirtualized),
            "segmented" => Ok(QueueMode::Segmented),
            other => Err(format!("unknown queue mode `{other}`")),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GaConfig {
    pub population: usize,
    pub generations: usize,
    /// Crossovers per generation as a fraction of the population.
    pub crossover_rate: f64,
    /// Mutations per generation as a fraction of the population.
    pub mutation_rate: f64,
    pub elitism: usize,
    pub queue_mode: QueueMode,
    pub allowance: AllowanceMode,
    pub seed: u64,
}

impl Default for GaConfig {
    fn default() -> Self {
        Self {
            population: 10,
            generations: 1000,
            crossover_rate: 0.1,
            mutation_rate: 0.1,
            elitism: 1,
            queue_mode: QueueMode::SystemVirtualized,
            allowance: AllowanceMode::MultiTier,
            seed: 0,
        }
    }
}

impl GaConfig {
    pub fn check(&self) -> Result<(), GaError> {
        if self.population < 2 {
            return Err(GaError::Config(format!("population {} < 2", self.population)));
        }
        if self.generations == 0 {
            return Err(GaError::Config("at least one generation is required".into()));
        }
        for (name, r) in [("crossover", self.crossover_rate), ("mutation", self.mutation_rate)] {
            if !(r.is_finite() && r >= 0.0) {
                return Err(GaError::Config(format!("{name} rate {r} must be non-negative")));
            }
        }
        Ok(())
    }

    /// Crossover operations per generation; each yields two children.
    pub fn crossovers(&self) -> usize {
        (self.crossover_rate * self.population as f64).round() as usize
    }

    pub fn mutations(&self) -> usize {
        (self.mutation_rate * self.population as f64).round() as usize
    }

    pub fn budget(&self) -> u64 {
        (self.population * self.generations) as u64
    }
}

/// Best-ever and population statistics after evaluating one generation.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GenerationStats {
    pub generation: usize,
    pub best: f64,
    pub mean: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GaOutcome {
    pub best: Schedule,
    pub best_fitness: f64,
    pub initial_fitness: f64,
    pub history: Vec<GenerationStats>,
    pub evaluations: u64,
}

impl GaOutcome {
    /// Relative reduction of the fitness, `(initial - best) / initial`.
    /// `None` when the initial fitness is not positive.
    pub fn improvement(&self) -> Option<f64> {
        (self.initial_fitness > 0.0).then(|| (self.initial_fitness - self.best_fitness) / self.initial_fitness)
    }
}

struct EngineRun {
    best: Chromosome,
    best_fitness: f64,
    initial_fitness: f64,
    history: Vec<GenerationStats>,
}

fn run_engine(incumbent: Chromosome, eval: &Evaluator, config: &GaConfig, rng: &mut ChaCha8Rng) -> EngineRun {
    let n = config.population;
    let mut population = Vec::with_capacity(n);
    population.push(incumbent);
    for _ in 1..n {
        population.push(operators::random_like(&population[0], rng));
    }

    let mut best: Option<(Chromosome, f64)> = None;
    let mut initial_fitness = f64::NAN;
    let mut history = Vec::with_capacity(config.generations);

    for generation in 1..=config.generations {
        let fitness: Vec<f64> = population.iter().map(|c| eval.evaluate(c)).collect();
        if generation == 1 {
            initial_fitness = fitness[0];
        }
        let (arg, &gen_best) = fitness
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.total_cmp(b.1))
            .expect("population is not empty");
        if best.as_ref().is_none_or(|(_, f)| gen_best < *f) {
            best = Some((population[arg].clone(), gen_best));
        }
        let best_fitness = best.as_ref().map(|b| b.1).expect("set above");
        history.push(GenerationStats {
            generation,
            best: best_fitness,
            mean: fitness.iter().sum::<f64>() / n as f64,
        });
        if generation == config.generations {
            break;
        }

        let probs = operators::selection_probabilities(&fitness);
        let mut next: Vec<Chromosome> = Vec::with_capacity(n);
        if config.elitism > 0 {
            next.push(best.as_ref().expect("set above").0.clone());
            let mut order: Vec<usize> = (0..n).collect();
            order.sort_by(|&a, &b| fitness[a].total_cmp(&fitness[b]));
            next.extend(
                order
                    .iter()
                    .take(config.elitism.min(n) - 1)
                    .map(|&i| population[i].clone()),
            );
        }
        for _ in 0..config.crossovers() {
            if next.len() >= n {
                break;
            }
            let a = operators::spin(&probs, rng);
            let b = operators::spin(&probs, rng);
            let (ca, cb) = operators::crossover(&population[a], &population[b], rng);
            next.push(ca);
            if next.len() < n {
                next.push(cb);
            }
        }
        for _ in 0..config.mutations() {
            if next.len() >= n {
                break;
            }
            let mut child = population[operators::spin(&probs, rng)].clone();
            operators::mutate(&mut child, rng);
            next.push(child);
        }
        while next.len() < n {
            next.push(population[operators::spin(&probs, rng)].clone());
        }
        population = next;
    }

    let (best, best_fitness) = best.expect("at least one generation");
    EngineRun {
        best,
        best_fitness,
        initial_fitness,
        history,
    }
}

fn seeded(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Evolves the system virtual queue of `snapshot`. The initial population
/// holds the snapshot's own schedule plus random chromosomes; the best
/// chromosome ever evaluated is returned.
pub fn evolve(snapshot: &Snapshot, config: &GaConfig) -> Result<GaOutcome, GaError> {
    config.check()?;
    let eval = Evaluator::new(snapshot, config.allowance)?;
    let mut rng = seeded(config.seed, 0);
    let run = run_engine(encode(snapshot), &eval, config, &mut rng);
    Ok(GaOutcome {
        best: decode(&run.best, snapshot)?,
        best_fitness: run.best_fitness,
        initial_fitness: run.initial_fitness,
        history: run.history,
        evaluations: eval.evaluations(),
    })
}

/// Runs an independent reorder-only GA on every queue with at least two
/// waiting jobs. Queue `q` (tier-major index) draws from random stream `q`.
pub fn evolve_segmented(snapshot: &Snapshot, config: &GaConfig) -> Result<GaOutcome, GaError> {
    config.check()?;
    let full = Evaluator::new(snapshot, config.allowance)?;
    let mut winner = encode(snapshot);
    let initial_fitness = full.peek(&winner);
    let mut best_sum = vec![initial_fitness; config.generations];
    let mut mean_sum = vec![initial_fitness; config.generations];
    let mut evaluations = 0;

    let mut q = 0u64;
    for (t, tier) in winner.tiers.iter_mut().enumerate() {
        let mut start = 0;
        for (k, &len) in tier.lengths.iter().enumerate() {
            let stream = q;
            q += 1;
            if len < 2 {
                start += len;
                continue;
            }
            let eval = Evaluator::for_queue(snapshot, config.allowance, t, k)?;
            let single = Chromosome {
                tiers: vec![TierGenes {
                    genes: tier.genes[start..start + len].to_vec(),
                    lengths: vec![len],
                }],
            };
            let run = run_engine(single, &eval, config, &mut seeded(config.seed, stream));
            tier.genes[start..start + len].copy_from_slice(&run.best.tiers[0].genes);
            for (g, stats) in run.history.iter().enumerate() {
                best_sum[g] += stats.best - run.initial_fitness;
                mean_sum[g] += stats.mean - run.initial_fitness;
            }
            evaluations += eval.evaluations();
            start += len;
        }
    }

    let history = best_sum
        .into_iter()
        .zip(mean_sum)
        .enumerate()
        .map(|(g, (best, mean))| GenerationStats {
            generation: g + 1,
            best,
            mean,
        })
        .collect();
    Ok(GaOutcome {
        best_fitness: full.peek(&winner),
        best: decode(&winner, snapshot)?,
        initial_fitness,
        history,
        evaluations,
    })
}

/// Dispatches on `config.queue_mode`.
pub fn optimize(snapshot: &Snapshot, config: &GaConfig) -> Result<GaOutcome, GaError> {
    match config.queue_mode {
        QueueMode::SystemVirtualized => evolve(snapshot, config),
        QueueMode::Segmented => evolve_segmented(snapshot, config),
    }
}

/// Per-call summary of an online GA.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub epoch: usize,
    pub time: f64,
    pub waiting: usize,
    pub initial_fitness: f64,
    pub best_fitness: f64,
}

/// Online rescheduler running the GA on every snapshot it is offered.
/// Call `i` uses seed `mix(config.seed, i)`.
#[derive(Clone, Debug)]
pub struct GaRescheduler {
    config: GaConfig,
    records: Vec<EpochRecord>,
    errors: Vec<String>,
}

impl GaRescheduler {
    pub fn new(config: GaConfig) -> Result<Self, GaError> {
        config.check()?;
        Ok(Self {
            config,
            records: Vec::new(),
            errors: Vec::new(),
        })
    }

    pub fn records(&self) -> &[EpochRecord] {
        &self.records
    }

    pub fn errors(&self) -> &[String] {
        &self.errors
    }

    pub fn total_evaluations(&self) -> u64 {
        self.records.len() as u64 * self.config.budget()
    }
}

/// SplitMix64 finalizer, used to derive per-call seeds.
pub fn mix_seed(seed: u64, index: u64) -> u64 {
    let mut z = seed ^ index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

impl Rescheduler for GaRescheduler {
    fn reschedule(&mut self, snapshot: &Snapshot) -> Option<Schedule> {
        let waiting = snapshot.waiting_count();
        if waiting == 0 {
            return None;
        }
        let epoch = self.records.len();
        let config = GaConfig {
            seed: mix_seed(self.config.seed, epoch as u64),
            ..self.config.clone()
        };
        match optimize(snapshot, &config) {
            Ok(out) => {
                self.records.push(EpochRecord {
                    epoch,
                    time: snapshot.time,
                    waiting,
                    initial_fitness: out.initial_fitness,
                    best_fitness: out.best_fitness,
                });
                Some(out.best)
            }
            Err(e) => {
                self.errors.push(format!("t={}: {e}", snapshot.time));
                None
            }
        }
    }
}
