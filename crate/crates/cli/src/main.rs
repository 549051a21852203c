//! `tiersla`: generate workloads, run one policy, compare policies.
//!
//! Exit codes: 0 success, 2 usage error, 3 bad input (workload file,
//! parameters), 4 internal invariant violation during a run.

use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};

use tiersla_core::experiment::{
    self, parse_policy, ExperimentConfig, ExperimentError, FreezePoint, PolicySpec, Scenario,
};
use tiersla_core::model::EnvironmentConfig;
use tiersla_core::report;
use tiersla_core::sim::SimError;
use tiersla_core::workload::{self, WorkloadSpec};
use tiersla_core::{AllowanceMode, Epoch, GaConfig, PenaltyModel};

#[derive(Parser)]
#[command(name = "tiersla", version, about = "Multi-tier SLA-aware job scheduling testbed")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a workload file.
    Generate {
        #[command(flatten)]
        workload: WorkloadArgs,
        #[arg(long, env = "TIERSLA_SEED", default_value_t = 1)]
        seed: u64,
        /// Output file; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run one policy on one workload.
    Run {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long, env = "TIERSLA_POLICY", default_value = "ga-virtualized")]
        policy: String,
        #[arg(long, env = "TIERSLA_SEED", default_value_t = 1)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = ScenarioArg::Snapshot)]
        scenario: ScenarioArg,
        /// Snapshot runs freeze after this many arrivals (default: all).
        #[arg(long)]
        freeze_after: Option<usize>,
        /// Record an event trace (stream runs).
        #[arg(long)]
        trace: bool,
    },
    /// Run several policies over several seeds as end-to-end streams.
    Compare {
        #[command(flatten)]
        common: CommonArgs,
        /// Comma-separated policies, e.g. `wrr,wlc,ga-virtualized-wpt`.
        #[arg(
            long,
            env = "TIERSLA_POLICIES",
            default_value = "wrr,wlc,ga-segmented,ga-virtualized"
        )]
        policies: String,
        /// Comma-separated seeds or an inclusive range `a-b`.
        #[arg(long, env = "TIERSLA_SEEDS", default_value = "1-10")]
        seeds: String,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum ScenarioArg {
    Snapshot,
    Stream,
}

#[derive(Args)]
struct WorkloadArgs {
    /// Number of jobs `l`.
    #[arg(long, env = "TIERSLA_JOBS", default_value_t = 100)]
    jobs: usize,
    /// Poisson arrival rate.
    #[arg(long, env = "TIERSLA_LAMBDA", default_value_t = 2.0)]
    lambda: f64,
    /// Exponential service rate at every tier.
    #[arg(long, env = "TIERSLA_MU", default_value_t = 1.0)]
    mu: f64,
    /// Allowance as a fraction of total execution time.
    #[arg(long, env = "TIERSLA_ALLOWANCE", default_value_t = 0.2)]
    allowance: f64,
    #[arg(long, env = "TIERSLA_TIERS", default_value_t = 2)]
    tiers: usize,
}

#[derive(Args)]
struct CommonArgs {
    #[command(flatten)]
    workload: WorkloadArgs,
    /// Resources per tier: one count for every tier, or a comma list.
    #[arg(long, env = "TIERSLA_RESOURCES", default_value = "3")]
    resources: String,
    #[arg(long, env = "TIERSLA_NU", default_value_t = 0.01)]
    nu: f64,
    #[arg(long, env = "TIERSLA_CHI", default_value_t = 1.0)]
    chi: f64,
    /// Allowance mode applied to policies without a `-wal`/`-wpt` suffix.
    #[arg(long, env = "TIERSLA_MODE", default_value = "wal")]
    mode: AllowanceMode,
    #[arg(long, env = "TIERSLA_POPULATION", default_value_t = 10)]
    population: usize,
    #[arg(long, env = "TIERSLA_GENERATIONS", default_value_t = 1000)]
    generations: usize,
    /// Online rescheduling cadence: `event`, `arrivals:K` or `interval:DT`.
    #[arg(long, env = "TIERSLA_EPOCH", default_value = "event")]
    epoch: Epoch,
    /// Read jobs from this file instead of generating them.
    #[arg(long = "workload", env = "TIERSLA_WORKLOAD")]
    workload_file: Option<PathBuf>,
    #[arg(long, env = "TIERSLA_OUT_DIR")]
    out_dir: Option<PathBuf>,
}

/// Error carrying its exit code.
struct Failure {
    code: u8,
    error: anyhow::Error,
}

fn input(error: impl Into<anyhow::Error>) -> Failure {
    Failure {
        code: 3,
        error: error.into(),
    }
}

impl From<ExperimentError> for Failure {
    fn from(e: ExperimentError) -> Self {
        let code = match &e {
            ExperimentError::Sim(SimError::Model(_) | SimError::TierMismatch { .. })
            | ExperimentError::Workload(_)
            | ExperimentError::Config(_) => 3,
            _ => 4,
        };
        Failure { code, error: e.into() }
    }
}

impl WorkloadArgs {
    fn spec(&self, seed: u64) -> WorkloadSpec {
        WorkloadSpec {
            arrival_rate: self.lambda,
            service_rate: self.mu,
            num_jobs: self.jobs,
            allowance_fraction: self.allowance,
            seed,
        }
    }
}

fn parse_resources(s: &str, tiers: usize) -> anyhow::Result<Vec<usize>> {
    let counts: Vec<usize> = s
        .split(',')
        .map(|x| {
            x.trim()
                .parse::<usize>()
                .with_context(|| format!("bad resource count `{x}`"))
        })
        .collect::<anyhow::Result<_>>()?;
    match counts.len() {
        1 => Ok(vec![counts[0]; tiers]),
        n if n == tiers => Ok(counts),
        n => Err(anyhow!("{n} resource counts for {tiers} tiers")),
    }
}

/// `1,4,9` or `1-10`.
fn parse_seeds(s: &str) -> anyhow::Result<Vec<u64>> {
    if let Some((a, b)) = s.split_once('-') {
        let (a, b): (u64, u64) = (a.trim().parse()?, b.trim().parse()?);
        if a > b {
            return Err(anyhow!("empty seed range {s}"));
        }
        return Ok((a..=b).collect());
    }
    s.split(',')
        .map(|x| x.trim().parse::<u64>().with_context(|| format!("bad seed `{x}`")))
        .collect()
}

fn config(common: &CommonArgs) -> Result<ExperimentConfig, Failure> {
    let w = &common.workload;
    let penalty = PenaltyModel {
        chi: common.chi,
        nu: common.nu,
    };
    let resources = parse_resources(&common.resources, w.tiers).map_err(input)?;
    let env = EnvironmentConfig::new(resources, penalty).map_err(input)?;
    let fixed_jobs = match &common.workload_file {
        Some(path) => Some(Arc::new(workload::load(path).map_err(input)?)),
        None => None,
    };
    let ga = GaConfig {
        population: common.population,
        generations: common.generations,
        ..GaConfig::default()
    };
    ga.check().map_err(input)?;
    w.spec(0).check().map_err(input)?;
    Ok(ExperimentConfig {
        env,
        workload: w.spec(0),
        ga,
        epoch: common.epoch,
        fixed_jobs,
        ..ExperimentConfig::default()
    })
}

fn policies(list: &str, mode: AllowanceMode) -> Result<Vec<PolicySpec>, Failure> {
    list.split(',')
        .map(|p| parse_policy(p.trim(), mode).map_err(|e| input(anyhow!(e))))
        .collect()
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Generate { workload: w, seed, out } => {
            let jobs = workload::generate(&w.spec(seed), w.tiers).map_err(input)?;
            match out {
                Some(path) => workload::save(&jobs, &path).map_err(input)?,
                None => print!("{}", workload::to_string(&jobs)),
            }
        }
        Command::Run {
            common,
            policy,
            seed,
            scenario,
            freeze_after,
            trace,
        } => {
            let mut cfg = config(&common)?;
            cfg.trace = trace;
            if let Some(k) = freeze_after {
                cfg.freeze = FreezePoint::AfterArrivals(k);
            }
            let policy = parse_policy(&policy, common.mode).map_err(|e| input(anyhow!(e)))?;
            let scenario = match scenario {
                ScenarioArg::Snapshot => Scenario::Snapshot,
                ScenarioArg::Stream => Scenario::Stream,
            };
            let out = experiment::run_seed(scenario, &policy, &cfg, seed)?;
            for i in &out.incidents {
                eprintln!("incident: {i}");
            }
            print!("{}", report::summary_table(&out.summary));
            if let Some(dir) = &common.out_dir {
                report::write_run(dir, &out).map_err(input)?;
            }
        }
        Command::Compare {
            common,
            policies: list,
            seeds,
        } => {
            let cfg = config(&common)?;
            let policies = policies(&list, common.mode)?;
            let seeds = parse_seeds(&seeds).map_err(input)?;
            let out = experiment::compare(&policies, &seeds, &cfg)?;
            print!("{}", report::compare_table(&out));
            if let Some(dir) = &common.out_dir {
                report::write_compare(dir, &out).map_err(input)?;
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {:#}", f.error);
            ExitCode::from(f.code)
        }
    }
}
