//! Command-line syntax.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use expmc::{BetaRule, GenSpec, Splitting};

use crate::config::{
    BenchConfig, ConfigError, ConvergenceConfig, Discretization, GraphSource, RunConfig, Sweep, Target, DEFAULT_SAMPLES,
};

#[derive(Debug, Parser)]
#[command(name = "expmc", version, about = "Monte Carlo evaluation of exp(beta A) 1 on graphs")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a synthetic graph as a Matrix Market file.
    Generate(GenerateArgs),
    /// Run one estimation and write a CSV record.
    Estimate(EstimateArgs),
    /// Sweep dt or M against the dense exponential and fit log-log slopes.
    Convergence(ConvergenceArgs),
    /// Time fixed-parameter runs across graph sizes or step sizes.
    Bench(BenchArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum GenKindArg {
    SmallWorld,
    ScaleFree,
    ErdosRenyi,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BetaRuleArg {
    /// beta = 1 / lambda_max (power iteration).
    Lmax,
    /// beta = 1 / d_max.
    Dmax,
}

#[derive(Debug, Clone, Args)]
pub struct GeneratorArgs {
    /// Generator kind.
    #[arg(long = "gen", value_enum)]
    pub kind: Option<GenKindArg>,
    /// Number of nodes.
    #[arg(long)]
    pub n: Option<usize>,
    /// Small-world ring radius.
    #[arg(long, default_value_t = 1)]
    pub k: usize,
    /// Small-world shortcut probability per node.
    #[arg(long, default_value_t = 0.4)]
    pub ps: f64,
    /// Scale-free edges per new node.
    #[arg(long, default_value_t = 2)]
    pub m0: usize,
    /// Erdős–Rényi edge probability.
    #[arg(long, default_value_t = 0.01)]
    pub p: f64,
}

impl GeneratorArgs {
    pub fn spec(&self, seed: u64) -> Result<Option<GenSpec>, ConfigError> {
        let Some(kind) = self.kind else { return Ok(None) };
        let n = self.n.ok_or(ConfigError::MissingSize)?;
        Ok(Some(match kind {
            GenKindArg::SmallWorld => GenSpec::small_world(n, self.k, self.ps, seed),
            GenKindArg::ScaleFree => GenSpec::scale_free(n, self.m0, seed),
            GenKindArg::ErdosRenyi => GenSpec::erdos_renyi(n, self.p, seed),
        }))
    }
}

#[derive(Debug, Clone, Args)]
pub struct GenerateArgs {
    #[command(flatten)]
    pub generator: GeneratorArgs,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Output file; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct RunArgs {
    /// Matrix Market input.
    #[arg(long)]
    pub input: Option<PathBuf>,
    #[command(flatten)]
    pub generator: GeneratorArgs,
    /// Seed of the graph generator.
    #[arg(long, default_value_t = 1)]
    pub graph_seed: u64,
    /// Fixed beta; 1 when neither this nor --beta-rule is given.
    #[arg(long, conflicts_with = "beta_rule")]
    pub beta: Option<f64>,
    #[arg(long, value_enum)]
    pub beta_rule: Option<BetaRuleArg>,
    /// Step size; defaults to 0.03125 when --steps is absent too.
    #[arg(long, conflicts_with = "steps")]
    pub dt: Option<f64>,
    /// Number of steps N, with dt = beta / N.
    #[arg(long)]
    pub steps: Option<usize>,
    #[arg(long, default_value_t = DEFAULT_SAMPLES)]
    pub samples: u64,
    /// lie or strang (default); convergence accepts a list and defaults to both.
    #[arg(long, value_delimiter = ',')]
    pub splitting: Vec<Splitting>,
    /// tc, tcn, vector or entry:I.
    #[arg(long, default_value = "tc")]
    pub target: Target,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Worker threads; results do not depend on it.
    #[arg(long)]
    pub workers: Option<usize>,
    /// Also evaluate the dense exponential and record errors.
    #[arg(long)]
    pub oracle: bool,
    /// CSV output; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

impl RunArgs {
    /// The configuration for the first listed splitting.
    pub fn config(&self) -> Result<RunConfig, ConfigError> {
        let graph = match (&self.input, self.generator.spec(self.graph_seed)?) {
            (Some(_), Some(_)) => return Err(ConfigError::ConflictingGraph),
            (Some(p), None) => GraphSource::File(p.clone()),
            (None, Some(spec)) => GraphSource::Generated(spec),
            (None, None) => return Err(ConfigError::MissingGraph),
        };
        let beta = match (self.beta, self.beta_rule) {
            (Some(b), _) => BetaRule::Fixed(b),
            (None, Some(BetaRuleArg::Lmax)) => BetaRule::InverseLambdaMax,
            (None, Some(BetaRuleArg::Dmax)) => BetaRule::InverseDmax,
            (None, None) => BetaRule::Fixed(1.0),
        };
        let workers = self.workers.unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
        let cfg = RunConfig {
            graph,
            beta,
            discretization: Discretization::from_flags(self.dt, self.steps)?,
            samples: self.samples,
            splitting: self.splitting.first().copied().unwrap_or(Splitting::Strang),
            target: self.target,
            seed: self.seed,
            workers,
            oracle: self.oracle,
            out: self.out.clone(),
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Debug, Clone, Args)]
pub struct EstimateArgs {
    #[command(flatten)]
    pub run: RunArgs,
    /// For the vector target: write index,value,std_error rows here.
    #[arg(long)]
    pub vector_out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct ConvergenceArgs {
    #[command(flatten)]
    pub run: RunArgs,
    /// Comma-separated step sizes.
    #[arg(long, value_delimiter = ',', conflicts_with = "m_sweep")]
    pub dt_sweep: Option<Vec<f64>>,
    /// Comma-separated sample counts, run at --dt / --steps.
    #[arg(long, value_delimiter = ',')]
    pub m_sweep: Option<Vec<u64>>,
    /// Independent seeds per sweep point.
    #[arg(long, default_value_t = 1)]
    pub replicates: u32,
    /// Only record splitting errors (dt sweep).
    #[arg(long)]
    pub splitting_only: bool,
}

impl ConvergenceArgs {
    pub fn config(&self) -> Result<ConvergenceConfig, ConfigError> {
        let sweep = match (&self.dt_sweep, &self.m_sweep) {
            (Some(d), None) => Sweep::Dt(d.clone()),
            (None, Some(m)) => Sweep::Samples(m.clone()),
            _ => return Err(ConfigError::SweepChoice),
        };
        let splittings = if self.run.splitting.is_empty() {
            vec![Splitting::Lie, Splitting::Strang]
        } else {
            self.run.splitting.clone()
        };
        let cfg = ConvergenceConfig {
            run: self.run.config()?,
            sweep,
            splittings,
            replicates: self.replicates,
            splitting_only: self.splitting_only,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Debug, Clone, Args)]
pub struct BenchArgs {
    #[command(flatten)]
    pub run: RunArgs,
    /// Comma-separated graph sizes; defaults to --n.
    #[arg(long, value_delimiter = ',')]
    pub n_sweep: Option<Vec<usize>>,
    /// Comma-separated step sizes; defaults to --dt / --steps.
    #[arg(long, value_delimiter = ',')]
    pub dt_sweep: Option<Vec<f64>>,
}

impl BenchArgs {
    pub fn config(&self) -> Result<BenchConfig, ConfigError> {
        let mut run_args = self.run.clone();
        if run_args.generator.n.is_none() {
            run_args.generator.n = self.n_sweep.as_ref().and_then(|s| s.first().copied());
        }
        let run = run_args.config()?;
        let sizes = match &self.n_sweep {
            Some(s) => s.clone(),
            None => vec![run_args.generator.n.ok_or(ConfigError::MissingSize)?],
        };
        let cfg = BenchConfig { run, sizes, dts: self.dt_sweep.clone().unwrap_or_default() };
        cfg.validate()?;
        Ok(cfg)
    }
}
