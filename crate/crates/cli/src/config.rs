//! Validated run configuration shared by the subcommands.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use expmc::{BetaRule, GenSpec, PathParams, Splitting};
use thiserror::Error;

/// Step size used when neither `--dt` nor `--steps` is given.
pub const DEFAULT_DT: f64 = 0.03125;
pub const DEFAULT_SAMPLES: u64 = 1_000_000;

#[derive(Debug, Error, PartialEq)]
pub enum ConfigError {
    #[error("give either a step size or a step count, not both")]
    ConflictingDiscretization,
    #[error("give either an input file or a generator, not both")]
    ConflictingGraph,
    #[error("no graph: pass --input PATH or --gen KIND --n N")]
    MissingGraph,
    #[error("--gen needs --n")]
    MissingSize,
    #[error("worker count must be at least 1")]
    NoWorkers,
    #[error("sample count must be at least 1")]
    NoSamples,
    #[error("sweep list is empty")]
    EmptySweep,
    #[error("give exactly one of a step-size sweep and a sample-count sweep")]
    SweepChoice,
    #[error("invalid target `{0}`; expected tc, tcn, vector or entry:I")]
    BadTarget(String),
    #[error("{0}")]
    Invalid(String),
}

#[derive(Debug, Clone, PartialEq)]
pub enum GraphSource {
    File(PathBuf),
    Generated(GenSpec),
}

impl fmt::Display for GraphSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GraphSource::File(p) => write!(f, "{}", p.display()),
            GraphSource::Generated(spec) => write!(f, "{spec} seed={}", spec.seed),
        }
    }
}

/// What the estimator reports for `v = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Target {
    /// Total communicability `1^T exp(beta A) 1`.
    Tc,
    /// Total communicability divided by `n`.
    Tcn,
    /// The full vector `exp(beta A) 1`; the scalar column holds its sum.
    Vector,
    Entry(usize),
}

impl fmt::Display for Target {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Target::Tc => f.write_str("tc"),
            Target::Tcn => f.write_str("tcn"),
            Target::Vector => f.write_str("vector"),
            Target::Entry(i) => write!(f, "entry:{i}"),
        }
    }
}

impl FromStr for Target {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, ConfigError> {
        let lower = s.trim().to_ascii_lowercase();
        match lower.as_str() {
            "tc" => Ok(Target::Tc),
            "tcn" => Ok(Target::Tcn),
            "vector" => Ok(Target::Vector),
            other => other
                .strip_prefix("entry:")
                .and_then(|i| i.parse().ok())
                .map(Target::Entry)
                .ok_or_else(|| ConfigError::BadTarget(s.to_string())),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Discretization {
    Dt(f64),
    Steps(usize),
}

impl Discretization {
    /// Builds from the two optional flags; neither means the default step size.
    pub fn from_flags(dt: Option<f64>, steps: Option<usize>) -> Result<Self, ConfigError> {
        match (dt, steps) {
            (Some(_), Some(_)) => Err(ConfigError::ConflictingDiscretization),
            (Some(dt), None) => Ok(Discretization::Dt(dt)),
            (None, Some(n)) => Ok(Discretization::Steps(n)),
            (None, None) => Ok(Discretization::Dt(DEFAULT_DT)),
        }
    }

    pub fn params(self, beta: f64, samples: u64, splitting: Splitting, seed: u64) -> expmc::Result<PathParams> {
        match self {
            Discretization::Dt(dt) => PathParams::from_dt(beta, dt, samples, splitting, seed),
            Discretization::Steps(n) => PathParams::new(beta, n, samples, splitting, seed),
        }
    }
}

/// Everything one estimator run needs.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub graph: GraphSource,
    pub beta: BetaRule,
    pub discretization: Discretization,
    pub samples: u64,
    pub splitting: Splitting,
    pub target: Target,
    pub seed: u64,
    pub workers: usize,
    /// Compare against the dense oracle and fill the error columns.
    pub oracle: bool,
    pub out: Option<PathBuf>,
}

impl RunConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.workers == 0 {
            return Err(ConfigError::NoWorkers);
        }
        if self.samples == 0 {
            return Err(ConfigError::NoSamples);
        }
        match self.discretization {
            Discretization::Dt(dt) if !(dt > 0.0 && dt.is_finite()) => {
                return Err(ConfigError::Invalid(format!("step size must be positive, got {dt}")));
            }
            Discretization::Steps(0) => return Err(ConfigError::Invalid("step count must be positive".into())),
            _ => {}
        }
        if let BetaRule::Fixed(b) = self.beta {
            if !(b > 0.0 && b.is_finite()) {
                return Err(ConfigError::Invalid(format!("beta must be positive, got {b}")));
            }
        }
        if let GraphSource::Generated(spec) = &self.graph {
            spec.validate().map_err(|e| ConfigError::Invalid(e.to_string()))?;
        }
        Ok(())
    }
}

/// The swept quantity of a convergence study.
#[derive(Debug, Clone, PartialEq)]
pub enum Sweep {
    /// Step sizes; the base discretization is ignored.
    Dt(Vec<f64>),
    /// Sample counts at the base discretization.
    Samples(Vec<u64>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceConfig {
    pub run: RunConfig,
    pub sweep: Sweep,
    pub splittings: Vec<Splitting>,
    /// Independent seeds per sweep point; errors are combined as RMS.
    pub replicates: u32,
    /// Skip the Monte Carlo runs and only record splitting errors.
    pub splitting_only: bool,
}

impl ConvergenceConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        self.run.validate()?;
        let empty = match &self.sweep {
            Sweep::Dt(v) => v.is_empty(),
            Sweep::Samples(v) => v.is_empty(),
        };
        if empty || self.splittings.is_empty() {
            return Err(ConfigError::EmptySweep);
        }
        if let Sweep::Samples(v) = &self.sweep {
            if v.contains(&0) {
                return Err(ConfigError::NoSamples);
            }
            if self.splitting_only {
                return Err(ConfigError::Invalid("a sample sweep needs the Monte Carlo runs".into()));
            }
        }
        if self.replicates == 0 {
            return Err(ConfigError::Invalid("replicates must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchConfig {
    pub run: RunConfig,
    /// Graph sizes; each is generated with the base generator spec.
    pub sizes: Vec<usize>,
    /// Step sizes; empty means the base discretization only.
    pub dts: Vec<f64>,
}

impl BenchConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        self.run.validate()?;
        if !matches!(self.run.graph, GraphSource::Generated(_)) {
            return Err(ConfigError::Invalid("bench sweeps generated graphs; use --gen".into()));
        }
        if self.sizes.is_empty() {
            return Err(ConfigError::EmptySweep);
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base() -> RunConfig {
        RunConfig {
            graph: GraphSource::Generated(GenSpec::small_world(10, 1, 0.4, 1)),
            beta: BetaRule::Fixed(1.0),
            discretization: Discretization::Dt(0.1),
            samples: 10,
            splitting: Splitting::Strang,
            target: Target::Tc,
            seed: 0,
            workers: 1,
            oracle: false,
            out: None,
        }
    }

    #[test]
    fn targets_parse() {
        assert_eq!("tc".parse::<Target>().unwrap(), Target::Tc);
        assert_eq!("TCN".parse::<Target>().unwrap(), Target::Tcn);
        assert_eq!("entry:7".parse::<Target>().unwrap(), Target::Entry(7));
        assert!("entry:x".parse::<Target>().is_err());
        assert!("sum".parse::<Target>().is_err());
        assert_eq!(Target::Entry(3).to_string(), "entry:3");
    }

    #[test]
    fn discretization_flags() {
        assert_eq!(Discretization::from_flags(None, None).unwrap(), Discretization::Dt(DEFAULT_DT));
        assert_eq!(Discretization::from_flags(None, Some(4)).unwrap(), Discretization::Steps(4));
        assert_eq!(Discretization::from_flags(Some(0.1), Some(4)), Err(ConfigError::ConflictingDiscretization));
        let p = Discretization::Dt(0.25).params(1.0, 5, Splitting::Lie, 0).unwrap();
        assert_eq!(p.n_steps, 4);
    }

    #[test]
    fn run_config_validation() {
        assert!(base().validate().is_ok());
        assert_eq!(RunConfig { workers: 0, ..base() }.validate(), Err(ConfigError::NoWorkers));
        assert_eq!(RunConfig { samples: 0, ..base() }.validate(), Err(ConfigError::NoSamples));
        assert!(RunConfig { discretization: Discretization::Dt(-1.0), ..base() }.validate().is_err());
        assert!(RunConfig { beta: BetaRule::Fixed(0.0), ..base() }.validate().is_err());
        let bad_gen = GraphSource::Generated(GenSpec::small_world(2, 1, 0.4, 1));
        assert!(RunConfig { graph: bad_gen, ..base() }.validate().is_err());
    }

    #[test]
    fn sweep_validation() {
        let c = ConvergenceConfig {
            run: base(),
            sweep: Sweep::Dt(vec![]),
            splittings: vec![Splitting::Lie],
            replicates: 1,
            splitting_only: false,
        };
        assert_eq!(c.validate(), Err(ConfigError::EmptySweep));
        let c = ConvergenceConfig { sweep: Sweep::Samples(vec![10]), splitting_only: true, ..c };
        assert!(c.validate().is_err());
        let b = BenchConfig {
            run: RunConfig { graph: GraphSource::File("g.mtx".into()), ..base() },
            sizes: vec![10],
            dts: vec![],
        };
        assert!(b.validate().is_err());
    }
}
