//! Front end for `expmc`: graph generation, estimation runs, convergence
//! studies and benchmarks, all writing CSV.

pub mod args;
pub mod commands;
pub mod config;
pub mod record;


use std::io::Write;

use anyhow::Context;

use crate::args::{Cli, Command};
use crate::commands::{cmd_bench, cmd_convergence, cmd_estimate, cmd_generate, output, write_vector, Report};
use crate::record::write_csv;

pub use crate::commands::{Graph, Series};
pub use crate::config::{BenchConfig, ConvergenceConfig, Discretization, GraphSource, RunConfig, Sweep, Target};
pub use crate::record::BenchRecord;

/// Runs a parsed command line. CSV goes to `--out` or stdout; summary lines
/// go to stdout when the CSV has its own file and to stderr otherwise.
pub fn run(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Command::Generate(g) => {
            let spec = g.generator.spec(g.seed)?.context("generate needs --gen KIND --n N")?;
            let mut out = output(g.out.as_deref())?;
            let s = cmd_generate(&spec, &mut out)?;
            out.flush()?;
            drop(out);
            summary(g.out.is_some(), &[format!("n = {} edges = {} dbar = {} dmax = {}", s.n, s.edges, s.dbar, s.dmax)]);
            Ok(())
        }
        Command::Estimate(e) => {
            let cfg = e.run.config()?;
            let report = cmd_estimate(&cfg)?;
            if let (Some(path), Some(v)) = (&e.vector_out, &report.vector) {
                write_vector(v, output(Some(path))?)?;
            }
            finish(&report, &cfg)
        }
        Command::Convergence(c) => {
            let cfg = c.config()?;
            finish(&cmd_convergence(&cfg)?, &cfg.run)
        }
        Command::Bench(b) => {
            let cfg = b.config()?;
            finish(&cmd_bench(&cfg)?, &cfg.run)
        }
    }
}

fn finish(report: &Report, cfg: &RunConfig) -> anyhow::Result<()> {
    let mut out = output(cfg.out.as_deref())?;
    write_csv(&report.records, &mut out)?;
    out.flush()?;
    summary(cfg.out.is_some(), &report.notes);
    Ok(())
}

fn summary(to_stdout: bool, lines: &[String]) {
    for line in lines {
        if to_stdout {
            println!("{line}");
        } else {
            eprintln!("{line}");
        }
    }
}
