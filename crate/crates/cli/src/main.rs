use std::process::ExitCode;

use clap::Parser;
use expmc_cli::args::Cli;

fn main() -> ExitCode {
    match expmc_cli::run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
