//! `oneway` — command-line driver for the one-way quantum computation
//! simulator.
//!
//! Subcommands:
//! * `run` — execute Deutsch's algorithm repeatedly on a (possibly noisy)
//!   cluster resource and report classification statistics next to the
//!   exact branch enumeration.
//! * `tomography` — simulate an over-complete tomography experiment of the
//!   resource or of the output register, reconstruct the state by maximum
//!   likelihood, and write the raw counts (CSV) and the reconstruction
//!   (JSON) to disk.
//! * `sweep` — exact white-noise sweep: resource fidelity, success
//!   probability and output fidelities per noise weight, as CSV.
//!
//! Every command is bit-reproducible for a fixed `--seed`. Exit codes: 0 on
//! success, 2 for configuration errors, 3 for I/O or file-format errors,
//! 4 for estimation failures.

mod commands;

use std::process::ExitCode;

use clap::{Parser, Subcommand};
use oneway_core::Error;

use commands::{RunArgs, SweepArgs, TomographyArgs};

#[derive(Parser)]
#[command(
    name = "oneway",
    about = "Deutsch's algorithm on a four-qubit cluster state: measurement programs with \
             feed-forward, synthetic tomography and noise analysis",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the algorithm and classify the oracle from sampled readouts.
    Run(RunArgs),
    /// Simulate state tomography and reconstruct by maximum likelihood.
    Tomography(TomographyArgs),
    /// Exact sweep over white-noise weights, written as CSV.
    Sweep(SweepArgs),
}

fn exit_code_for(err: &Error) -> u8 {
    match err {
        Error::Config(_) | Error::Dimension(_) | Error::OutOfRange(_) => 2,
        Error::Io(_) | Error::Format(_) => 3,
        Error::ImpossibleOutcome | Error::Estimation(_) => 4,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(args) => commands::run(&args),
        Command::Tomography(args) => commands::tomography(&args),
        Command::Sweep(args) => commands::sweep(&args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(exit_code_for(&err))
        }
    }
}
