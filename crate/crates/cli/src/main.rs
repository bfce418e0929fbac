//! `pauli-lre`: simulate Pauli measurement records, reconstruct states and run
//! the scaling experiments.
//!
//! Exit status is 0 on success, 2 for invalid input and 3 for I/O failures.

mod args;
mod commands;

use std::process::ExitCode;

use clap::Parser;

fn main() -> ExitCode {
    let cli = args::Cli::parse();
    match commands::run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
