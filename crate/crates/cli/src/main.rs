mod args;
mod commands;
mod failure;

use std::process::ExitCode;

use clap::Parser;

use crate::args::{Cli, Command};
use crate::failure::EXIT_USAGE;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code as u8);
        }
    };
    let result = match &cli.command {
        Command::Validate(args) => commands::validate(args),
        Command::Simulate(args) => commands::simulate(args),
        Command::Energy(args) => commands::energy(args),
        Command::Stability(args) => commands::stability(args),
    };
    match result {
        Ok(code) => ExitCode::from(code as u8),
        Err(f) => {
            eprintln!("phstab: {f}");
            ExitCode::from(f.code as u8)
        }
    }
}
