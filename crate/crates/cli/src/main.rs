//! `psig`: every protocol role as a subcommand over message files.
//!
//! Exit status: 0 on success, 1 when a protocol check or I/O fails, 2 on
//! usage errors.

mod args;
mod commands;
mod home;

use std::process::ExitCode;

use clap::Parser;

use crate::args::Cli;
use crate::commands::CliError;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = e.exit_code();
            let _ = e.print();
            return ExitCode::from(code as u8);
        }
    };
    let out = cli.global.out.clone();
    let result = commands::run(cli);
    let (code, outcome) = match result {
        Ok(outcome) => {
            println!("{}", outcome.message);
            (ExitCode::SUCCESS, outcome)
        }
        Err(err) => {
            eprintln!("error: {err}");
            let code = match err {
                CliError::Usage(_) => 2,
                CliError::Failure(_) => 1,
            };
            (ExitCode::from(code), commands::Outcome::failed(&err))
        }
    };
    if let Some(path) = out {
        if let Err(e) = std::fs::write(&path, outcome.to_json()) {
            eprintln!("error: writing {}: {e}", path.display());
            return ExitCode::from(1);
        }
    }
    code
}
