use std::process::ExitCode;

use clap::Parser;
use matexp_cli::args::Cli;

fn main() -> ExitCode {
    match matexp_cli::run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
