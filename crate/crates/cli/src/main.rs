mod args;
mod commands;

use std::process::ExitCode;

use clap::Parser;

use args::{Cli, Command};
use commands::UsageError;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let level = if cli.verbose { "info" } else { "warn" };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level))
        .format_timestamp(None)
        .init();

    let verbose = cli.verbose;
    let result = match cli.command {
        Command::Extract(a) => commands::extract(a, verbose),
        Command::Validate(a) => commands::validate_pairs(a, verbose),
        Command::Sweep(a) => commands::sweep(a, verbose),
        Command::Evaluate(a) => commands::evaluate(a, verbose),
        Command::Report(a) => commands::report(a, verbose),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) if e.is::<UsageError>() => {
            eprintln!("tcomqa: {e}");
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("tcomqa: {e:#}");
            ExitCode::from(2)
        }
    }
}
