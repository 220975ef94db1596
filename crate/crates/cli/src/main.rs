mod args;
mod commands;
mod config;
mod manifest;

use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{CommandFactory, FromArgMatches};

use args::Cli;

/// Failures surfaced to the user. Each maps to one exit code and is printed
/// as a single tab-separated line on stderr.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Core(tokentopic_core::Error),
}

impl From<tokentopic_core::Error> for CliError {
    fn from(e: tokentopic_core::Error) -> Self {
        CliError::Core(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Core(e.into())
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        use tokentopic_core::Error as E;
        match self {
            CliError::Usage(_) | CliError::Core(E::Config(_)) => 2,
            CliError::Core(E::Io(_)) => 1,
            CliError::Core(_) => 3,
        }
    }

    fn kind(&self) -> &'static str {
        match self {
            CliError::Usage(_) => "usage",
            CliError::Core(e) => e.kind(),
        }
    }

    fn message(&self) -> String {
        match self {
            CliError::Usage(m) => m.clone(),
            CliError::Core(e) => e.to_string(),
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;

fn report(err: &CliError) -> ExitCode {
    let message = err.message().replace(['\n', '\t'], " ");
    eprintln!("error\tkind={}\tmessage={}", err.kind(), message.trim());
    ExitCode::from(err.exit_code())
}

fn parse(argv: Vec<String>) -> CliResult<Cli> {
    let matches = Cli::command().try_get_matches_from(argv).map_err(|e| match e.kind() {
        ErrorKind::DisplayHelp | ErrorKind::DisplayVersion | ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand => {
            e.exit()
        }
        _ => CliError::Usage(clap_summary(&e)),
    })?;
    Cli::from_arg_matches(&matches).map_err(|e| CliError::Usage(clap_summary(&e)))
}

fn clap_summary(e: &clap::Error) -> String {
    let text = e.to_string();
    let first = text.lines().find(|l| !l.trim().is_empty()).unwrap_or("invalid arguments");
    first.trim_start_matches("error: ").to_string()
}

fn main() -> ExitCode {
    let argv: Vec<String> = std::env::args().collect();
    let result = config::merge_config(argv)
        .and_then(parse)
        .and_then(commands::run);
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => report(&e),
    }
}
