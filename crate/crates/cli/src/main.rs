//! `johnforge`: one subcommand per pipeline stage, files as the interface.
//!
//! Exit status 0 on success, 2 on usage errors (bad flags, bad config), 1 on
//! computation errors, which are also reported as JSON on stderr.

mod args;
mod commands;
mod output;

use std::process::ExitCode;

use clap::Parser;
use serde_json::json;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] johnforge_core::Error),
    #[error("io error: {0}")]
    Io(String),
    #[error("format error: {0}")]
    Format(String),
}

impl CliError {
    fn kind(&self) -> &'static str {
        match self {
            CliError::Usage(_) => "usage",
            CliError::Core(e) => e.kind(),
            CliError::Io(_) => "io",
            CliError::Format(_) => "format",
        }
    }
}

fn main() -> ExitCode {
    let cli = match args::Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match commands::run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}\n\nFor more information, try '--help'.");
            ExitCode::from(2)
        }
        Err(e) => {
            let report = json!({
                "schema": johnforge_core::SCHEMA,
                "error": { "kind": e.kind(), "message": e.to_string() },
            });
            eprintln!("{report}");
            ExitCode::from(1)
        }
    }
}
