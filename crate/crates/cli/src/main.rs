//! `edgefuse` command-line harness.
//!
//! Exit codes: 0 on success, 2 when an input file or argument is invalid,
//! 3 when an internal check fails or output cannot be written.

mod args;
mod commands;
mod output;

use std::fmt;
use std::path::Path;
use std::process::ExitCode;

use clap::Parser;

use args::{Cli, Command};

#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub message: String,
}

impl CliError {
    pub fn usage(message: impl Into<String>) -> Self {
        CliError {
            code: 2,
            message: message.into(),
        }
    }

    pub fn io(path: &Path, e: std::io::Error) -> Self {
        CliError {
            code: 3,
            message: format!("{}: {e}", path.display()),
        }
    }
}

impl From<edgefuse::Error> for CliError {
    fn from(e: edgefuse::Error) -> Self {
        // core I/O errors only arise while reading inputs
        let user = e.is_user_error() || matches!(e, edgefuse::Error::Io { .. });
        CliError {
            code: if user { 2 } else { 3 },
            message: e.to_string(),
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Schedule(a) => commands::schedule(a),
        Command::Sweep(a) => commands::sweep(a),
        Command::Mapmerge(a) => commands::mapmerge(a),
        Command::Profile(a) => commands::profile(a),
        Command::Generate(a) => commands::generate(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code)
        }
    }
}
