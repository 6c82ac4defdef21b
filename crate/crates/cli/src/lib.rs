//! Command-line front end of `binmed`: fitting from data files,
//! coefficient-mode effects, simulation, exact-versus-approximate
//! comparison and self-verification.

pub mod args;
pub mod coef;
pub mod commands;
pub mod data;
pub mod error;
pub mod profile;
pub mod report;

use std::ffi::OsString;
use std::io::Write;
use std::path::Path;

use clap::Parser;

use crate::args::{Cli, Command};
use crate::commands::Output;
use crate::error::{CliError, CliResult};

pub fn execute(cli: &Cli) -> CliResult<Output> {
    match &cli.command {
        Command::Fit(a) => commands::fit(a),
        Command::Effects(a) => commands::effects(a),
        Command::Simulate(a) => commands::simulate_cmd(a),
        Command::Compare(a) => commands::compare(a),
        Command::Verify(a) => commands::verify_cmd(a),
    }
}

fn json_destination(cli: &Cli) -> Option<&Path> {
    match &cli.command {
        Command::Fit(a) => a.output.as_deref(),
        Command::Effects(a) => a.output.as_deref(),
        Command::Compare(a) => a.output.as_deref(),
        Command::Verify(a) => a.output.as_deref(),
        Command::Simulate(_) => None,
    }
}

fn write_json(path: &Path, value: &serde_json::Value) -> CliResult<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| CliError::json("report", e))?;
    text.push('\n');
    std::fs::write(path, text).map_err(|e| CliError::io(path, e))
}

/// Runs the command line and returns the process exit status. Errors are
/// reported on standard error as a single `ERROR <category>: ...` line.
pub fn run_from_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let result = execute(&cli).and_then(|out| {
        print!("{}", out.text);
        let _ = std::io::stdout().flush();
        if let (Some(path), Some(json)) = (json_destination(&cli), &out.json) {
            write_json(path, json)?;
        }
        match out.failure {
            Some(f) => Err(f),
            None => Ok(()),
        }
    });
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("{}", e.line());
            e.exit_code()
        }
    }
}
