//! Command-line front end: lattice extraction, figure sweeps, embedding,
//! annealing and the end-to-end pipeline.

pub mod args;
pub mod commands;
pub mod output;
pub mod pipeline;

use std::ffi::OsString;
use std::io::Write;

use clap::Parser;

pub use args::{Cli, Command};
pub use output::{Artifacts, CliError};

/// Exit code for domain errors.
pub const EXIT_DOMAIN: i32 = 1;
/// Exit code for usage errors (bad flags, unreadable or unparsable inputs).
pub const EXIT_USAGE: i32 = 2;

/// Parses arguments, runs the command and writes its artifacts. Errors are
/// reported as a JSON object on stderr. Returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = e.print();
                return 0;
            }
            report(&CliError::Usage(e.render().to_string().trim().to_string()));
            return EXIT_USAGE;
        }
    };
    if let Err(e) = configure_threads() {
        report(&e);
        return e.exit_code();
    }
    match commands::run(&cli.command).and_then(|artifacts| artifacts.emit(cli.command.out())) {
        Ok(()) => 0,
        Err(e) => {
            report(&e);
            e.exit_code()
        }
    }
}

fn report(e: &CliError) {
    let mut stderr = std::io::stderr().lock();
    let _ = writeln!(stderr, "{}", e.to_json());
}

/// Caps the rayon pool at `FGA_THREADS` when set.
fn configure_threads() -> Result<(), CliError> {
    let Ok(value) = std::env::var("FGA_THREADS") else { return Ok(()) };
    let threads: usize = value
        .trim()
        .parse()
        .ok()
        .filter(|&t| t > 0)
        .ok_or_else(|| CliError::Usage(format!("FGA_THREADS must be a positive integer, got {value:?}")))?;
    // A second initialisation in the same process keeps the first pool.
    let _ = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global();
    Ok(())
}
