//! Command-line front end: fitting on CSV data, simulation replication,
//! optimizer benchmarks and correlation screening.
//!
//! Every command returns its structured records (see [`report`]) and can
//! write them as JSON lines; [`run`] also prints a human-readable table.

pub mod bench;
pub mod cli;
pub mod dataset;
pub mod error;
pub mod fit;
pub mod report;
pub mod screen;
pub mod simulate;

pub use cli::{Cli, Command};
pub use error::{CliError, Result};

/// Runs one command and returns the table to print.
pub fn run(cli: &Cli) -> Result<String> {
    match &cli.command {
        Command::Fit(a) => fit::cmd_fit(a).map(|o| fit::render(&o)),
        Command::Simulate(a) => simulate::cmd_simulate(a).map(|r| simulate::render(&r)),
        Command::Bench(a) => bench::cmd_bench(a).map(|r| bench::render(&r)),
        Command::Screen(a) => screen::cmd_screen(a).map(|(_, r)| screen::render(&r)),
    }
}

/// Sizes the global worker pool from the environment, if set.
pub fn configure_threads() -> Result<()> {
    let Ok(text) = std::env::var(cli::THREADS_ENV) else {
        return Ok(());
    };
    let n: usize = text
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::Config(format!("{} must be a positive integer, got '{text}'", cli::THREADS_ENV)))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Config(e.to_string()))
}
