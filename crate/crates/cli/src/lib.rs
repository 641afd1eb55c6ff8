//! Scenario-driven experiment runner for `spectral-lab`.
//!
//! A scenario is a TOML file naming a sequence expression, an optional random
//! perturbation and a list of checks. [`runner::run`] evaluates every check at every
//! size and [`output`] writes `results.csv` and `summary.json`.

pub mod catalog;
pub mod output;
pub mod runner;
pub mod scenario;

use std::path::{Path, PathBuf};

use thiserror::Error;

pub use runner::{run, ResultRecord, RunReport, Verdict};
pub use scenario::Scenario;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),

    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

impl CliError {
    pub(crate) fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.to_path_buf(),
            source,
        }
    }
}

/// Overrides applied on top of a scenario file.
#[derive(Debug, Clone, Default)]
pub struct Options {
    pub seed: Option<u64>,
    pub workers: Option<usize>,
    pub nmax: Option<usize>,
}

/// Applies the overrides, runs the scenario and writes both result files into `out`.
pub fn execute(mut scenario: Scenario, options: &Options, out: &Path) -> Result<RunReport, CliError> {
    if let Some(seed) = options.seed {
        scenario = scenario.with_seed(seed);
    }
    if let Some(nmax) = options.nmax {
        scenario = scenario.with_nmax(nmax);
    }
    let report = run(&scenario, options.workers)?;
    output::write_all(&report, out)?;
    Ok(report)
}

/// Reads and parses a scenario file; errors carry the path.
pub fn load(path: &Path) -> Result<Scenario, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    Scenario::parse(&text).map_err(|e| match e {
        CliError::Config(msg) => CliError::Config(format!("{}: {msg}", path.display())),
        other => other,
    })
}
