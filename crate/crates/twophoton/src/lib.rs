//! Command-line front end for `twophoton-core`: run configuration files,
//! parallel drivers and figure-ready output files.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod output;
pub mod run;

use std::io;
use std::path::{Path, PathBuf};

use config::{ConfigError, RunConfig};
use output::{write_atomic, OutputFile};

/// One pipeline per invocation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Command {
    /// Comb correlation Γ²(τ), optionally detector-averaged, and |γ(τ)|.
    Correlation,
    /// Coincidence and singles versus arm delay.
    Homscan,
    /// Coincidence and singles versus pump phase at a fixed delay.
    Fringe,
    /// Excision of one comb peak by a delayed wideband amplitude.
    Engineer,
    /// Monte Carlo detection and coincidence histogram.
    Mc,
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Config { path: String, source: ConfigError },
    #[error(transparent)]
    Model(#[from] twophoton_core::Error),
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: io::Error },
    #[error("could not start worker threads: {0}")]
    Threads(String),
}

impl CliError {
    /// 2 for configuration problems, 3 for numerical preconditions, 1 for
    /// anything else.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config { .. } => 2,
            CliError::Model(e) if e.is_numerical() => 3,
            CliError::Model(_) => 2,
            CliError::Io { .. } | CliError::Threads(_) => 1,
        }
    }
}

pub fn load_config(path: &Path) -> Result<RunConfig, CliError> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    RunConfig::parse(&text).map_err(|source| CliError::Config {
        path: path.display().to_string(),
        source,
    })
}

/// Runs `command` on a pool of `threads` workers (the global pool when
/// `None`). Output does not depend on the thread count.
pub fn execute(command: Command, cfg: &RunConfig, threads: Option<usize>) -> Result<Vec<OutputFile>, CliError> {
    let job = || run::execute(command, cfg).map_err(CliError::from);
    match threads {
        None => job(),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| CliError::Threads(e.to_string()))?
            .install(job),
    }
}

pub fn write_outputs(dir: &Path, files: &[OutputFile]) -> Result<Vec<PathBuf>, CliError> {
    std::fs::create_dir_all(dir).map_err(|source| CliError::Io {
        path: dir.to_path_buf(),
        source,
    })?;
    files
        .iter()
        .map(|f| {
            let path = dir.join(f.name);
            write_atomic(&path, f.contents.as_bytes()).map_err(|source| CliError::Io {
                path: path.clone(),
                source,
            })?;
            Ok(path)
        })
        .collect()
}
