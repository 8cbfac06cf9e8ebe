use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use twophoton::{execute, load_config, write_outputs, CliError, Command};

/// Mode-locked two-photon states: correlations, interferometry, peak excision
/// and detection Monte Carlo.
#[derive(Debug, Parser)]
#[command(name = "twophoton", version)]
struct Cli {
    #[arg(value_enum)]
    command: Command,
    /// Configuration file (`key = value` lines, or any output file of a previous run).
    #[arg(long)]
    config: PathBuf,
    /// Output directory.
    #[arg(long, default_value = ".")]
    out: PathBuf,
    /// Overrides `run.seed`.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads; results do not depend on this.
    #[arg(long, env = "TWOPHOTON_THREADS")]
    threads: Option<usize>,
}

fn run(cli: &Cli) -> Result<(), CliError> {
    let mut cfg = load_config(&cli.config)?;
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    let files = execute(cli.command, &cfg, cli.threads)?;
    for path in write_outputs(&cli.out, &files)? {
        println!("{}", path.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("twophoton: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
