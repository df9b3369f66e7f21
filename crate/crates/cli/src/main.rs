use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use cntqd_cli::{execute, Command};

/// Nanotube quantum-dot qubit simulator.
#[derive(Parser)]
#[command(name = "cntqd", version)]
struct Args {
    /// Engine to run.
    command: Command,
    /// Scenario file (JSON).
    #[arg(long)]
    config: PathBuf,
    /// Output CSV; metadata and geometry files are written next to it.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Check the scenario and exit without running it.
    #[arg(long)]
    validate_only: bool,
}

fn main() -> ExitCode {
    let args = Args::parse();
    match execute(
        args.command,
        &args.config,
        args.out.as_deref(),
        args.validate_only,
    ) {
        Ok(msg) => {
            println!("{msg}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("{}", e.report());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
