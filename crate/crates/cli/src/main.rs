use std::process::ExitCode;

use clap::Parser;
use pareto_acq_cli::{execute, Cli};

fn main() -> ExitCode {
    // Usage errors exit through clap with status 2.
    let cli = Cli::parse();
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    match execute(&cli, &mut out) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code as u8)
        }
    }
}
