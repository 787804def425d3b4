use std::process::ExitCode;

use clap::Parser;
use kitaev_cli::{run, Cli};

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(outcome) => {
            for f in &outcome.files {
                println!("wrote {}", f.display());
            }
            if outcome.failures.is_empty() {
                ExitCode::SUCCESS
            } else {
                eprintln!("{} computation(s) failed:", outcome.failures.len());
                for f in &outcome.failures {
                    eprintln!("  {f}");
                }
                ExitCode::from(3)
            }
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
