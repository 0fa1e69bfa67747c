use std::process::ExitCode;

use clap::Parser;
use hardtree::cli::{run, Cli, OUT_ENV};

fn main() -> ExitCode {
    let cli = Cli::parse();
    let env_out = std::env::var_os(OUT_ENV).filter(|v| !v.is_empty()).map(Into::into);
    match run(cli, env_out) {
        Ok(outcome) => {
            for w in &outcome.warnings {
                eprintln!("warning: {w}");
            }
            for p in &outcome.written {
                println!("{}", p.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("hardtree: {}", e.to_string().replace('\n', " "));
            ExitCode::FAILURE
        }
    }
}
