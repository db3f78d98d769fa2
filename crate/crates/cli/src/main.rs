//! `qcoupler`: one binary driving every simulation pipeline.
//!
//! Exit status: 0 on success, 1 on a domain error, 2 on a usage error.

mod args;
mod config;
mod error;
mod manifest;
mod output;
mod run;
mod statespec;

use clap::{CommandFactory, Parser};

fn main() {
    let cli = args::Cli::parse();
    if let Some(n) = cli.workers {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: UsageError: --workers: {e}");
            std::process::exit(2);
        }
    }
    match run::run(cli) {
        Ok(paths) => {
            for p in paths {
                println!("{}", p.display());
            }
        }
        Err(e) => {
            eprintln!("error: {}: {e}", e.kind());
            if e.exit_code() == 2 {
                eprintln!("{}", args::Cli::command().render_usage());
            }
            std::process::exit(e.exit_code());
        }
    }
}
