//! `fdelab`: run fractional oscillation scenarios from TOML files.
//!
//! Exit status: 0 on success, 2 on a validation error, 3 on a numerical
//! failure (the report is still written and flagged as partial).

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod output;
mod run;
mod scenario;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use crate::run::{run_scenario, Command, RunError, RunOptions};
use crate::scenario::Scenario;

#[derive(Debug, Parser)]
#[command(
    name = "fdelab",
    version,
    about = "Fractional oscillation scenarios: solve, diagnose, converge"
)]
struct Cli {
    #[arg(value_enum)]
    command: Command,
    /// Scenario file; repeat to run several scenarios in parallel.
    #[arg(long = "config", required = true)]
    configs: Vec<PathBuf>,
    /// Output directory (one subdirectory per scenario when several are given).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Mesh size override; repeat to list the sizes for `converge`.
    #[arg(long = "n")]
    n: Vec<usize>,
    /// Only report errors.
    #[arg(long)]
    quiet: bool,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let opts = RunOptions {
        out: cli.out.clone(),
        n: cli.n.clone(),
        batch: cli.configs.len() > 1,
    };

    let results: Vec<Result<String, (i32, String)>> = std::thread::scope(|s| {
        let jobs: Vec<_> = cli
            .configs
            .iter()
            .map(|path| {
                let opts = &opts;
                s.spawn(move || {
                    let sc = Scenario::load(path).map_err(|e| (2, e.to_string()))?;
                    run_scenario(cli.command, &sc, opts).map_err(|e: RunError| {
                        let kind = if e.exit_code() == 3 {
                            "numerical failure"
                        } else {
                            "invalid"
                        };
                        (e.exit_code(), format!("{}: {kind}: {e}", path.display()))
                    })
                })
            })
            .collect();
        jobs.into_iter()
            .map(|j| j.join().unwrap_or_else(|_| Err((3, "scenario job panicked".into()))))
            .collect()
    });

    let mut code = 0;
    for r in results {
        match r {
            Ok(summary) if !cli.quiet => println!("{summary}"),
            Ok(_) => {}
            Err((c, msg)) => {
                eprintln!("error: {msg}");
                code = code.max(c);
            }
        }
    }
    ExitCode::from(code as u8)
}
