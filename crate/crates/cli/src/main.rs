use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use vwlab_cli::run::{run_dir_name, OUTPUT_ROOT_ENV};
use vwlab_cli::{export_tables, load_scenario, run_scenario, CliError, RunOptions};
use vwlab_core::lab::{canonical_regimes, SolutionSpace};

/// Numerical laboratory for very weak solutions of wave equations with
/// irregular time-dependent speeds.
#[derive(Parser)]
#[command(name = "vwlab", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse and validate a scenario without solving anything.
    Validate { scenario: PathBuf },
    /// Run every analysis a scenario requests.
    Run {
        scenario: PathBuf,
        /// Recompute even if an identical run exists.
        #[arg(long)]
        force: bool,
        /// Worker threads.
        #[arg(long)]
        jobs: Option<usize>,
        /// Root directory for run directories.
        #[arg(long, env = OUTPUT_ROOT_ENV)]
        output_root: Option<PathBuf>,
    },
    /// List or copy the tables of a finished run.
    Export {
        /// Run directory.
        run: PathBuf,
        /// Analysis name, or "all".
        #[arg(long)]
        which: String,
        /// Copy the tables into this directory.
        #[arg(long)]
        to: Option<PathBuf>,
    },
    /// Print the four well-posedness regimes.
    Regimes {
        #[arg(long)]
        json: bool,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn execute(cmd: Command) -> Result<u8, CliError> {
    match cmd {
        Command::Validate { scenario } => {
            let sc = load_scenario(&scenario)?;
            println!("valid: {} ({})", sc.scenario.name, run_dir_name(&sc));
            println!("analyses: {}", sc.scenario.analyses.requested().join(", "));
            Ok(0)
        }
        Command::Run {
            scenario,
            force,
            jobs,
            output_root,
        } => {
            let sc = load_scenario(&scenario)?;
            let record = run_scenario(
                &sc,
                &RunOptions {
                    force,
                    jobs,
                    output_root,
                },
            )?;
            println!("run directory: {}", record.directory.display());
            if record.reused {
                println!("reused: identical run found (use --force to recompute)");
            }
            for a in &record.analyses {
                match (&a.verdict, &a.diagnostic) {
                    (Some(v), _) => println!("{}: {v}", a.name),
                    (None, Some(d)) => println!("{}: FAILED: {d}", a.name),
                    (None, None) => println!("{}: FAILED", a.name),
                }
            }
            Ok(if record.failed().is_empty() { 0 } else { 2 })
        }
        Command::Export { run, which, to } => {
            for p in export_tables(&run, &which, to.as_deref())? {
                println!("{}", p.display());
            }
            Ok(0)
        }
        Command::Regimes { json } => {
            let regimes = canonical_regimes();
            if json {
                let text = serde_json::to_string_pretty(&regimes).map_err(|e| CliError::Io(e.to_string()))?;
                println!("{text}");
            } else {
                for r in regimes {
                    let space = match r.space {
                        SolutionSpace::SobolevPair => "Sobolev pair H^{s+nu/2} x H^s",
                        SolutionSpace::GevreyPair => "Gevrey/ultradistribution pair",
                    };
                    println!("{} {:?}: s in {}; {space}", r.regime, r.class, r.interval());
                }
            }
            Ok(0)
        }
    }
}
