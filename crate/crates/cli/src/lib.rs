//! Command-line front end: loads channel files, runs a task and writes a
//! JSON report (or CSV for curves) that can be replayed bit for bit.

pub mod config;
pub mod error;
pub mod report;
pub mod tasks;

use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};

pub use config::{ExperimentConfig, Format, RunArgs, Task};
pub use error::{CliError, ExitKind};
pub use report::{replay, replay_report, Report, ReplayOutcome};
pub use tasks::{run_task, Status, TaskOutput};

#[derive(Debug, Parser)]
#[command(name = "rst", version, about = "Channel simulation and reverse Shannon rate toolkit")]
#[command(args_conflicts_with_subcommands = true)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Option<Command>,
    #[command(flatten)]
    pub run: RunArgs,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Rerun a report from its echoed config and compare every result.
    Replay {
        report: PathBuf,
    },
    /// List the registered tasks.
    Tasks,
}

/// Runs the command line and returns the process exit code.
pub fn main_with(cli: Cli) -> i32 {
    let result = match cli.command {
        Some(Command::Replay { report }) => do_replay(&report),
        Some(Command::Tasks) => {
            for t in Task::value_variants() {
                println!("{:<17} {}", t.name(), t.description());
            }
            Ok(0)
        }
        None => do_run(&cli.run),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.kind.code()
        }
    }
}

fn do_run(args: &RunArgs) -> Result<i32, CliError> {
    let cfg = ExperimentConfig::from_args(args)?;
    let out = run_task(&cfg)?;
    let text = match cfg.format {
        Format::Csv => out.csv.clone().ok_or_else(|| CliError::validation("task produces no CSV"))?,
        Format::Json => Report::new(&cfg, &out).to_json(),
    };
    match &args.out {
        Some(p) => report::write_atomic(p, &text)?,
        None => std::io::stdout().write_all(text.as_bytes()).map_err(|e| CliError::io(e.to_string()))?,
    }
    if let Some(d) = &out.diagnostic {
        eprintln!("{}: {d}", cfg.task.name());
    }
    Ok(out.status.exit_code())
}

fn do_replay(path: &std::path::Path) -> Result<i32, CliError> {
    let r = replay(path)?;
    if r.matches {
        println!("replay ok: {}", path.display());
        Ok(0)
    } else {
        for m in &r.mismatches {
            eprintln!("mismatch: {m}");
        }
        Ok(ExitKind::Certification.code())
    }
}
