//! Command-line front end for the llp-match solvers: the instance file
//! format, run reports, and the `solve`, `simulate`, `generate` and
//! `verify` subcommands.
//!
//! Exit codes: 0 when a matching was found (or everything agreed), 2 when no
//! matching of the requested kind exists, 1 on any error.

pub mod commands;
pub mod format;
pub mod report;

use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};

pub use commands::Output;
use report::OutputFormat;

#[derive(Debug, Parser)]
#[command(name = "llp-match", version, about = "Stable marriage solvers built on lattice-linear predicates")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Algorithm {
    /// Man-optimal stable marriage; no constraints, no ties.
    Stable,
    /// Man-optimal stable marriage under the instance's constraints.
    Constrained,
    /// Man-optimal super-stable marriage; ties allowed.
    Super,
    /// Strongly stable marriage; ties allowed, no constraints.
    Strong,
    /// Weakly stable marriage: break ties with `--seed`, then solve.
    Weak,
}

impl Algorithm {
    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Stable => "stable",
            Algorithm::Constrained => "constrained",
            Algorithm::Super => "super",
            Algorithm::Strong => "strong",
            Algorithm::Weak => "weak",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum)]
pub enum ScheduleArg {
    #[default]
    Sequential,
    Parallel,
    Stale,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum)]
pub enum SchedulerArg {
    #[default]
    Random,
    Adversarial,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum)]
pub enum AdvanceArg {
    /// Propose at every rank entered, including skipped ones.
    #[default]
    ProposeSkipped,
    /// Jump to the target rank and propose only there.
    SkipSilently,
    /// Jump, and re-propose when already at or past the target.
    Literal,
}

#[derive(Debug, Clone, clap::Args)]
pub struct OutputArgs {
    #[arg(long, value_enum, default_value_t)]
    pub format: OutputFormat,
    /// Include wall-clock time (makes output run-dependent).
    #[arg(long)]
    pub timing: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve one instance.
    Solve {
        path: PathBuf,
        #[arg(long, value_enum)]
        algorithm: Algorithm,
        /// Print every advancement step.
        #[arg(long)]
        trace: bool,
        /// Seed for tie-breaking and randomized schedules.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value_t)]
        schedule: ScheduleArg,
        /// Maximum age of the snapshot under `--schedule stale`.
        #[arg(long, default_value_t = 2)]
        staleness: usize,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Run the message-passing protocol under several seeds and compare
    /// with the sequential solver.
    Simulate {
        path: PathBuf,
        #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
        seeds: u64,
        /// First seed; runs use `seed .. seed + seeds`.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value_t)]
        scheduler: SchedulerArg,
        #[arg(long, value_enum, default_value_t)]
        advance_mode: AdvanceArg,
        /// Print the delivery log of every run.
        #[arg(long)]
        trace: bool,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Print a random instance.
    Generate {
        #[arg(long)]
        n: usize,
        /// Probability that consecutive entries of a list are tied.
        #[arg(long, default_value_t = 0.0)]
        tie_density: f64,
        #[arg(long, default_value_t = 0)]
        constraints: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Check every applicable solver against exhaustive enumeration.
    Verify {
        path: PathBuf,
        /// Seed for tie-breaking and simulations.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Simulator runs per instance.
        #[arg(long, default_value_t = 10)]
        seeds: u64,
        #[arg(long, value_enum, default_value_t)]
        format: OutputFormat,
    },
}

/// Parses `args` (program name first) and runs the command.
pub fn run<I, T>(args: I) -> Output
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    match Cli::try_parse_from(args) {
        Ok(cli) => commands::execute(cli.command),
        Err(e) => {
            let rendered = e.render().to_string();
            if e.use_stderr() {
                Output::failure(rendered)
            } else {
                // --help and --version.
                Output::success(rendered)
            }
        }
    }
}
