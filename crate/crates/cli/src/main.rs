mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand, ValueEnum};
use lcr_core::LcrError;

use crate::output::Format;

/// Exact and Monte Carlo analysis of Left, Center, Right.
#[derive(Debug, Parser)]
#[command(name = "lcr", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Exact expected length, deviation and win probabilities.
    Analyze(AnalyzeArgs),
    /// Monte Carlo estimates with standard errors.
    Simulate(SimulateArgs),
    /// Number of game states for a table size.
    CountStates(CountStatesArgs),
    /// Outcome distribution for a number of dice.
    RollDist(RollDistArgs),
    /// Expected chips per seat at the start of each turn.
    Chips(ChipsArgs),
    /// Win probabilities across a range of table sizes.
    Sweep(SweepArgs),
}

#[derive(Debug, Args)]
struct Common {
    /// Output format.
    #[arg(long, value_enum, default_value_t = Format::Table)]
    format: Format,
}

#[derive(Debug, Args)]
struct ExactArgs {
    /// Allow exact analysis above the default player cap.
    #[arg(long)]
    force: bool,
    /// Directory for cached transition systems.
    #[arg(long, value_name = "DIR")]
    cache_dir: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct AnalyzeArgs {
    #[arg(long)]
    players: usize,
    /// Seat 1 passes no chip to the left on the opening roll.
    #[arg(long)]
    modified_start: bool,
    /// Ante per player for the expected-winnings column.
    #[arg(long, default_value_t = 30.0)]
    stake: f64,
    #[command(flatten)]
    exact: ExactArgs,
    #[command(flatten)]
    common: Common,
}

#[derive(Debug, Args)]
struct SimulateArgs {
    #[arg(long)]
    players: usize,
    #[arg(long, default_value_t = 1_000_000)]
    games: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    modified_start: bool,
    /// Also report mean chips per seat for this many turns.
    #[arg(long, value_name = "TURNS")]
    chips_turns: Option<usize>,
    #[command(flatten)]
    common: Common,
}

#[derive(Debug, Args)]
struct CountStatesArgs {
    #[arg(long)]
    players: usize,
    #[command(flatten)]
    common: Common,
}

#[derive(Debug, Args)]
struct RollDistArgs {
    #[arg(long)]
    dice: usize,
    #[command(flatten)]
    common: Common,
}

#[derive(Debug, Args)]
struct ChipsArgs {
    #[arg(long)]
    players: usize,
    #[arg(long, default_value_t = 10)]
    turns: usize,
    #[arg(long)]
    modified_start: bool,
    /// Require exact propagation.
    #[arg(long, conflicts_with = "games")]
    exact: bool,
    /// Estimate by simulating this many games instead of exact propagation.
    #[arg(long)]
    games: Option<u64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    exact_opts: ExactArgs,
    #[command(flatten)]
    common: Common,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SweepMode {
    Exact,
    Simulate,
    Auto,
}

#[derive(Debug, Args)]
struct SweepArgs {
    #[arg(long, default_value_t = 2)]
    players_min: usize,
    #[arg(long, default_value_t = 8)]
    players_max: usize,
    #[arg(long, value_enum, default_value_t = SweepMode::Auto)]
    mode: SweepMode,
    #[arg(long, default_value_t = 1_000_000)]
    games: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    modified_start: bool,
    #[command(flatten)]
    exact: ExactArgs,
    #[command(flatten)]
    common: Common,
}

/// A problem with the arguments rather than with the computation.
#[derive(Debug)]
struct UsageError(String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

pub(crate) fn usage(msg: impl Into<String>) -> anyhow::Error {
    UsageError(msg.into()).into()
}

fn is_usage(err: &anyhow::Error) -> bool {
    err.chain().any(|cause| {
        cause.is::<UsageError>()
            || matches!(
                cause.downcast_ref::<LcrError>(),
                Some(
                    LcrError::TooFewPlayers(_)
                        | LcrError::InvalidDiceCount(_)
                        | LcrError::AboveExactCap { .. }
                        | LcrError::CapacityExceeded(_)
                        | LcrError::InvalidParameter(_)
                )
            )
    })
}

/// Worker cap from `LCR_THREADS`, if set.
fn thread_cap() -> anyhow::Result<Option<usize>> {
    match std::env::var("LCR_THREADS") {
        Err(std::env::VarError::NotPresent) => Ok(None),
        Err(e) => Err(usage(format!("LCR_THREADS: {e}"))),
        Ok(raw) => match raw.trim().parse::<usize>() {
            Ok(k) if k > 0 => Ok(Some(k)),
            _ => Err(usage(format!(
                "LCR_THREADS must be a positive integer, got {raw:?}"
            ))),
        },
    }
}

fn run(cli: Cli) -> anyhow::Result<()> {
    let threads = thread_cap()?;
    if let Some(k) = threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(k)
            .build_global()
            .context("configuring worker threads")?;
    }
    let (format, report) = match cli.command {
        Command::Analyze(a) => (a.common.format, commands::analyze(&a)?),
        Command::Simulate(a) => (a.common.format, commands::simulate(&a, threads)?),
        Command::CountStates(a) => (a.common.format, commands::count_states(&a)?),
        Command::RollDist(a) => (a.common.format, commands::roll_dist(&a)?),
        Command::Chips(a) => (a.common.format, commands::chips(&a, threads)?),
        Command::Sweep(a) => (a.common.format, commands::sweep(&a, threads)?),
    };
    report.emit(format)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = e.exit_code();
            let _ = e.print();
            return ExitCode::from(code as u8);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            if is_usage(&err) {
                ExitCode::from(2)
            } else {
                ExitCode::from(3)
            }
        }
    }
}
