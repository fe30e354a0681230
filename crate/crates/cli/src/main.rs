mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::{BenchArgs, GenDataArgs, LmpArgs, RunConfig, ScheduleArgs, TrainArgs};

#[derive(Parser)]
#[command(name = "degsched", version, about = "Degradation-aware day-ahead scheduling")]
struct Cli {
    /// TOML file with one table per command.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample the degradation oracle into a CSV dataset.
    GenData(GenDataArgs),
    /// Train a (sparse) degradation net.
    Train(TrainArgs),
    /// Solve a day-ahead schedule and write its tables.
    Schedule(ScheduleArgs),
    /// Nodal prices of a scheduled network case.
    Lmp(LmpArgs),
    /// Sparsity and MIP-gap sweeps.
    Bench(BenchArgs),
}

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    /// Solve finished without a usable schedule, or the schedule failed validation.
    Failed(String),
    Core(degsched::Error),
}

impl From<degsched::Error> for CliError {
    fn from(e: degsched::Error) -> Self {
        CliError::Core(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Core(e.into())
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        use degsched::Error as E;
        match self {
            CliError::Usage(_) => 1,
            CliError::Failed(_) => 3,
            CliError::Core(e) => match e {
                E::Environment(_) | E::Adapter { .. } | E::Io(_) => 2,
                E::Consistency(_) | E::Extraction(_) | E::Divergence { .. } | E::Encoding(_) | E::Emission(_) => 3,
                _ => 1,
            },
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage: {m}"),
            CliError::Failed(m) => write!(f, "{m}"),
            CliError::Core(e) => write!(f, "{e}"),
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    let cfg = match &cli.config {
        Some(p) => RunConfig::load(&config::absolute(p)?)?,
        None => RunConfig::default(),
    };
    match cli.command {
        Command::GenData(mut a) => {
            a.merge(&cfg.gen_data);
            commands::gen_data(a)
        }
        Command::Train(mut a) => {
            a.merge(&cfg.train);
            commands::train(a)
        }
        Command::Schedule(mut a) => {
            a.merge(&cfg.schedule);
            commands::schedule(a)
        }
        Command::Lmp(mut a) => {
            a.merge(&cfg.lmp);
            commands::lmp(a)
        }
        Command::Bench(mut a) => {
            a.merge(&cfg.bench);
            commands::bench(a)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
