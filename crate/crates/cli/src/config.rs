//! Command options from flags and an optional TOML file.
//!
//! Every option can be given on the command line or in a `[command]` table of
//! the `--config` file; flags win. Paths from the file are relative to the
//! file's directory, paths from flags to the working directory.

use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use serde::Deserialize;

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Warm,
    Cold,
}

#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(default, deny_unknown_fields, rename_all = "kebab-case")]
pub struct GenDataArgs {
    /// Number of samples to draw.
    #[arg(long)]
    pub samples: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Held-out fraction.
    #[arg(long)]
    pub test_fraction: Option<f64>,
    /// Dataset CSV; the normalization sidecar is written next to it.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(default, deny_unknown_fields, rename_all = "kebab-case")]
pub struct TrainArgs {
    #[arg(long)]
    pub data: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub mode: Option<Mode>,
    #[arg(long)]
    pub sparsity: Option<f64>,
    /// Sparse epochs (fine-tune epochs in warm mode).
    #[arg(long)]
    pub epochs: Option<usize>,
    /// Dense epochs before a warm fine-tune.
    #[arg(long)]
    pub dense_epochs: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub learning_rate: Option<f64>,
    #[arg(long)]
    pub batch_size: Option<usize>,
    /// Also train every sparsity from 0 to 0.8 and write an accuracy table.
    #[arg(long)]
    pub sweep: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(default, deny_unknown_fields, rename_all = "kebab-case")]
pub struct ScheduleArgs {
    /// Bundled fixture name or case file.
    #[arg(long)]
    pub case: Option<String>,
    /// Degradation net to embed.
    #[arg(long, conflicts_with = "no_degradation")]
    pub net: Option<PathBuf>,
    /// Schedule without a degradation term.
    #[arg(long)]
    pub no_degradation: bool,
    /// Dense net replayed on the schedule for the updated total.
    #[arg(long)]
    pub reference: Option<PathBuf>,
    /// Relative MIP gap.
    #[arg(long)]
    pub gap: Option<f64>,
    /// Seconds.
    #[arg(long)]
    pub time_limit: Option<f64>,
    #[arg(long)]
    pub threads: Option<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(default, deny_unknown_fields, rename_all = "kebab-case")]
pub struct LmpArgs {
    #[arg(long)]
    pub case: Option<String>,
    #[arg(long, conflicts_with_all = ["no_degradation", "no_bess"])]
    pub net: Option<PathBuf>,
    #[arg(long)]
    pub no_degradation: bool,
    /// Drop the storage fleet from the case.
    #[arg(long, conflicts_with = "no_degradation")]
    pub no_bess: bool,
    /// Bus whose prices are printed.
    #[arg(long)]
    pub bus: Option<u32>,
    /// Relative MIP gap.
    #[arg(long)]
    pub gap: Option<f64>,
    /// Seconds.
    #[arg(long)]
    pub time_limit: Option<f64>,
    #[arg(long)]
    pub threads: Option<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(default, deny_unknown_fields, rename_all = "kebab-case")]
pub struct BenchArgs {
    #[arg(long)]
    pub case: Option<String>,
    /// Training data for the per-sparsity nets.
    #[arg(long)]
    pub data: Option<PathBuf>,
    /// Trained dense net; trained from `--data` when absent.
    #[arg(long)]
    pub dense: Option<PathBuf>,
    #[arg(long, value_delimiter = ',')]
    pub sparsities: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',')]
    pub gaps: Option<Vec<f64>>,
    /// Concurrent scenario solves.
    #[arg(long)]
    pub workers: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Relative MIP gap.
    #[arg(long)]
    pub gap: Option<f64>,
    /// Seconds.
    #[arg(long)]
    pub time_limit: Option<f64>,
    #[arg(long)]
    pub threads: Option<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields, rename_all = "kebab-case")]
pub struct RunConfig {
    pub gen_data: GenDataArgs,
    pub train: TrainArgs,
    pub schedule: ScheduleArgs,
    pub lmp: LmpArgs,
    pub bench: BenchArgs,
}

impl RunConfig {
    /// Reads `path` and rebases its relative paths onto the file's directory.
    pub fn load(path: &Path) -> Result<RunConfig, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
        let mut cfg: RunConfig =
            toml::from_str(&text).map_err(|e| CliError::Usage(format!("config {}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new("."));
        let rebase = |p: &mut Option<PathBuf>| {
            if let Some(p) = p {
                if p.is_relative() {
                    *p = base.join(&*p);
                }
            }
        };
        rebase(&mut cfg.gen_data.out);
        rebase(&mut cfg.train.data);
        rebase(&mut cfg.train.out);
        rebase(&mut cfg.schedule.net);
        rebase(&mut cfg.schedule.reference);
        rebase(&mut cfg.schedule.out);
        rebase(&mut cfg.lmp.net);
        rebase(&mut cfg.lmp.out);
        rebase(&mut cfg.bench.data);
        rebase(&mut cfg.bench.dense);
        rebase(&mut cfg.bench.out);
        for case in [&mut cfg.schedule.case, &mut cfg.lmp.case, &mut cfg.bench.case] {
            if let Some(c) = case {
                if degsched::fixtures::source(c).is_none() && Path::new(c.as_str()).is_relative() {
                    *c = base.join(c.as_str()).to_string_lossy().into_owned();
                }
            }
        }
        Ok(cfg)
    }
}

macro_rules! fill {
    ($args:expr, $cfg:expr; $($field:ident),*) => {
        $( if $args.$field.is_none() { $args.$field = $cfg.$field.clone(); } )*
    };
}

impl GenDataArgs {
    pub fn merge(&mut self, cfg: &GenDataArgs) {
        fill!(self, cfg; samples, seed, test_fraction, out);
    }
}

impl TrainArgs {
    pub fn merge(&mut self, cfg: &TrainArgs) {
        fill!(self, cfg; data, mode, sparsity, epochs, dense_epochs, seed, learning_rate, batch_size, out);
        self.sweep |= cfg.sweep;
    }
}

impl ScheduleArgs {
    pub fn merge(&mut self, cfg: &ScheduleArgs) {
        fill!(self, cfg; case, reference, out, gap, time_limit, threads);
        if self.net.is_none() && !self.no_degradation {
            self.net = cfg.net.clone();
            self.no_degradation = cfg.no_degradation;
        }
    }
}

impl LmpArgs {
    pub fn merge(&mut self, cfg: &LmpArgs) {
        fill!(self, cfg; case, bus, out, gap, time_limit, threads);
        if self.net.is_none() && !self.no_degradation && !self.no_bess {
            self.net = cfg.net.clone();
            self.no_degradation = cfg.no_degradation;
            self.no_bess = cfg.no_bess;
        }
    }
}

impl BenchArgs {
    pub fn merge(&mut self, cfg: &BenchArgs) {
        fill!(self, cfg; case, data, dense, sparsities, gaps, workers, seed, out, gap, time_limit, threads);
    }
}

/// Makes `p` absolute against the working directory.
pub fn absolute(p: &Path) -> Result<PathBuf, CliError> {
    std::path::absolute(p).map_err(|e| CliError::Usage(format!("cannot resolve {}: {e}", p.display())))
}

/// Resolves a required input file, failing early when it does not exist.
pub fn input_file(p: Option<&PathBuf>, flag: &str) -> Result<PathBuf, CliError> {
    let p = p.ok_or_else(|| CliError::Usage(format!("--{flag} is required")))?;
    let abs = absolute(p)?;
    if !abs.is_file() {
        return Err(CliError::Usage(format!("--{flag}: no such file {}", abs.display())));
    }
    Ok(abs)
}

pub fn output_path(p: Option<&PathBuf>, flag: &str) -> Result<PathBuf, CliError> {
    absolute(p.ok_or_else(|| CliError::Usage(format!("--{flag} is required")))?)
}
