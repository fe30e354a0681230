//! Solver adapters, gap sweeps and locational marginal prices.
//!
//! Two backends share one contract: the bundled HiGHS library called
//! in-process, and any external executable that reads MPS and writes the
//! plain-text solution format described in [`external`].

pub mod external;
mod highs_backend;
pub mod lmp;

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::time::Duration;

use crate::error::{Error, Result};
use crate::milp::MilpModel;

pub use lmp::{compute_lmp, LmpReport};

/// Environment variable naming the solver: `highs` (default) or an executable path.
pub const SOLVER_ENV: &str = "DEGSCHED_SOLVER";
pub const DEFAULT_MIP_GAP: f64 = 0.001;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SolverKind {
    /// HiGHS linked into the process.
    Highs,
    /// External program following the MPS/solution-file contract.
    External(PathBuf),
}

impl SolverKind {
    pub fn from_env() -> Self {
        match std::env::var(SOLVER_ENV) {
            Ok(s) if !s.is_empty() && s != "highs" => SolverKind::External(PathBuf::from(s)),
            _ => SolverKind::Highs,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SolverOptions {
    pub mip_gap: f64,
    pub time_limit: Duration,
    pub solver: SolverKind,
    /// Where external runs put `model.mps`/`solution.sol`; a private temp dir when unset.
    pub scratch_dir: Option<PathBuf>,
    pub threads: Option<usize>,
    pub seed: u32,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            mip_gap: DEFAULT_MIP_GAP,
            time_limit: Duration::from_secs(600),
            solver: SolverKind::Highs,
            scratch_dir: None,
            threads: None,
            seed: 0,
        }
    }
}

impl SolverOptions {
    pub fn from_env() -> Self {
        SolverOptions {
            solver: SolverKind::from_env(),
            ..Default::default()
        }
    }

    pub fn with_gap(mut self, gap: f64) -> Self {
        self.mip_gap = gap;
        self
    }

    pub fn with_time_limit(mut self, limit: Duration) -> Self {
        self.time_limit = limit;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..1.0).contains(&self.mip_gap) {
            return Err(Error::Config(format!("mip_gap {} outside [0, 1)", self.mip_gap)));
        }
        if self.time_limit.is_zero() {
            return Err(Error::Config("time limit must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveStatus {
    Optimal,
    /// Stopped with an incumbent before proving the requested gap.
    FeasibleGap,
    Infeasible,
    Unbounded,
    Timeout,
}

impl SolveStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            SolveStatus::Optimal => "optimal",
            SolveStatus::FeasibleGap => "feasible-gap",
            SolveStatus::Infeasible => "infeasible",
            SolveStatus::Unbounded => "unbounded",
            SolveStatus::Timeout => "timeout",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "optimal" => SolveStatus::Optimal,
            "feasible-gap" | "feasible" => SolveStatus::FeasibleGap,
            "infeasible" => SolveStatus::Infeasible,
            "unbounded" => SolveStatus::Unbounded,
            "timeout" => SolveStatus::Timeout,
            _ => return None,
        })
    }
}

impl std::fmt::Display for SolveStatus {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone)]
pub struct SolveResult {
    pub status: SolveStatus,
    pub objective: Option<f64>,
    pub bound: Option<f64>,
    pub gap: Option<f64>,
    /// Primal values indexed like the model's variables; empty without a solution.
    pub values: Vec<f64>,
    /// Row duals indexed like the model's constraints; LP solves only.
    pub duals: Option<Vec<f64>>,
    pub wall_time: Duration,
}

impl SolveResult {
    pub fn has_solution(&self) -> bool {
        !self.values.is_empty()
    }

    pub fn value(&self, model: &MilpModel, name: &str) -> Option<f64> {
        model.var_id(name).and_then(|id| self.values.get(id.0).copied())
    }

    pub fn dual(&self, model: &MilpModel, name: &str) -> Option<f64> {
        let id = model.con_id(name)?;
        self.duals.as_ref().map(|d| d[id.0])
    }

    pub fn value_map(&self, model: &MilpModel) -> BTreeMap<String, f64> {
        model
            .vars()
            .iter()
            .zip(&self.values)
            .map(|(v, &x)| (v.name.clone(), x))
            .collect()
    }

    pub fn dual_map(&self, model: &MilpModel) -> Option<BTreeMap<String, f64>> {
        let duals = self.duals.as_ref()?;
        Some(
            model
                .constraints()
                .iter()
                .zip(duals)
                .map(|(c, &y)| (c.name.clone(), y))
                .collect(),
        )
    }

    /// Errors unless the run produced a usable incumbent.
    pub fn require_solution(&self) -> Result<()> {
        if self.has_solution() {
            Ok(())
        } else {
            Err(Error::Extraction(format!("solve ended `{}` without a solution", self.status)))
        }
    }
}

/// Relative gap as HiGHS defines it.
pub(crate) fn relative_gap(objective: f64, bound: f64) -> f64 {
    if objective == bound {
        0.0
    } else {
        (objective - bound).abs() / objective.abs().max(1e-10)
    }
}

pub fn run(model: &MilpModel, opts: &SolverOptions) -> Result<SolveResult> {
    opts.validate()?;
    match &opts.solver {
        SolverKind::Highs => highs_backend::solve(model, opts),
        SolverKind::External(path) => external::solve(model, opts, path),
    }
}

#[derive(Debug, Clone)]
pub struct GapRun {
    pub gap: f64,
    pub status: SolveStatus,
    pub objective: Option<f64>,
    pub bound: Option<f64>,
    pub wall_time: Duration,
}

/// Solves `model` once per gap with otherwise identical options.
pub fn gap_sweep(model: &MilpModel, gaps: &[f64], opts: &SolverOptions) -> Result<Vec<GapRun>> {
    if gaps.len() < 2 {
        return Err(Error::Config("a gap sweep needs at least two gaps".into()));
    }
    gaps.iter()
        .map(|&gap| {
            let r = run(model, &opts.clone().with_gap(gap))?;
            Ok(GapRun {
                gap,
                status: r.status,
                objective: r.objective,
                bound: r.bound,
                wall_time: r.wall_time,
            })
        })
        .collect()
}
