//! Day-ahead scheduling models for bulk networks and microgrids, with
//! optional embedded degradation networks.

pub mod build;
pub mod case;
pub mod names;
pub mod solution;

use crate::error::Result;
use crate::milp::MilpModel;
use crate::net::SparseNet;
use crate::solve::{run, SolveResult, SolverOptions};

pub use build::{build_microgrid, build_scuc, couple_degradation, Coupling, DT, ROLE_BALANCE, ROLE_LINE_LIMIT};
pub use case::{BessSpec, Case, GeneratorSpec, LineSpec, LoadSpec, MicrogridCase, NetworkCase, RenewableKind, RenewableSpec, Units};
pub use solution::{
    bess_csv, costs_csv, dispatch_csv, extract_solution, recompute_degradation, validate_solution, BessDegradation,
    BessSchedule, CostBreakdown, RunSummary, ScheduleSolution, Violation, ViolationReport, BESS_HEADER, COSTS_HEADER,
    DISPATCH_HEADER,
};

/// Builds the model matching the case kind.
pub fn build_model(case: &Case, net: Option<&SparseNet>) -> Result<MilpModel> {
    match case {
        Case::Network(c) => build_scuc(c, net),
        Case::Microgrid(c) => build_microgrid(c, net),
    }
}

/// A solved schedule together with the model and raw result it came from.
#[derive(Debug, Clone)]
pub struct Scheduled {
    pub model: MilpModel,
    pub result: SolveResult,
    pub solution: ScheduleSolution,
}

impl Scheduled {
    pub fn summary(&self) -> RunSummary {
        RunSummary::new(&self.solution.case, &self.model, &self.result)
    }
}

/// Builds, solves and extracts; the caller decides what to do with violations.
pub fn schedule(case: &Case, net: Option<&SparseNet>, opts: &SolverOptions) -> Result<Scheduled> {
    let model = build_model(case, net)?;
    let result = run(&model, opts)?;
    let solution = extract_solution(&model, &result, case)?;
    Ok(Scheduled {
        model,
        result,
        solution,
    })
}
