use std::num::NonZeroU32;
use std::time::Instant;

use highs::{ColProblem, HighsModelStatus, Sense};

use crate::error::{Error, Result};
use crate::milp::{MilpModel, Sense as RowSense, VarKind};

use super::{relative_gap, SolveResult, SolveStatus, SolverOptions};

/// Tight tolerances: ReLU outputs must match the forward pass to ~1e-7.
const FEASIBILITY_TOL: f64 = 1e-9;

fn build(model: &MilpModel, opts: &SolverOptions, presolve: bool) -> highs::Model {
    let mut pb = ColProblem::new();
    let rows: Vec<_> = model
        .constraints()
        .iter()
        .map(|c| match c.sense {
            RowSense::Le => pb.add_row(f64::NEG_INFINITY..=c.rhs),
            RowSense::Ge => pb.add_row(c.rhs..=f64::INFINITY),
            RowSense::Eq => pb.add_row(c.rhs..=c.rhs),
        })
        .collect();
    let mut columns: Vec<Vec<(highs::Row, f64)>> = vec![Vec::new(); model.vars().len()];
    for (c, &row) in model.constraints().iter().zip(&rows) {
        for &(v, k) in &c.terms {
            columns[v.0].push((row, k));
        }
    }
    let mut cost = vec![0.0; model.vars().len()];
    for (v, c) in model.objective().terms {
        cost[v.0] = c;
    }
    for ((v, col), &c) in model.vars().iter().zip(&columns).zip(&cost) {
        pb.add_column_with_integrality(c, v.lb..=v.ub, col, v.kind == VarKind::Binary);
    }
    // The bindings expose no objective offset, so a constant rides on a column fixed at 1.
    let constant = model.objective().constant;
    if constant != 0.0 {
        pb.add_column(constant, 1.0..=1.0, std::iter::empty::<(highs::Row, f64)>());
    }
    let mut m = pb.optimise(Sense::Minimise);
    m.make_quiet();
    m.set_option("mip_rel_gap", opts.mip_gap);
    m.set_option("mip_abs_gap", 0.0);
    m.set_option("time_limit", opts.time_limit.as_secs_f64());
    m.set_option("random_seed", opts.seed as i32);
    m.set_option("primal_feasibility_tolerance", FEASIBILITY_TOL);
    m.set_option("mip_feasibility_tolerance", FEASIBILITY_TOL);
    if !presolve {
        m.set_option("presolve", "off");
    }
    if let Some(t) = opts.threads.and_then(|t| NonZeroU32::new(t as u32)) {
        m.set_threads(t);
    }
    m
}

pub(super) fn solve(model: &MilpModel, opts: &SolverOptions) -> Result<SolveResult> {
    let start = Instant::now();
    if model.vars().is_empty() {
        let feasible = model.constraints().iter().all(|c| c.violation(&[]) <= 0.0);
        return Ok(SolveResult {
            status: if feasible { SolveStatus::Optimal } else { SolveStatus::Infeasible },
            objective: feasible.then(|| model.objective().constant),
            bound: feasible.then(|| model.objective().constant),
            gap: feasible.then_some(0.0),
            values: Vec::new(),
            duals: (feasible && !model.is_mip()).then(|| vec![0.0; model.constraints().len()]),
            wall_time: start.elapsed(),
        });
    }

    let mut solved = build(model, opts, true)
        .try_solve()
        .map_err(|s| Error::Adapter {
            message: "HiGHS failed to solve".into(),
            output: format!("{s:?}"),
        })?;
    if solved.status() == HighsModelStatus::UnboundedOrInfeasible {
        // Presolve cannot tell the two apart; the simplex can.
        solved = build(model, opts, false)
            .try_solve()
            .map_err(|s| Error::Adapter {
                message: "HiGHS failed to solve without presolve".into(),
                output: format!("{s:?}"),
            })?;
    }

    let mip = model.is_mip();
    let status = solved.status();
    let has_primal = solved
        .int_info_value(c"primal_solution_status")
        .map(|s| s == 2)
        .unwrap_or(false);
    let status = match status {
        HighsModelStatus::Optimal => SolveStatus::Optimal,
        HighsModelStatus::Infeasible => SolveStatus::Infeasible,
        HighsModelStatus::Unbounded | HighsModelStatus::UnboundedOrInfeasible => SolveStatus::Unbounded,
        HighsModelStatus::ReachedTimeLimit => SolveStatus::Timeout,
        HighsModelStatus::ReachedIterationLimit
        | HighsModelStatus::ReachedSolutionLimit
        | HighsModelStatus::ReachedInterrupt
        | HighsModelStatus::ReachedMemoryLimit
        | HighsModelStatus::ObjectiveBound
        | HighsModelStatus::ObjectiveTarget
            if has_primal =>
        {
            SolveStatus::FeasibleGap
        }
        other => {
            return Err(Error::Adapter {
                message: "HiGHS ended without a usable status".into(),
                output: format!("{other:?}"),
            })
        }
    };

    let solution_ok = has_primal && matches!(status, SolveStatus::Optimal | SolveStatus::FeasibleGap | SolveStatus::Timeout);
    let (values, duals, objective) = if solution_ok {
        let sol = solved.get_solution();
        let duals = (!mip && status == SolveStatus::Optimal).then(|| sol.dual_rows().to_vec());
        let values = sol.columns()[..model.vars().len()].to_vec();
        (values, duals, Some(solved.objective_value()))
    } else {
        (Vec::new(), None, None)
    };
    let bound = if !solution_ok {
        None
    } else if mip {
        solved.double_info_value(c"mip_dual_bound").ok()
    } else {
        objective
    };
    let gap = match (objective, bound) {
        (Some(o), Some(b)) => Some(relative_gap(o, b)),
        _ => None,
    };
    Ok(SolveResult {
        status,
        objective,
        bound,
        gap,
        values,
        duals,
        wall_time: start.elapsed(),
    })
}
