//! Sparsity and MIP-gap sweeps over one case.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::net::SparseNet;
use crate::sched::{build_model, recompute_degradation, schedule, Case, Scheduled};
use crate::solve::{gap_sweep, SolverOptions};

pub const BENCH_HEADER: [&str; 9] = [
    "sparsity",
    "operation",
    "bd_cost",
    "pseudo_total",
    "updated_total",
    "nn_binaries",
    "wall_time_s",
    "status",
    "error",
];
pub const GAP_HEADER: [&str; 6] = ["gap", "status", "objective", "bound", "wall_time_s", "error"];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchRow {
    pub sparsity: f64,
    pub operation: Option<f64>,
    pub bd_cost: Option<f64>,
    pub pseudo_total: Option<f64>,
    /// Operation plus the reference net's replayed degradation cost.
    pub updated_total: Option<f64>,
    pub nn_binaries: usize,
    pub wall_time_s: f64,
    pub status: String,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GapRow {
    pub gap: f64,
    pub status: String,
    pub objective: Option<f64>,
    pub bound: Option<f64>,
    pub wall_time_s: f64,
    pub error: Option<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct BenchReport {
    pub rows: Vec<BenchRow>,
    pub gaps: Vec<GapRow>,
}

pub struct BenchPlan<'a> {
    pub case: &'a Case,
    /// (sparsity, net) pairs; one report row each.
    pub scenarios: Vec<(f64, SparseNet)>,
    /// Dense net used for the updated total; rows leave it empty when absent.
    pub reference: Option<&'a SparseNet>,
    /// Swept on the sparsest scenario's model. Empty skips the sweep.
    pub gaps: Vec<f64>,
    /// Concurrent scenario solves.
    pub workers: usize,
    pub opts: SolverOptions,
}

fn failed_row(sparsity: f64, err: &Error) -> BenchRow {
    BenchRow {
        sparsity,
        operation: None,
        bd_cost: None,
        pseudo_total: None,
        updated_total: None,
        nn_binaries: 0,
        wall_time_s: 0.0,
        status: "error".into(),
        error: Some(err.to_string()),
    }
}

fn scenario_row(plan: &BenchPlan, sparsity: f64, net: &SparseNet) -> Result<BenchRow> {
    let Scheduled { model, result, solution } = schedule(plan.case, Some(net), &plan.opts)?;
    let updated_total = match plan.reference {
        Some(dense) => {
            let og: f64 = recompute_degradation(dense, plan.case, &solution)?.iter().map(|d| d.cost).sum();
            Some(solution.costs.operation + og)
        }
        None => None,
    };
    Ok(BenchRow {
        sparsity,
        operation: Some(solution.costs.operation),
        bd_cost: Some(solution.costs.degradation),
        pseudo_total: Some(solution.costs.pseudo_total),
        updated_total,
        nn_binaries: model.binary_count_with_prefix("nn_"),
        wall_time_s: result.wall_time.as_secs_f64(),
        status: result.status.as_str().to_string(),
        error: None,
    })
}

fn gap_rows(plan: &BenchPlan) -> Vec<GapRow> {
    let Some((_, net)) = plan.scenarios.iter().max_by(|a, b| a.0.total_cmp(&b.0)) else {
        return Vec::new();
    };
    let swept = build_model(plan.case, Some(net)).and_then(|m| gap_sweep(&m, &plan.gaps, &plan.opts));
    match swept {
        Ok(runs) => runs
            .into_iter()
            .map(|r| GapRow {
                gap: r.gap,
                status: r.status.as_str().to_string(),
                objective: r.objective,
                bound: r.bound,
                wall_time_s: r.wall_time.as_secs_f64(),
                error: None,
            })
            .collect(),
        Err(e) => plan
            .gaps
            .iter()
            .map(|&gap| GapRow {
                gap,
                status: "error".into(),
                objective: None,
                bound: None,
                wall_time_s: 0.0,
                error: Some(e.to_string()),
            })
            .collect(),
    }
}

/// Solves every scenario, then the gap sweep. Scenario failures land in their
/// row; rows come back sorted by sparsity regardless of completion order.
pub fn run_bench(plan: &BenchPlan) -> Result<BenchReport> {
    if plan.workers == 0 {
        return Err(Error::Config("workers must be at least 1".into()));
    }
    plan.opts.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(plan.workers)
        .build()
        .map_err(|e| Error::Environment(format!("thread pool: {e}")))?;
    let mut rows: Vec<BenchRow> = pool.install(|| {
        plan.scenarios
            .par_iter()
            .map(|(eps, net)| scenario_row(plan, *eps, net).unwrap_or_else(|e| failed_row(*eps, &e)))
            .collect()
    });
    rows.sort_by(|a, b| a.sparsity.total_cmp(&b.sparsity));
    let gaps = if plan.gaps.is_empty() { Vec::new() } else { gap_rows(plan) };
    Ok(BenchReport { rows, gaps })
}

fn opt(x: Option<f64>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

fn finish(w: csv::Writer<Vec<u8>>) -> Result<String> {
    let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

impl BenchReport {
    pub fn rows_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(BENCH_HEADER)?;
        for r in &self.rows {
            w.write_record([
                r.sparsity.to_string(),
                opt(r.operation),
                opt(r.bd_cost),
                opt(r.pseudo_total),
                opt(r.updated_total),
                r.nn_binaries.to_string(),
                r.wall_time_s.to_string(),
                r.status.clone(),
                r.error.clone().unwrap_or_default(),
            ])?;
        }
        finish(w)
    }

    pub fn gaps_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(GAP_HEADER)?;
        for g in &self.gaps {
            w.write_record([
                g.gap.to_string(),
                g.status.clone(),
                opt(g.objective),
                opt(g.bound),
                g.wall_time_s.to_string(),
                g.error.clone().unwrap_or_default(),
            ])?;
        }
        finish(w)
    }

    /// Largest minus smallest updated total, relative to the smallest.
    pub fn updated_total_spread(&self) -> Option<f64> {
        let totals: Vec<f64> = self.rows.iter().map(|r| r.updated_total).collect::<Option<_>>()?;
        let lo = totals.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = totals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        (!totals.is_empty()).then(|| (hi - lo) / lo.abs())
    }
}
