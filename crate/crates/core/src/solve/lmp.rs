use crate::error::{Error, Result};
use crate::milp::VarKind;
use crate::net::SparseNet;
use crate::sched::{build_scuc, names, NetworkCase, ScheduleSolution};

use super::{run, SolveStatus, SolverOptions};

/// Duals smaller than this are treated as zero when flagging congestion.
pub const CONGESTION_DUAL_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct LmpReport {
    pub buses: Vec<u32>,
    /// `prices[bus index][t]`, $/MWh.
    pub prices: Vec<Vec<f64>>,
    pub lines: Vec<String>,
    /// `congested[line index][t]`: a flow limit has a nonzero dual.
    pub congested: Vec<Vec<bool>>,
}

impl LmpReport {
    pub fn hours(&self) -> usize {
        self.prices.first().map_or(0, Vec::len)
    }

    pub fn price(&self, bus: u32, t: usize) -> Option<f64> {
        let i = self.buses.iter().position(|&b| b == bus)?;
        self.prices[i].get(t).copied()
    }

    /// Largest minus smallest bus price at interval `t` (0-based).
    pub fn spread(&self, t: usize) -> f64 {
        let (lo, hi) = self
            .prices
            .iter()
            .map(|p| p[t])
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), x| (lo.min(x), hi.max(x)));
        hi - lo
    }

    pub fn is_congested(&self, t: usize) -> bool {
        self.congested.iter().any(|c| c[t])
    }

    pub fn csv(&self) -> String {
        let mut out = String::from("t,bus,lmp,congested\n");
        for t in 0..self.hours() {
            let congested = self.is_congested(t) as u8;
            for (i, bus) in self.buses.iter().enumerate() {
                out.push_str(&format!("{},{},{},{}\n", t + 1, bus, self.prices[i][t], congested));
            }
        }
        out
    }
}

/// Fixes every binary of the re-built model at its solved value, re-solves the
/// LP and reads nodal prices from the balance-row duals.
pub fn compute_lmp(
    case: &NetworkCase,
    sol: &ScheduleSolution,
    net: Option<&SparseNet>,
    opts: &SolverOptions,
) -> Result<LmpReport> {
    let mut model = build_scuc(case, net)?;
    let mut fixed = vec![0.0; model.vars().len()];
    for (i, v) in model.vars().iter().enumerate() {
        if v.kind == VarKind::Binary {
            fixed[i] = *sol.binaries.get(&v.name).ok_or_else(|| {
                Error::Consistency(format!("solution has no value for binary `{}`", v.name))
            })?;
        }
    }
    model.fix_binaries(&fixed);
    let result = run(&model, opts)?;
    if result.status != SolveStatus::Optimal {
        return Err(Error::Consistency(format!(
            "fixed-commitment LP ended `{}`; the schedule does not re-solve",
            result.status
        )));
    }
    let duals = result
        .duals
        .as_ref()
        .ok_or_else(|| Error::Consistency("solver returned no duals for the fixed LP".into()))?;
    let dual = |name: String| -> Result<f64> {
        let id = model
            .con_id(&name)
            .ok_or_else(|| Error::Consistency(format!("row `{name}` missing")))?;
        Ok(duals[id.0])
    };

    let hours = case.hours();
    let prices = case
        .buses
        .iter()
        .map(|&bus| (1..=hours).map(|t| dual(names::balance(bus, t))).collect::<Result<Vec<_>>>())
        .collect::<Result<Vec<_>>>()?;
    let congested = (1..=case.lines.len())
        .map(|k| {
            (1..=hours)
                .map(|t| {
                    let up = dual(names::line_max(k, t))?;
                    let dn = dual(names::line_min(k, t))?;
                    Ok(up.abs() > CONGESTION_DUAL_TOL || dn.abs() > CONGESTION_DUAL_TOL)
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(LmpReport {
        buses: case.buses.clone(),
        prices,
        lines: case.lines.iter().map(|l| l.name.clone()).collect(),
        congested,
    })
}
