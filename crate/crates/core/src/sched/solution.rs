use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::milp::{MilpModel, VarKind};
use crate::net::SparseNet;
use crate::oracle::{CycleFeatures, FEATURE_COUNT, FEATURE_NAMES};
use crate::solve::SolveResult;

use super::build::DT;
use super::case::{BessSpec, Case, NetworkCase};
use super::names;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GeneratorSchedule {
    pub name: String,
    pub commit: Vec<f64>,
    pub startup: Vec<f64>,
    pub power: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BessSchedule {
    pub name: String,
    pub charging: Vec<f64>,
    pub discharging: Vec<f64>,
    pub charge: Vec<f64>,
    pub discharge: Vec<f64>,
    /// Stored energy at the end of each interval.
    pub energy: Vec<f64>,
    /// SOC at the end of each interval.
    pub soc: Vec<f64>,
    /// SOC before the first interval.
    pub soc_initial: f64,
    pub dod: Vec<f64>,
    pub c_rate: Vec<f64>,
    /// Model value of the horizon SOH loss, when degradation was embedded.
    pub bd: Option<f64>,
}

impl BessSchedule {
    pub fn soc_start(&self, t: usize) -> f64 {
        if t == 0 {
            self.soc_initial
        } else {
            self.soc[t - 1]
        }
    }

    pub fn discharged_energy(&self) -> f64 {
        self.discharge.iter().sum::<f64>() * DT
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridSchedule {
    pub buying: Vec<f64>,
    pub selling: Vec<f64>,
    pub buy: Vec<f64>,
    pub sell: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NetworkSchedule {
    /// (line name, flow per interval).
    pub flows: Vec<(String, Vec<f64>)>,
    /// (bus, angle per interval).
    pub angles: Vec<(u32, Vec<f64>)>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CostBreakdown {
    /// Generation plus grid exchange.
    pub operation: f64,
    /// Priced model degradation.
    pub degradation: f64,
    pub pseudo_total: f64,
    pub objective: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScheduleSolution {
    pub case: String,
    pub hours: usize,
    pub status: String,
    pub gap: Option<f64>,
    pub wall_time_s: f64,
    pub generators: Vec<GeneratorSchedule>,
    pub bess: Vec<BessSchedule>,
    pub network: Option<NetworkSchedule>,
    pub grid: Option<GridSchedule>,
    pub costs: CostBreakdown,
    /// Every binary of the solved model by name.
    #[serde(skip)]
    pub binaries: BTreeMap<String, f64>,
}

impl ScheduleSolution {
    pub fn total_discharged(&self) -> f64 {
        self.bess.iter().map(BessSchedule::discharged_energy).sum()
    }
}

fn series(model: &MilpModel, values: &[f64], hours: usize, name: impl Fn(usize) -> String) -> Result<Vec<f64>> {
    (1..=hours)
        .map(|t| {
            let n = name(t);
            model
                .var_id(&n)
                .map(|id| values[id.0])
                .ok_or_else(|| Error::Extraction(format!("variable `{n}` missing from solution")))
        })
        .collect()
}

fn operation_cost(case: &Case, gens: &[GeneratorSchedule], grid: Option<&GridSchedule>) -> f64 {
    let mut cost = 0.0;
    for (g, spec) in gens.iter().zip(case.generators()) {
        for t in 0..g.power.len() {
            cost += DT * (spec.cost * g.power[t] + spec.no_load_cost * g.commit[t]) + spec.startup_cost * g.startup[t];
        }
    }
    if let (Some(grid), Case::Microgrid(mg)) = (grid, case) {
        for t in 0..grid.buy.len() {
            cost += DT * (mg.buy_price[t] * grid.buy[t] - mg.sell_price[t] * grid.sell[t]);
        }
    }
    cost
}

/// Maps solved variables back onto the case and recomputes derived series.
pub fn extract_solution(model: &MilpModel, result: &SolveResult, case: &Case) -> Result<ScheduleSolution> {
    result.require_solution()?;
    let v = &result.values;
    let hours = case.hours();

    let generators = case
        .generators()
        .iter()
        .enumerate()
        .map(|(gi, g)| {
            let gi = gi + 1;
            Ok(GeneratorSchedule {
                name: g.name.clone(),
                commit: series(model, v, hours, |t| names::commit(gi, t))?,
                startup: series(model, v, hours, |t| names::startup(gi, t))?,
                power: series(model, v, hours, |t| names::gen_power(gi, t))?,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let bess = case
        .bess()
        .iter()
        .enumerate()
        .map(|(si, b)| {
            let s = si + 1;
            let charge = series(model, v, hours, |t| names::charge(s, t))?;
            let discharge = series(model, v, hours, |t| names::discharge(s, t))?;
            let energy = series(model, v, hours, |t| names::energy(s, t))?;
            let soc: Vec<f64> = energy.iter().map(|e| e / b.energy_max).collect();
            let dod: Vec<f64> = charge
                .iter()
                .zip(&discharge)
                .map(|(&c, &d)| DT * (c * b.eta_charge + d / b.eta_discharge) / b.energy_max)
                .collect();
            let c_rate = dod.iter().map(|d| d / DT).collect();
            Ok(BessSchedule {
                name: b.name.clone(),
                charging: series(model, v, hours, |t| names::charging(s, t))?,
                discharging: series(model, v, hours, |t| names::discharging(s, t))?,
                charge,
                discharge,
                energy,
                soc,
                soc_initial: b.energy_initial / b.energy_max,
                dod,
                c_rate,
                bd: result.value(model, &names::bd(s)),
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let (network, grid) = match case {
        Case::Network(c) => {
            let flows = (0..c.lines.len())
                .map(|k| Ok((c.lines[k].name.clone(), series(model, v, hours, |t| names::flow(k + 1, t))?)))
                .collect::<Result<Vec<_>>>()?;
            let angles = c
                .buses
                .iter()
                .map(|&bus| Ok((bus, series(model, v, hours, |t| names::angle(bus, t))?)))
                .collect::<Result<Vec<_>>>()?;
            (Some(NetworkSchedule { flows, angles }), None)
        }
        Case::Microgrid(_) => (
            None,
            Some(GridSchedule {
                buying: series(model, v, hours, names::buying)?,
                selling: series(model, v, hours, names::selling)?,
                buy: series(model, v, hours, names::buy)?,
                sell: series(model, v, hours, names::sell)?,
            }),
        ),
    };

    let operation = operation_cost(case, &generators, grid.as_ref());
    let degradation: f64 = bess
        .iter()
        .zip(case.bess())
        .filter_map(|(b, spec)| b.bd.map(|bd| bd * spec.degradation_cost_factor()))
        .sum();
    let binaries = model
        .vars()
        .iter()
        .zip(v)
        .filter(|(var, _)| var.kind == VarKind::Binary)
        .map(|(var, &x)| (var.name.clone(), x))
        .collect();

    Ok(ScheduleSolution {
        case: case.name().to_string(),
        hours,
        status: result.status.as_str().to_string(),
        gap: result.gap,
        wall_time_s: result.wall_time.as_secs_f64(),
        generators,
        bess,
        network,
        grid,
        costs: CostBreakdown {
            operation,
            degradation,
            pseudo_total: operation + degradation,
            objective: result.objective.unwrap_or(f64::NAN),
        },
        binaries,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Violation {
    pub check: String,
    pub at: String,
    pub residual: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct ViolationReport {
    pub violations: Vec<Violation>,
}

impl ViolationReport {
    pub fn is_empty(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn has(&self, check: &str) -> bool {
        self.violations.iter().any(|v| v.check == check)
    }

    pub fn worst(&self) -> f64 {
        self.violations.iter().map(|v| v.residual).fold(0.0, f64::max)
    }
}

impl std::fmt::Display for ViolationReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for v in &self.violations {
            writeln!(f, "{} at {}: residual {:.3e}", v.check, v.at, v.residual)?;
        }
        Ok(())
    }
}

/// Absolute residual tolerance (MW, MWh, or unitless for binaries).
pub const FEASIBILITY_TOL: f64 = 1e-6;

struct Checker {
    report: ViolationReport,
    tol: f64,
}

impl Checker {
    fn le(&mut self, check: &str, at: impl Fn() -> String, lhs: f64, rhs: f64) {
        let r = lhs - rhs;
        if r > self.tol * (1.0 + rhs.abs()) || r.is_nan() {
            self.report.violations.push(Violation {
                check: check.to_string(),
                at: at(),
                residual: r,
            });
        }
    }

    fn eq(&mut self, check: &str, at: impl Fn() -> String, lhs: f64, rhs: f64) {
        let r = (lhs - rhs).abs();
        if r > self.tol * (1.0 + rhs.abs()) || r.is_nan() {
            self.report.violations.push(Violation {
                check: check.to_string(),
                at: at(),
                residual: r,
            });
        }
    }

    fn binary(&mut self, check: &str, at: impl Fn() -> String, x: f64) {
        self.eq(check, at, x, x.round().clamp(0.0, 1.0));
    }
}

fn check_generators(c: &mut Checker, specs: &[crate::sched::GeneratorSpec], gens: &[GeneratorSchedule]) {
    for (g, spec) in gens.iter().zip(specs) {
        let n = &g.name;
        for t in 0..g.power.len() {
            let at = || format!("{n}@t{}", t + 1);
            c.binary("binary", at, g.commit[t]);
            c.binary("binary", at, g.startup[t]);
            c.le("generator_max", at, g.power[t], spec.p_max * g.commit[t]);
            c.le("generator_min", at, spec.p_min * g.commit[t], g.power[t]);
            let u_prev = if t == 0 {
                spec.initial_on as u8 as f64
            } else {
                g.commit[t - 1]
            };
            c.le("startup_logic", at, g.commit[t] - u_prev, g.startup[t]);
            c.le("startup_logic", at, g.startup[t], 1.0 - u_prev);
            c.le("startup_logic", at, g.startup[t], g.commit[t]);
            if t > 0 {
                c.le("ramp", at, (g.power[t] - g.power[t - 1]).abs(), DT * spec.ramp);
            }
        }
    }
}

fn check_bess(c: &mut Checker, specs: &[BessSpec], fleet: &[BessSchedule]) {
    for (b, spec) in fleet.iter().zip(specs) {
        let n = &b.name;
        let hours = b.charge.len();
        for t in 0..hours {
            let at = || format!("{n}@t{}", t + 1);
            c.binary("binary", at, b.charging[t]);
            c.binary("binary", at, b.discharging[t]);
            c.le("bess_exclusivity", at, b.charging[t] + b.discharging[t], 1.0);
            c.le("bess_power", at, b.charge[t], spec.p_max * b.charging[t]);
            c.le("bess_power", at, spec.p_min * b.charging[t], b.charge[t]);
            c.le("bess_power", at, b.discharge[t], spec.p_max * b.discharging[t]);
            c.le("bess_power", at, spec.p_min * b.discharging[t], b.discharge[t]);
            c.le("bess_energy", at, spec.energy_min, b.energy[t]);
            c.le("bess_energy", at, b.energy[t], spec.energy_max);
            let prev = if t == 0 { spec.energy_initial } else { b.energy[t - 1] };
            let expect = prev - DT * (b.discharge[t] / spec.eta_discharge - b.charge[t] * spec.eta_charge);
            c.eq("energy_recursion", at, b.energy[t], expect);
            // |dSOC| equals the charge+discharge expression under exclusivity.
            let dsoc = (b.soc[t] - b.soc_start(t)).abs();
            c.eq("dod_equivalence", at, b.dod[t], dsoc);
        }
        if let Some(&last) = b.energy.last() {
            c.eq("terminal_soc", || n.clone(), last, spec.energy_initial);
        }
    }
}

/// Post-hoc feasibility check of a schedule against its case.
pub fn validate_solution(case: &Case, sol: &ScheduleSolution) -> ViolationReport {
    let mut c = Checker {
        report: ViolationReport::default(),
        tol: FEASIBILITY_TOL,
    };
    check_generators(&mut c, case.generators(), &sol.generators);
    check_bess(&mut c, case.bess(), &sol.bess);
    let hours = sol.hours;
    match case {
        Case::Network(net) => {
            let Some(ns) = &sol.network else {
                c.report.violations.push(Violation {
                    check: "structure".into(),
                    at: "network".into(),
                    residual: f64::INFINITY,
                });
                return c.report;
            };
            check_network(&mut c, net, sol, ns, hours);
        }
        Case::Microgrid(mg) => {
            let Some(grid) = &sol.grid else {
                c.report.violations.push(Violation {
                    check: "structure".into(),
                    at: "grid".into(),
                    residual: f64::INFINITY,
                });
                return c.report;
            };
            let p_max_total: f64 = mg.generators.iter().map(|g| g.p_max).sum();
            for t in 0..hours {
                let at = || format!("t{}", t + 1);
                c.binary("binary", at, grid.buying[t]);
                c.binary("binary", at, grid.selling[t]);
                c.le("grid_status", at, grid.buying[t] + grid.selling[t], 1.0);
                c.le("tie_line", at, grid.buy[t], mg.grid_limit * grid.buying[t]);
                c.le("tie_line", at, grid.sell[t], mg.grid_limit * grid.selling[t]);
                c.le("tie_line", at, -grid.buy[t], 0.0);
                c.le("tie_line", at, -grid.sell[t], 0.0);
                let gen: f64 = sol.generators.iter().map(|g| g.power[t]).sum();
                let bess: f64 = sol.bess.iter().map(|b| b.discharge[t] - b.charge[t]).sum();
                let supply = gen + bess + grid.buy[t] - grid.sell[t] + mg.renewable_output(t);
                c.eq("power_balance", at, supply, mg.load[t]);
                let reserve = mg.grid_limit - grid.buy[t] + grid.sell[t] + p_max_total - gen;
                c.le("reserve", at, mg.reserve_ratio * mg.load[t], reserve);
            }
        }
    }
    c.report
}

fn check_network(c: &mut Checker, case: &NetworkCase, sol: &ScheduleSolution, ns: &NetworkSchedule, hours: usize) {
    let angle = |bus: u32, t: usize| {
        ns.angles
            .iter()
            .find(|(b, _)| *b == bus)
            .map(|(_, a)| a[t])
            .unwrap_or(f64::NAN)
    };
    for t in 0..hours {
        c.eq("reference_angle", || format!("t{}", t + 1), angle(case.reference_bus, t), 0.0);
        for (k, l) in case.lines.iter().enumerate() {
            let f = ns.flows[k].1[t];
            let at = || format!("{}@t{}", l.name, t + 1);
            c.le("line_limit", at, f.abs(), l.limit);
            let dc = case.base_mva * l.susceptance * (angle(l.from, t) - angle(l.to, t));
            c.eq("dc_flow", at, f, dc);
        }
        for &bus in &case.buses {
            let mut inj = -case.net_load(bus, t);
            for (g, spec) in sol.generators.iter().zip(&case.generators) {
                if spec.bus == bus {
                    inj += g.power[t];
                }
            }
            for (b, spec) in sol.bess.iter().zip(&case.bess) {
                if spec.bus == bus {
                    inj += b.discharge[t] - b.charge[t];
                }
            }
            for (k, l) in case.lines.iter().enumerate() {
                if l.to == bus {
                    inj += ns.flows[k].1[t];
                }
                if l.from == bus {
                    inj -= ns.flows[k].1[t];
                }
            }
            c.eq("power_balance", || format!("bus{bus}@t{}", t + 1), inj, 0.0);
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BessDegradation {
    /// SOH loss over the horizon.
    pub bd: f64,
    /// Priced loss, $.
    pub cost: f64,
}

/// Clamps values that sit outside the normalization box by solver noise only.
const REPLAY_TOL: f64 = 1e-7;

/// Features of interval `t` (0-based) of a solved BESS.
pub fn interval_features(b: &BessSchedule, spec: &BessSpec, temp: f64, t: usize) -> CycleFeatures {
    CycleFeatures {
        soc_start: b.soc_start(t),
        dod: b.dod[t],
        temp_c: temp,
        c_rate: b.c_rate[t],
        soh: spec.soh_now,
    }
}

/// Replays solved features through `net` and prices the result.
pub fn recompute_degradation(net: &SparseNet, case: &Case, sol: &ScheduleSolution) -> Result<Vec<BessDegradation>> {
    let norm = &net.normalization;
    sol.bess
        .iter()
        .zip(case.bess())
        .map(|(b, spec)| {
            let mut bd = 0.0;
            for (t, &temp) in case.temperature().iter().enumerate() {
                let raw = interval_features(b, spec, temp, t).to_array();
                let mut x = [0.0; FEATURE_COUNT];
                for i in 0..FEATURE_COUNT {
                    let span = norm.features[i];
                    let tol = REPLAY_TOL * (1.0 + span.width());
                    if raw[i] < span.lo - tol || raw[i] > span.hi + tol || !raw[i].is_finite() {
                        return Err(Error::Range {
                            feature: FEATURE_NAMES[i].to_string(),
                            value: raw[i],
                            lo: span.lo,
                            hi: span.hi,
                        });
                    }
                    x[i] = ((raw[i] - span.lo) / span.width()).clamp(0.0, 1.0);
                }
                bd += norm.denormalize_target(net.forward_normalized(&x));
            }
            Ok(BessDegradation {
                bd,
                cost: bd * spec.degradation_cost_factor(),
            })
        })
        .collect()
}

pub const DISPATCH_HEADER: &str = "t,kind,name,commit,startup,power_mw";
pub const BESS_HEADER: &str = "t,name,soc,charge_mw,discharge_mw,dod,c_rate,bd";
pub const COSTS_HEADER: &str = "operation,bd_cost,pseudo_total,og_bd_cost,updated_total,objective";

fn f(x: f64) -> String {
    format!("{x}")
}

pub fn dispatch_csv(sol: &ScheduleSolution) -> String {
    let mut out = format!("{DISPATCH_HEADER}\n");
    for t in 0..sol.hours {
        for g in &sol.generators {
            let _ = writeln!(
                out,
                "{},generator,{},{},{},{}",
                t + 1,
                g.name,
                g.commit[t].round(),
                g.startup[t].round(),
                f(g.power[t])
            );
        }
        if let Some(grid) = &sol.grid {
            let _ = writeln!(out, "{},grid_buy,grid,{},,{}", t + 1, grid.buying[t].round(), f(grid.buy[t]));
            let _ = writeln!(out, "{},grid_sell,grid,{},,{}", t + 1, grid.selling[t].round(), f(grid.sell[t]));
        }
        if let Some(ns) = &sol.network {
            for (name, flow) in &ns.flows {
                let _ = writeln!(out, "{},line,{},,,{}", t + 1, name, f(flow[t]));
            }
        }
    }
    out
}

/// Per-interval BESS table; `bd` holds the per-interval loss predicted by `net` when given.
pub fn bess_csv(case: &Case, sol: &ScheduleSolution, net: Option<&SparseNet>) -> String {
    let mut out = format!("{BESS_HEADER}\n");
    for (b, spec) in sol.bess.iter().zip(case.bess()) {
        for t in 0..sol.hours {
            let bd = match net {
                Some(net) => {
                    let feats = interval_features(b, spec, case.temperature()[t], t);
                    let x = clamp_normalize(net, &feats);
                    f(net.normalization.denormalize_target(net.forward_normalized(&x)))
                }
                None => String::new(),
            };
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{}",
                t + 1,
                b.name,
                f(b.soc[t]),
                f(b.charge[t]),
                f(b.discharge[t]),
                f(b.dod[t]),
                f(b.c_rate[t]),
                bd
            );
        }
    }
    out
}

fn clamp_normalize(net: &SparseNet, feats: &CycleFeatures) -> [f64; FEATURE_COUNT] {
    let raw = feats.to_array();
    std::array::from_fn(|i| {
        let span = net.normalization.features[i];
        ((raw[i] - span.lo) / span.width()).clamp(0.0, 1.0)
    })
}

/// Cost table; `og_bd_cost` is the dense-network replay when one was supplied.
pub fn costs_csv(sol: &ScheduleSolution, og_bd_cost: Option<f64>) -> String {
    let c = &sol.costs;
    let (og, updated) = match og_bd_cost {
        Some(og) => (f(og), f(c.operation + og)),
        None => (String::new(), String::new()),
    };
    format!(
        "{COSTS_HEADER}\n{},{},{},{},{},{}\n",
        f(c.operation),
        f(c.degradation),
        f(c.pseudo_total),
        og,
        updated,
        f(c.objective)
    )
}

/// Summary line used by the CLI and benchmarks.
#[derive(Debug, Clone, Serialize)]
pub struct RunSummary {
    pub case: String,
    pub status: String,
    pub objective: Option<f64>,
    pub bound: Option<f64>,
    pub gap: Option<f64>,
    pub wall_time_s: f64,
    pub binaries: usize,
    pub nn_binaries: usize,
}

impl RunSummary {
    pub fn new(case: &str, model: &MilpModel, result: &SolveResult) -> Self {
        RunSummary {
            case: case.to_string(),
            status: result.status.as_str().to_string(),
            objective: result.objective,
            bound: result.bound,
            gap: result.gap,
            wall_time_s: result.wall_time.as_secs_f64(),
            binaries: model.binary_count(),
            nn_binaries: model.binary_count_with_prefix("nn_"),
        }
    }
}
