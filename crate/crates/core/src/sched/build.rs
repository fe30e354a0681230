use crate::error::{Error, Result};
use crate::milp::{encode_network, Embedding, LinExpr, MilpModel, Sense, VarId};
use crate::net::SparseNet;
use crate::oracle::{Span, FEATURE_COUNT, FEATURE_NAMES};

use super::case::{BessSpec, GeneratorSpec, MicrogridCase, NetworkCase};
use super::names;

/// Interval length in hours.
pub const DT: f64 = 1.0;

pub const ROLE_BALANCE: &str = "power_balance";
pub const ROLE_LINE_LIMIT: &str = "line_limit";

/// Tolerance when checking that implied feature ranges sit inside the
/// network's normalization box.
const RANGE_TOL: f64 = 1e-9;

fn add_generators(m: &mut MilpModel, gens: &[GeneratorSpec], hours: usize) -> Result<Vec<Vec<VarId>>> {
    let mut power = Vec::with_capacity(gens.len());
    for (gi, g) in gens.iter().enumerate() {
        let gi = gi + 1;
        let mut ps = Vec::with_capacity(hours);
        let mut prev: Option<(VarId, VarId)> = None;
        for t in 1..=hours {
            let u = m.binary(names::commit(gi, t))?;
            let v = m.binary(names::startup(gi, t))?;
            let p = m.continuous(names::gen_power(gi, t), 0.0, g.p_max)?;
            m.add_objective_term(p, g.cost * DT);
            m.add_objective_term(u, g.no_load_cost * DT);
            m.add_objective_term(v, g.startup_cost);

            let mut e = LinExpr::var(p);
            e.add(u, -g.p_max);
            m.add_constraint(format!("pmax_{gi}_{t}"), &e, Sense::Le, 0.0)?;
            let mut e = LinExpr::var(p);
            e.add(u, -g.p_min);
            m.add_constraint(format!("pmin_{gi}_{t}"), &e, Sense::Ge, 0.0)?;

            let u0 = if g.initial_on { 1.0 } else { 0.0 };
            // v >= u_t - u_{t-1}
            let mut e = LinExpr::var(v);
            e.add(u, -1.0);
            match prev {
                Some((up, _)) => e.add(up, 1.0),
                None => e.add_constant(u0),
            };
            m.add_constraint(format!("su1_{gi}_{t}"), &e, Sense::Ge, 0.0)?;
            // v_t <= 1 - u_{t-1}
            let mut e = LinExpr::var(v);
            match prev {
                Some((up, _)) => e.add(up, 1.0),
                None => e.add_constant(u0),
            };
            m.add_constraint(format!("su2_{gi}_{t}"), &e, Sense::Le, 1.0)?;
            // v <= u
            let mut e = LinExpr::var(v);
            e.add(u, -1.0);
            m.add_constraint(format!("su3_{gi}_{t}"), &e, Sense::Le, 0.0)?;

            if let Some((_, pp)) = prev {
                let mut e = LinExpr::var(p);
                e.add(pp, -1.0);
                m.add_constraint(format!("rup_{gi}_{t}"), &e, Sense::Le, DT * g.ramp)?;
                m.add_constraint(format!("rdn_{gi}_{t}"), &e, Sense::Ge, -DT * g.ramp)?;
            }
            prev = Some((u, p));
            ps.push(p);
        }
        power.push(ps);
    }
    Ok(power)
}

/// Net injection variables of one BESS per interval.
pub(crate) struct BessVars {
    pub charge: Vec<VarId>,
    pub discharge: Vec<VarId>,
}

fn add_bess(m: &mut MilpModel, fleet: &[BessSpec], hours: usize) -> Result<Vec<BessVars>> {
    let mut out = Vec::with_capacity(fleet.len());
    for (si, b) in fleet.iter().enumerate() {
        let s = si + 1;
        let mut charge = Vec::with_capacity(hours);
        let mut discharge = Vec::with_capacity(hours);
        let mut prev_e: Option<VarId> = None;
        for t in 1..=hours {
            let uc = m.binary(names::charging(s, t))?;
            let ud = m.binary(names::discharging(s, t))?;
            let pc = m.continuous(names::charge(s, t), 0.0, b.p_max)?;
            let pd = m.continuous(names::discharge(s, t), 0.0, b.p_max)?;
            let e = m.continuous(names::energy(s, t), b.energy_min, b.energy_max)?;

            let mut x = LinExpr::var(uc);
            x.add(ud, 1.0);
            m.add_constraint(format!("excl_{s}_{t}"), &x, Sense::Le, 1.0)?;
            for (p, u, tag) in [(pc, uc, "c"), (pd, ud, "d")] {
                let mut x = LinExpr::var(p);
                x.add(u, -b.p_max);
                m.add_constraint(format!("p{tag}max_{s}_{t}"), &x, Sense::Le, 0.0)?;
                let mut x = LinExpr::var(p);
                x.add(u, -b.p_min);
                m.add_constraint(format!("p{tag}min_{s}_{t}"), &x, Sense::Ge, 0.0)?;
            }
            // E_t = E_{t-1} - dt (P_dis / eta_dis - P_ch eta_ch)
            let mut x = LinExpr::var(e);
            x.add(pc, -DT * b.eta_charge).add(pd, DT / b.eta_discharge);
            match prev_e {
                Some(pe) => x.add(pe, -1.0),
                None => x.add_constant(-b.energy_initial),
            };
            m.add_constraint(format!("ebal_{s}_{t}"), &x, Sense::Eq, 0.0)?;
            prev_e = Some(e);
            charge.push(pc);
            discharge.push(pd);
        }
        if let Some(last) = prev_e {
            m.add_constraint(format!("eterm_{s}"), &LinExpr::var(last), Sense::Eq, b.energy_initial)?;
        }
        out.push(BessVars { charge, discharge });
    }
    Ok(out)
}

/// Bounds of the raw features an interval can produce, before normalization.
pub(crate) fn feature_ranges(spec: &BessSpec, temp: f64) -> [Span; FEATURE_COUNT] {
    let e_max = spec.energy_max;
    let swing = DT * spec.p_max * spec.eta_charge.max(1.0 / spec.eta_discharge) / e_max;
    [
        Span::new(spec.energy_min / e_max, 1.0),
        Span::new(0.0, swing),
        Span::new(temp, temp),
        Span::new(0.0, swing / DT),
        Span::new(spec.soh_now, spec.soh_now),
    ]
}

fn check_coverage(spec: &BessSpec, net: &SparseNet, temperature: &[f64]) -> Result<()> {
    let norm = &net.normalization;
    for &temp in temperature {
        for (i, r) in feature_ranges(spec, temp).iter().enumerate() {
            let span = norm.features[i];
            let tol = RANGE_TOL * (1.0 + span.width());
            if r.lo < span.lo - tol || r.hi > span.hi + tol {
                return Err(Error::Coupling {
                    feature: FEATURE_NAMES[i].to_string(),
                    message: format!(
                        "BESS `{}` implies [{}, {}], network normalization covers [{}, {}]",
                        spec.name, r.lo, r.hi, span.lo, span.hi
                    ),
                });
            }
        }
    }
    Ok(())
}

fn normalized(span: Span, raw: Span) -> (f64, f64) {
    let lo = ((raw.lo - span.lo) / span.width()).clamp(0.0, 1.0);
    let hi = ((raw.hi - span.lo) / span.width()).clamp(0.0, 1.0);
    (lo, hi)
}

/// Degradation variables added for one BESS.
#[derive(Debug, Clone)]
pub struct Coupling {
    /// Total SOH loss over the horizon.
    pub bd: VarId,
    pub embeddings: Vec<Embedding>,
}

/// Embeds `net` once per interval for BESS number `s` (1-based) and prices its output.
///
/// The BESS variables must already exist in `model`.
pub fn couple_degradation(
    model: &mut MilpModel,
    s: usize,
    spec: &BessSpec,
    net: &SparseNet,
    temperature: &[f64],
) -> Result<Coupling> {
    check_coverage(spec, net, temperature)?;
    let lookup = |m: &MilpModel, name: String| {
        m.var_id(&name)
            .ok_or_else(|| Error::Structural(format!("BESS variable `{name}` missing from model")))
    };
    let norm = net.normalization.clone();
    let e_max = spec.energy_max;
    let mut embeddings = Vec::with_capacity(temperature.len());
    let mut outputs = Vec::with_capacity(temperature.len());

    for (ti, &temp) in temperature.iter().enumerate() {
        let t = ti + 1;
        let ranges = feature_ranges(spec, temp);
        let mut inputs = [VarId(0); FEATURE_COUNT];
        for i in 0..FEATURE_COUNT {
            let (lo, hi) = normalized(norm.features[i], ranges[i]);
            inputs[i] = model.continuous(names::nn_input(s, t, i), lo, hi)?;
        }
        let span = |i: usize| norm.features[i];

        // SOC at the start of the interval.
        if t == 1 {
            let z = (spec.energy_initial / e_max - span(0).lo) / span(0).width();
            model.set_bounds(inputs[0], z, z);
        } else {
            let e_prev = lookup(model, names::energy(s, t - 1))?;
            let mut x = LinExpr::var(inputs[0]);
            x.add(e_prev, -1.0 / (e_max * span(0).width()));
            model.add_constraint(format!("{}_def", names::nn_input(s, t, 0)), &x, Sense::Eq, -span(0).lo / span(0).width())?;
        }

        // Depth of discharge and C-rate from the charge/discharge energy.
        let pc = lookup(model, names::charge(s, t))?;
        let pd = lookup(model, names::discharge(s, t))?;
        for (i, per) in [(1, 1.0), (3, 1.0 / DT)] {
            let w = span(i).width();
            let mut x = LinExpr::var(inputs[i]);
            x.add(pc, -per * DT * spec.eta_charge / (e_max * w))
                .add(pd, -per * DT / (spec.eta_discharge * e_max * w));
            model.add_constraint(format!("{}_def", names::nn_input(s, t, i)), &x, Sense::Eq, -span(i).lo / w)?;
        }

        // Temperature and SOH are parameters.
        for (i, raw) in [(2, temp), (4, spec.soh_now)] {
            let z = (raw - span(i).lo) / span(i).width();
            model.set_bounds(inputs[i], z, z);
        }

        let emb = encode_network(model, net, &inputs, &names::nn_prefix(s, t))?;
        outputs.push(emb.output);
        embeddings.push(emb);
    }

    let bd = model.continuous(names::bd(s), f64::NEG_INFINITY, f64::INFINITY)?;
    let mut x = LinExpr::var(bd);
    for &y in &outputs {
        x.add(y, -norm.target.width());
    }
    model.add_constraint(format!("{}_def", names::bd(s)), &x, Sense::Eq, outputs.len() as f64 * norm.target.lo)?;
    model.add_objective_term(bd, spec.degradation_cost_factor());
    Ok(Coupling { bd, embeddings })
}

fn couple_fleet(m: &mut MilpModel, fleet: &[BessSpec], net: Option<&SparseNet>, temperature: &[f64]) -> Result<()> {
    if let Some(net) = net {
        for (si, spec) in fleet.iter().enumerate() {
            couple_degradation(m, si + 1, spec, net, temperature)?;
        }
    }
    Ok(())
}

pub fn build_scuc(case: &NetworkCase, net: Option<&SparseNet>) -> Result<MilpModel> {
    case.validate()?;
    let hours = case.hours();
    let mut m = MilpModel::new(format!("scuc_{}", case.name));
    let gen_p = add_generators(&mut m, &case.generators, hours)?;
    let bess = add_bess(&mut m, &case.bess, hours)?;

    let mut theta = Vec::with_capacity(case.buses.len());
    for &bus in &case.buses {
        let (lo, hi) = if bus == case.reference_bus {
            (0.0, 0.0)
        } else {
            (f64::NEG_INFINITY, f64::INFINITY)
        };
        let series = (1..=hours)
            .map(|t| m.continuous(names::angle(bus, t), lo, hi))
            .collect::<Result<Vec<_>>>()?;
        theta.push(series);
    }
    let bus_pos = |bus: u32| case.buses.iter().position(|&b| b == bus).unwrap();

    let mut flows = Vec::with_capacity(case.lines.len());
    for (ki, l) in case.lines.iter().enumerate() {
        let k = ki + 1;
        let mut series = Vec::with_capacity(hours);
        for t in 1..=hours {
            let f = m.continuous(names::flow(k, t), f64::NEG_INFINITY, f64::INFINITY)?;
            let coeff = case.base_mva * l.susceptance;
            let mut x = LinExpr::var(f);
            x.add(theta[bus_pos(l.from)][t - 1], -coeff)
                .add(theta[bus_pos(l.to)][t - 1], coeff);
            m.add_constraint(format!("flow_{k}_{t}"), &x, Sense::Eq, 0.0)?;
            m.add_tagged(ROLE_LINE_LIMIT, names::line_max(k, t), &LinExpr::var(f), Sense::Le, l.limit)?;
            m.add_tagged(ROLE_LINE_LIMIT, names::line_min(k, t), &LinExpr::var(f), Sense::Ge, -l.limit)?;
            series.push(f);
        }
        flows.push(series);
    }

    for &bus in &case.buses {
        for t in 1..=hours {
            let mut x = LinExpr::new();
            for (g, spec) in case.generators.iter().enumerate() {
                if spec.bus == bus {
                    x.add(gen_p[g][t - 1], 1.0);
                }
            }
            for (s, spec) in case.bess.iter().enumerate() {
                if spec.bus == bus {
                    x.add(bess[s].discharge[t - 1], 1.0).add(bess[s].charge[t - 1], -1.0);
                }
            }
            for (k, l) in case.lines.iter().enumerate() {
                if l.to == bus {
                    x.add(flows[k][t - 1], 1.0);
                }
                if l.from == bus {
                    x.add(flows[k][t - 1], -1.0);
                }
            }
            m.add_tagged(ROLE_BALANCE, names::balance(bus, t), &x, Sense::Eq, case.net_load(bus, t - 1))?;
        }
    }

    couple_fleet(&mut m, &case.bess, net, &case.temperature)?;
    Ok(m)
}

pub fn build_microgrid(case: &MicrogridCase, net: Option<&SparseNet>) -> Result<MilpModel> {
    case.validate()?;
    let hours = case.hours();
    let mut m = MilpModel::new(format!("microgrid_{}", case.name));
    let gen_p = add_generators(&mut m, &case.generators, hours)?;
    let bess = add_bess(&mut m, &case.bess, hours)?;
    let p_max_total: f64 = case.generators.iter().map(|g| g.p_max).sum();

    for t in 1..=hours {
        let ub = m.binary(names::buying(t))?;
        let us = m.binary(names::selling(t))?;
        let pb = m.continuous(names::buy(t), 0.0, case.grid_limit)?;
        let ps = m.continuous(names::sell(t), 0.0, case.grid_limit)?;
        m.add_objective_term(pb, DT * case.buy_price[t - 1]);
        m.add_objective_term(ps, -DT * case.sell_price[t - 1]);

        let mut x = LinExpr::var(ub);
        x.add(us, 1.0);
        m.add_constraint(format!("grid_{t}"), &x, Sense::Le, 1.0)?;
        let mut x = LinExpr::var(pb);
        x.add(ub, -case.grid_limit);
        m.add_constraint(format!("buy_{t}"), &x, Sense::Le, 0.0)?;
        let mut x = LinExpr::var(ps);
        x.add(us, -case.grid_limit);
        m.add_constraint(format!("sell_{t}"), &x, Sense::Le, 0.0)?;

        let mut bal = LinExpr::var(pb);
        bal.add(ps, -1.0);
        for p in &gen_p {
            bal.add(p[t - 1], 1.0);
        }
        for b in &bess {
            bal.add(b.discharge[t - 1], 1.0).add(b.charge[t - 1], -1.0);
        }
        let net_load = case.load[t - 1] - case.renewable_output(t - 1);
        m.add_tagged(ROLE_BALANCE, names::balance(1, t), &bal, Sense::Eq, net_load)?;

        // P_grid - P_buy + P_sell + sum(p_max - P_g) >= R * load
        let mut res = LinExpr::var(ps);
        res.add(pb, -1.0);
        for p in &gen_p {
            res.add(p[t - 1], -1.0);
        }
        let rhs = case.reserve_ratio * case.load[t - 1] - case.grid_limit - p_max_total;
        m.add_constraint(format!("res_{t}"), &res, Sense::Ge, rhs)?;
    }

    couple_fleet(&mut m, &case.bess, net, &case.temperature)?;
    Ok(m)
}
