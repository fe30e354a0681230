//! Case files: JSON documents describing a bulk network or a microgrid.
//!
//! Powers are MW, energies MWh and prices $/MWh unless the case declares
//! `"units": "kW"`, in which case powers and energies are divided by 1000 on
//! load. Money amounts are never rescaled.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum Units {
    #[default]
    #[serde(rename = "MW")]
    Mw,
    #[serde(rename = "kW")]
    Kw,
}

impl Units {
    fn to_mw(self) -> f64 {
        match self {
            Units::Mw => 1.0,
            Units::Kw => 1e-3,
        }
    }
}

fn default_bus() -> u32 {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeneratorSpec {
    pub name: String,
    #[serde(default = "default_bus")]
    pub bus: u32,
    pub p_min: f64,
    pub p_max: f64,
    /// MW per hour.
    pub ramp: f64,
    /// $/MWh.
    pub cost: f64,
    /// $/h while committed.
    #[serde(default)]
    pub no_load_cost: f64,
    /// $ per start.
    #[serde(default)]
    pub startup_cost: f64,
    /// Commitment in the interval before the horizon.
    #[serde(default)]
    pub initial_on: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LineSpec {
    pub name: String,
    pub from: u32,
    pub to: u32,
    /// Per-unit on the case MVA base.
    pub susceptance: f64,
    /// MW.
    pub limit: f64,
}

fn default_eta() -> f64 {
    0.9
}

fn default_soh_eol() -> f64 {
    0.8
}

fn default_soh_now() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BessSpec {
    pub name: String,
    #[serde(default = "default_bus")]
    pub bus: u32,
    pub energy_max: f64,
    #[serde(default)]
    pub energy_min: f64,
    pub energy_initial: f64,
    pub p_max: f64,
    #[serde(default)]
    pub p_min: f64,
    #[serde(default = "default_eta")]
    pub eta_charge: f64,
    #[serde(default = "default_eta")]
    pub eta_discharge: f64,
    /// $.
    pub capital_cost: f64,
    /// $.
    pub salvage_value: f64,
    #[serde(default = "default_soh_eol")]
    pub soh_eol: f64,
    #[serde(default = "default_soh_now")]
    pub soh_now: f64,
}

impl BessSpec {
    /// $ per unit of SOH lost.
    pub fn degradation_cost_factor(&self) -> f64 {
        (self.capital_cost - self.salvage_value) / (1.0 - self.soh_eol)
    }

    pub fn validate(&self) -> Result<()> {
        let n = &self.name;
        let finite = [
            self.energy_max,
            self.energy_min,
            self.energy_initial,
            self.p_max,
            self.p_min,
            self.capital_cost,
            self.salvage_value,
        ];
        if finite.iter().any(|v| !v.is_finite()) {
            return Err(Error::Case(format!("BESS `{n}` has non-finite data")));
        }
        if !(0.0 <= self.energy_min && self.energy_min <= self.energy_initial && self.energy_initial <= self.energy_max)
            || self.energy_max <= 0.0
        {
            return Err(Error::Case(format!(
                "BESS `{n}` needs 0 <= energy_min <= energy_initial <= energy_max, energy_max > 0"
            )));
        }
        if !(0.0 <= self.p_min && self.p_min <= self.p_max) {
            return Err(Error::Case(format!("BESS `{n}` needs 0 <= p_min <= p_max")));
        }
        for (what, eta) in [("eta_charge", self.eta_charge), ("eta_discharge", self.eta_discharge)] {
            if !(eta > 0.0 && eta <= 1.0) {
                return Err(Error::Case(format!("BESS `{n}` {what} = {eta} outside (0, 1]")));
            }
        }
        if !(self.salvage_value < self.capital_cost) {
            return Err(Error::Case(format!("BESS `{n}` salvage must be below capital cost")));
        }
        if !(self.soh_eol > 0.0 && self.soh_eol < 1.0) {
            return Err(Error::Case(format!("BESS `{n}` soh_eol outside (0, 1)")));
        }
        if !(self.soh_now > self.soh_eol && self.soh_now <= 1.0) {
            return Err(Error::Case(format!("BESS `{n}` soh_now outside (soh_eol, 1]")));
        }
        Ok(())
    }

    fn scale(&mut self, k: f64) {
        self.energy_max *= k;
        self.energy_min *= k;
        self.energy_initial *= k;
        self.p_max *= k;
        self.p_min *= k;
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RenewableKind {
    Wind,
    Solar,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RenewableSpec {
    pub name: String,
    #[serde(default = "default_bus")]
    pub bus: u32,
    pub kind: RenewableKind,
    pub output: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LoadSpec {
    #[serde(default = "default_bus")]
    pub bus: u32,
    pub demand: Vec<f64>,
}

fn default_base_mva() -> f64 {
    100.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkCase {
    pub name: String,
    #[serde(default)]
    pub units: Units,
    #[serde(default = "default_base_mva")]
    pub base_mva: f64,
    pub buses: Vec<u32>,
    pub reference_bus: u32,
    pub generators: Vec<GeneratorSpec>,
    pub lines: Vec<LineSpec>,
    #[serde(default)]
    pub bess: Vec<BessSpec>,
    #[serde(default)]
    pub renewables: Vec<RenewableSpec>,
    pub loads: Vec<LoadSpec>,
    /// Ambient temperature per interval, °C.
    pub temperature: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MicrogridCase {
    pub name: String,
    #[serde(default)]
    pub units: Units,
    pub generators: Vec<GeneratorSpec>,
    #[serde(default)]
    pub bess: Vec<BessSpec>,
    #[serde(default)]
    pub renewables: Vec<RenewableSpec>,
    pub load: Vec<f64>,
    pub temperature: Vec<f64>,
    pub buy_price: Vec<f64>,
    pub sell_price: Vec<f64>,
    pub grid_limit: f64,
    #[serde(default)]
    pub reserve_ratio: f64,
}

fn check_series(name: &str, series: &[f64], hours: usize, nonneg: bool) -> Result<()> {
    if series.len() != hours {
        return Err(Error::Case(format!("`{name}` has {} entries, expected {hours}", series.len())));
    }
    if series.iter().any(|v| !v.is_finite() || (nonneg && *v < 0.0)) {
        return Err(Error::Case(format!("`{name}` must be finite{}", if nonneg { " and >= 0" } else { "" })));
    }
    Ok(())
}

fn check_generator(g: &GeneratorSpec) -> Result<()> {
    if !(0.0 <= g.p_min && g.p_min <= g.p_max && g.p_max.is_finite()) {
        return Err(Error::Case(format!("generator `{}` needs 0 <= p_min <= p_max", g.name)));
    }
    if !(g.ramp > 0.0) {
        return Err(Error::Case(format!("generator `{}` needs ramp > 0", g.name)));
    }
    if [g.cost, g.no_load_cost, g.startup_cost].iter().any(|c| !(c.is_finite() && *c >= 0.0)) {
        return Err(Error::Case(format!("generator `{}` has negative or non-finite costs", g.name)));
    }
    Ok(())
}

fn unique_names<'a>(kind: &str, names: impl Iterator<Item = &'a str>) -> Result<()> {
    let mut seen = BTreeSet::new();
    for n in names {
        if !seen.insert(n) {
            return Err(Error::Case(format!("duplicate {kind} name `{n}`")));
        }
    }
    Ok(())
}

impl NetworkCase {
    pub fn hours(&self) -> usize {
        self.temperature.len()
    }

    /// Net demand minus renewable injection at `bus` in interval `t` (0-based).
    pub fn net_load(&self, bus: u32, t: usize) -> f64 {
        let load: f64 = self.loads.iter().filter(|l| l.bus == bus).map(|l| l.demand[t]).sum();
        let ren: f64 = self.renewables.iter().filter(|r| r.bus == bus).map(|r| r.output[t]).sum();
        load - ren
    }

    pub fn total_load(&self, t: usize) -> f64 {
        self.loads.iter().map(|l| l.demand[t]).sum()
    }

    pub fn without_bess(&self) -> NetworkCase {
        NetworkCase {
            bess: Vec::new(),
            ..self.clone()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let hours = self.hours();
        if hours == 0 {
            return Err(Error::Case("empty horizon".into()));
        }
        let buses: BTreeSet<u32> = self.buses.iter().copied().collect();
        if buses.len() != self.buses.len() {
            return Err(Error::Case("duplicate bus id".into()));
        }
        if !buses.contains(&self.reference_bus) {
            return Err(Error::Case(format!("reference bus {} is not a bus", self.reference_bus)));
        }
        if !(self.base_mva > 0.0) {
            return Err(Error::Case("base_mva must be positive".into()));
        }
        let on_bus = |what: &str, name: &str, bus: u32| -> Result<()> {
            if buses.contains(&bus) {
                Ok(())
            } else {
                Err(Error::Case(format!("{what} `{name}` references missing bus {bus}")))
            }
        };
        unique_names("generator", self.generators.iter().map(|g| g.name.as_str()))?;
        unique_names("line", self.lines.iter().map(|l| l.name.as_str()))?;
        unique_names("BESS", self.bess.iter().map(|b| b.name.as_str()))?;
        unique_names("renewable", self.renewables.iter().map(|r| r.name.as_str()))?;
        for g in &self.generators {
            on_bus("generator", &g.name, g.bus)?;
            check_generator(g)?;
        }
        for l in &self.lines {
            on_bus("line", &l.name, l.from)?;
            on_bus("line", &l.name, l.to)?;
            if l.from == l.to {
                return Err(Error::Case(format!("line `{}` is a self-loop", l.name)));
            }
            if !(l.limit > 0.0) || l.susceptance == 0.0 || !l.susceptance.is_finite() {
                return Err(Error::Case(format!("line `{}` needs limit > 0 and nonzero susceptance", l.name)));
            }
        }
        for b in &self.bess {
            on_bus("BESS", &b.name, b.bus)?;
            b.validate()?;
        }
        for r in &self.renewables {
            on_bus("renewable", &r.name, r.bus)?;
            check_series(&r.name, &r.output, hours, true)?;
        }
        for (i, l) in self.loads.iter().enumerate() {
            on_bus("load", &format!("#{}", i + 1), l.bus)?;
            check_series(&format!("load at bus {}", l.bus), &l.demand, hours, true)?;
        }
        check_series("temperature", &self.temperature, hours, false)?;
        let absorb: f64 = self.bess.iter().map(|b| b.p_max).sum();
        for t in 0..hours {
            let ren: f64 = self.renewables.iter().map(|r| r.output[t]).sum();
            over_generation(t, ren, self.total_load(t) + absorb)?;
        }

        // Connectivity from the reference bus.
        let mut adj: BTreeMap<u32, Vec<u32>> = BTreeMap::new();
        for l in &self.lines {
            adj.entry(l.from).or_default().push(l.to);
            adj.entry(l.to).or_default().push(l.from);
        }
        let mut seen = BTreeSet::from([self.reference_bus]);
        let mut queue = VecDeque::from([self.reference_bus]);
        while let Some(b) = queue.pop_front() {
            for &n in adj.get(&b).into_iter().flatten() {
                if seen.insert(n) {
                    queue.push_back(n);
                }
            }
        }
        if seen.len() != buses.len() {
            let missing: Vec<_> = buses.difference(&seen).collect();
            return Err(Error::Case(format!("network is disconnected; unreachable buses {missing:?}")));
        }
        Ok(())
    }

    fn to_mw(&mut self) {
        let k = self.units.to_mw();
        if k == 1.0 {
            return;
        }
        for g in &mut self.generators {
            g.p_min *= k;
            g.p_max *= k;
            g.ramp *= k;
        }
        for l in &mut self.lines {
            l.limit *= k;
        }
        for b in &mut self.bess {
            b.scale(k);
        }
        for r in &mut self.renewables {
            r.output.iter_mut().for_each(|v| *v *= k);
        }
        for l in &mut self.loads {
            l.demand.iter_mut().for_each(|v| *v *= k);
        }
        self.units = Units::Mw;
    }
}

impl MicrogridCase {
    pub fn hours(&self) -> usize {
        self.load.len()
    }

    pub fn renewable_output(&self, t: usize) -> f64 {
        self.renewables.iter().map(|r| r.output[t]).sum()
    }

    pub fn validate(&self) -> Result<()> {
        let hours = self.hours();
        if hours == 0 {
            return Err(Error::Case("empty horizon".into()));
        }
        unique_names("generator", self.generators.iter().map(|g| g.name.as_str()))?;
        unique_names("BESS", self.bess.iter().map(|b| b.name.as_str()))?;
        unique_names("renewable", self.renewables.iter().map(|r| r.name.as_str()))?;
        for g in &self.generators {
            check_generator(g)?;
        }
        for b in &self.bess {
            b.validate()?;
        }
        for r in &self.renewables {
            check_series(&r.name, &r.output, hours, true)?;
        }
        check_series("load", &self.load, hours, true)?;
        check_series("temperature", &self.temperature, hours, false)?;
        check_series("buy_price", &self.buy_price, hours, false)?;
        check_series("sell_price", &self.sell_price, hours, false)?;
        if !(self.grid_limit >= 0.0 && self.grid_limit.is_finite()) {
            return Err(Error::Case("grid_limit must be finite and >= 0".into()));
        }
        if !(0.0..=10.0).contains(&self.reserve_ratio) {
            return Err(Error::Case("reserve_ratio must be a nonnegative fraction".into()));
        }
        let absorb: f64 = self.grid_limit + self.bess.iter().map(|b| b.p_max).sum::<f64>();
        for t in 0..hours {
            over_generation(t, self.renewable_output(t), self.load[t] + absorb)?;
        }
        Ok(())
    }

    fn to_mw(&mut self) {
        let k = self.units.to_mw();
        if k == 1.0 {
            return;
        }
        for g in &mut self.generators {
            g.p_min *= k;
            g.p_max *= k;
            g.ramp *= k;
        }
        for b in &mut self.bess {
            b.scale(k);
        }
        for r in &mut self.renewables {
            r.output.iter_mut().for_each(|v| *v *= k);
        }
        self.load.iter_mut().for_each(|v| *v *= k);
        self.grid_limit *= k;
        self.units = Units::Mw;
    }
}

/// Renewables are fixed injections with no curtailment, so an hour whose output
/// exceeds everything that can absorb it has no feasible schedule.
fn over_generation(t: usize, renewable: f64, absorb: f64) -> Result<()> {
    if renewable > absorb + 1e-9 {
        return Err(Error::Case(format!(
            "renewable output {renewable} in hour {} exceeds what load, storage and export can absorb ({absorb})",
            t + 1
        )));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub enum Case {
    Network(NetworkCase),
    Microgrid(MicrogridCase),
}

impl Case {
    pub fn name(&self) -> &str {
        match self {
            Case::Network(c) => &c.name,
            Case::Microgrid(c) => &c.name,
        }
    }

    pub fn hours(&self) -> usize {
        match self {
            Case::Network(c) => c.hours(),
            Case::Microgrid(c) => c.hours(),
        }
    }

    pub fn bess(&self) -> &[BessSpec] {
        match self {
            Case::Network(c) => &c.bess,
            Case::Microgrid(c) => &c.bess,
        }
    }

    pub fn temperature(&self) -> &[f64] {
        match self {
            Case::Network(c) => &c.temperature,
            Case::Microgrid(c) => &c.temperature,
        }
    }

    pub fn generators(&self) -> &[GeneratorSpec] {
        match self {
            Case::Network(c) => &c.generators,
            Case::Microgrid(c) => &c.generators,
        }
    }

    /// Parses a case document, telling the two schemas apart by their keys,
    /// and converts it to MW.
    pub fn from_json(text: &str) -> Result<Case> {
        let value: Value = serde_json::from_str(text).map_err(|e| Error::from_json(e, "case"))?;
        let obj = value
            .as_object()
            .ok_or_else(|| Error::Case("case document must be a JSON object".into()))?;
        let case = if obj.contains_key("lines") {
            let mut c: NetworkCase = serde_json::from_value(value).map_err(|e| Error::Case(e.to_string()))?;
            c.to_mw();
            c.validate()?;
            Case::Network(c)
        } else if obj.contains_key("buy_price") {
            let mut c: MicrogridCase = serde_json::from_value(value).map_err(|e| Error::Case(e.to_string()))?;
            c.to_mw();
            c.validate()?;
            Case::Microgrid(c)
        } else {
            return Err(Error::Case(
                "cannot tell case kind: expected `lines` (network) or `buy_price` (microgrid)".into(),
            ));
        };
        Ok(case)
    }

    pub fn load(path: &Path) -> Result<Case> {
        Case::from_json(&std::fs::read_to_string(path)?)
    }
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;

    pub(crate) fn one_bus() -> NetworkCase {
        NetworkCase {
            name: "one".into(),
            units: Units::Mw,
            base_mva: 100.0,
            buses: vec![1],
            reference_bus: 1,
            generators: vec![GeneratorSpec {
                name: "g".into(),
                bus: 1,
                p_min: 0.0,
                p_max: 100.0,
                ramp: 100.0,
                cost: 10.0,
                no_load_cost: 5.0,
                startup_cost: 100.0,
                initial_on: false,
            }],
            lines: vec![],
            bess: vec![],
            renewables: vec![],
            loads: vec![LoadSpec {
                bus: 1,
                demand: vec![50.0; 24],
            }],
            temperature: vec![25.0; 24],
        }
    }

    #[test]
    fn one_bus_is_valid() {
        one_bus().validate().unwrap();
    }

    #[test]
    fn disconnected_network_is_rejected() {
        let mut c = one_bus();
        c.buses.push(2);
        assert!(matches!(c.validate(), Err(Error::Case(m)) if m.contains("disconnected")));
    }

    #[test]
    fn uncurtailable_surplus_is_rejected() {
        let mut c = one_bus();
        let mut output = vec![0.0; 24];
        output[12] = 60.0;
        c.renewables.push(RenewableSpec {
            name: "pv".into(),
            bus: 1,
            kind: RenewableKind::Solar,
            output,
        });
        assert!(matches!(c.validate(), Err(Error::Case(m)) if m.contains("hour 13")));
        c.renewables[0].output[12] = 50.0;
        c.validate().unwrap();
    }

    #[test]
    fn missing_reference_bus_is_rejected() {
        let mut c = one_bus();
        c.reference_bus = 9;
        assert!(c.validate().is_err());
    }

    #[test]
    fn device_on_missing_bus_is_rejected() {
        let mut c = one_bus();
        c.generators[0].bus = 4;
        assert!(c.validate().is_err());
    }

    #[test]
    fn schema_is_detected_and_kw_converted() {
        let net = serde_json::to_string(&one_bus()).unwrap();
        assert!(matches!(Case::from_json(&net).unwrap(), Case::Network(_)));

        let mg = serde_json::json!({
            "name": "mg", "units": "kW",
            "generators": [{"name": "d", "p_min": 0, "p_max": 180, "ramp": 180, "cost": 100}],
            "load": [500.0, 400.0], "temperature": [20, 21],
            "buy_price": [30, 40], "sell_price": [20, 30], "grid_limit": 1000
        });
        let Case::Microgrid(c) = Case::from_json(&mg.to_string()).unwrap() else {
            panic!("expected microgrid");
        };
        assert_eq!(c.load, vec![0.5, 0.4]);
        assert_eq!(c.generators[0].p_max, 0.18);
        assert_eq!(c.grid_limit, 1.0);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let mut v = serde_json::to_value(one_bus()).unwrap();
        v["colour"] = "blue".into();
        assert!(Case::from_json(&v.to_string()).is_err());
    }

    #[test]
    fn degradation_cost_factor_matches_substitution() {
        let b = BessSpec {
            name: "b".into(),
            bus: 1,
            energy_max: 1.0,
            energy_min: 0.0,
            energy_initial: 0.5,
            p_max: 1.0,
            p_min: 0.0,
            eta_charge: 0.9,
            eta_discharge: 0.9,
            capital_cost: 200_000.0,
            salvage_value: 20_000.0,
            soh_eol: 0.8,
            soh_now: 1.0,
        };
        assert!((b.degradation_cost_factor() * 0.001 - 900.0).abs() < 1e-9);
    }
}
