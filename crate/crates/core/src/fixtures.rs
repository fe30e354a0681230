//! Case files bundled with the crate.

use crate::error::{Error, Result};
use crate::sched::Case;

pub const MICROGRID: &str = "microgrid-1bess";
pub const IEEE24: &str = "ieee24-5bess";

const SOURCES: [(&str, &str); 2] = [
    (MICROGRID, include_str!("../fixtures/microgrid-1bess.json")),
    (IEEE24, include_str!("../fixtures/ieee24-5bess.json")),
];

pub fn names() -> impl Iterator<Item = &'static str> {
    SOURCES.iter().map(|(n, _)| *n)
}

pub fn source(name: &str) -> Option<&'static str> {
    SOURCES.iter().find(|(n, _)| *n == name).map(|(_, s)| *s)
}

pub fn load(name: &str) -> Result<Case> {
    let text = source(name).ok_or_else(|| {
        let known: Vec<_> = names().collect();
        Error::Config(format!("unknown fixture `{name}`; known: {}", known.join(", ")))
    })?;
    Case::from_json(text)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_fixture_loads() {
        for name in names() {
            let case = load(name).unwrap();
            assert_eq!(case.name(), name);
            assert_eq!(case.hours(), 24);
        }
        assert!(load("nope").is_err());
    }

    #[test]
    fn ieee24_carries_the_five_unit_fleet() {
        let Case::Network(c) = load(IEEE24).unwrap() else { panic!() };
        assert_eq!(c.buses.len(), 24);
        assert_eq!(c.lines.len(), 38);
        let fleet: Vec<(u32, f64, f64)> = c.bess.iter().map(|b| (b.bus, b.energy_max, b.p_max)).collect();
        assert_eq!(fleet, [(21, 50.0, 20.0), (22, 10.0, 4.0), (7, 10.0, 4.0), (14, 200.0, 100.0), (9, 30.0, 10.0)]);
        let soc: Vec<f64> = c.bess.iter().map(|b| b.energy_initial / b.energy_max).collect();
        assert_eq!(soc, [0.4, 0.4, 0.4, 0.4, 0.5]);
    }

    #[test]
    fn microgrid_is_converted_to_mw() {
        let Case::Microgrid(c) = load(MICROGRID).unwrap() else { panic!() };
        assert_eq!(c.generators[0].p_max, 0.18);
        assert_eq!(c.bess[0].energy_max, 0.3);
        assert_eq!(c.bess[0].capital_cost, 60_000.0);
    }
}
