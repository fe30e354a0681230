//! Variable and constraint names shared by the builders and the extractor.
//! Device, bus and interval indices are 1-based.

pub fn commit(g: usize, t: usize) -> String {
    format!("u_{g}_{t}")
}

pub fn startup(g: usize, t: usize) -> String {
    format!("v_{g}_{t}")
}

pub fn gen_power(g: usize, t: usize) -> String {
    format!("p_{g}_{t}")
}

pub fn charging(s: usize, t: usize) -> String {
    format!("uc_{s}_{t}")
}

pub fn discharging(s: usize, t: usize) -> String {
    format!("ud_{s}_{t}")
}

pub fn charge(s: usize, t: usize) -> String {
    format!("pc_{s}_{t}")
}

pub fn discharge(s: usize, t: usize) -> String {
    format!("pd_{s}_{t}")
}

pub fn energy(s: usize, t: usize) -> String {
    format!("e_{s}_{t}")
}

pub fn angle(bus: u32, t: usize) -> String {
    format!("th_{bus}_{t}")
}

pub fn flow(k: usize, t: usize) -> String {
    format!("f_{k}_{t}")
}

pub fn balance(bus: u32, t: usize) -> String {
    format!("bal_{bus}_{t}")
}

pub fn line_max(k: usize, t: usize) -> String {
    format!("fmax_{k}_{t}")
}

pub fn line_min(k: usize, t: usize) -> String {
    format!("fmin_{k}_{t}")
}

pub fn buying(t: usize) -> String {
    format!("ub_{t}")
}

pub fn selling(t: usize) -> String {
    format!("us_{t}")
}

pub fn buy(t: usize) -> String {
    format!("pb_{t}")
}

pub fn sell(t: usize) -> String {
    format!("ps_{t}")
}

pub fn nn_prefix(s: usize, t: usize) -> String {
    format!("nn_{s}_{t}")
}

/// Normalized network input `i` (0-based feature index).
pub fn nn_input(s: usize, t: usize, i: usize) -> String {
    format!("nn_{s}_{t}_0_{i}_a")
}

pub fn bd(s: usize) -> String {
    format!("bd_{s}")
}
