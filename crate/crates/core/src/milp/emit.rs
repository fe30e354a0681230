//! LP and fixed-column MPS writers.
//!
//! Both formats are written canonically: variables and rows in model order,
//! row terms sorted by variable, every bound stated explicitly, numbers in
//! shortest round-trip form.

use std::collections::HashMap;
use std::fmt::Write as _;

use crate::error::{Error, Result};

use super::model::{MilpModel, Sense, VarKind};

pub const MAX_NAME_LEN: usize = 255;
pub const OBJECTIVE_ROW: &str = "obj";

/// Maps a name onto `[A-Za-z0-9_]`, prefixing `_` when it would start with a digit.
pub fn sanitize(name: &str) -> String {
    let mut out: String = name
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '_' { c } else { '_' })
        .collect();
    if out.is_empty() || out.starts_with(|c: char| c.is_ascii_digit()) {
        out.insert(0, '_');
    }
    out.truncate(MAX_NAME_LEN);
    out
}

pub(crate) struct Names {
    pub vars: Vec<String>,
    pub rows: Vec<String>,
}

pub(crate) fn sanitized_names(model: &MilpModel) -> Result<Names> {
    fn unique<'a>(kind: &str, raw: impl Iterator<Item = &'a str>, reserved: &[&str]) -> Result<Vec<String>> {
        let mut seen: HashMap<String, &str> = HashMap::new();
        let mut out = Vec::new();
        for name in raw {
            let s = sanitize(name);
            if reserved.contains(&s.as_str()) {
                return Err(Error::Emission(format!("{kind} `{name}` clashes with reserved name `{s}`")));
            }
            if let Some(prev) = seen.insert(s.clone(), name) {
                return Err(Error::Emission(format!(
                    "{kind} names `{prev}` and `{name}` both sanitize to `{s}`"
                )));
            }
            out.push(s);
        }
        Ok(out)
    }
    Ok(Names {
        vars: unique("variable", model.vars().iter().map(|v| v.name.as_str()), &[])?,
        rows: unique(
            "constraint",
            model.constraints().iter().map(|c| c.name.as_str()),
            &[OBJECTIVE_ROW],
        )?,
    })
}

/// Shortest text that parses back to exactly `v`.
pub(crate) fn num(v: f64) -> String {
    let a = v.abs();
    if v == 0.0 {
        "0".to_string()
    } else if (1e-5..1e15).contains(&a) {
        format!("{v}")
    } else {
        format!("{v:e}")
    }
}

fn bound(v: f64) -> String {
    if v == f64::INFINITY {
        "+inf".to_string()
    } else if v == f64::NEG_INFINITY {
        "-inf".to_string()
    } else {
        num(v)
    }
}

const TERMS_PER_LINE: usize = 6;

fn write_terms(out: &mut String, terms: impl Iterator<Item = (String, f64)>) -> bool {
    let mut any = false;
    for (k, (name, c)) in terms.enumerate() {
        if k > 0 && k % TERMS_PER_LINE == 0 {
            out.push_str("\n   ");
        }
        let sign = if c.is_sign_negative() { '-' } else { '+' };
        let _ = write!(out, " {sign} {} {name}", num(c.abs()));
        any = true;
    }
    any
}

pub fn emit_lp(model: &MilpModel) -> Result<String> {
    let names = sanitized_names(model)?;
    let mut out = String::new();
    let _ = writeln!(out, "\\ Model: {}", sanitize(&model.name));
    out.push_str("Minimize\n");
    let obj = model.objective();
    let _ = write!(out, " {OBJECTIVE_ROW}:");
    let any = write_terms(&mut out, obj.terms.iter().map(|&(v, c)| (names.vars[v.0].clone(), c)));
    if obj.constant != 0.0 || !any {
        let sign = if obj.constant.is_sign_negative() { '-' } else { '+' };
        let _ = write!(out, " {sign} {}", num(obj.constant.abs()));
    }
    out.push('\n');
    out.push_str("Subject To\n");
    for (c, name) in model.constraints().iter().zip(&names.rows) {
        let _ = write!(out, " {name}:");
        if !write_terms(&mut out, c.terms.iter().map(|&(v, k)| (names.vars[v.0].clone(), k))) {
            out.push_str(" 0");
        }
        let _ = writeln!(out, " {} {}", c.sense.symbol(), num(c.rhs));
    }
    out.push_str("Bounds\n");
    for (v, name) in model.vars().iter().zip(&names.vars) {
        if v.lb == v.ub {
            let _ = writeln!(out, " {name} = {}", num(v.lb));
        } else if v.lb == f64::NEG_INFINITY && v.ub == f64::INFINITY {
            let _ = writeln!(out, " {name} free");
        } else {
            let _ = writeln!(out, " {} <= {name} <= {}", bound(v.lb), bound(v.ub));
        }
    }
    let binaries: Vec<&String> = model
        .vars()
        .iter()
        .zip(&names.vars)
        .filter(|(v, _)| v.kind == VarKind::Binary)
        .map(|(_, n)| n)
        .collect();
    if !binaries.is_empty() {
        out.push_str("Binaries\n");
        for n in binaries {
            let _ = writeln!(out, " {n}");
        }
    }
    out.push_str("End\n");
    Ok(out)
}

fn mps_line(out: &mut String, f1: &str, f2: &str, f3: &str, f4: &str) {
    let line = format!(" {f1:<2} {f2:<8}  {f3:<8}  {f4}");
    out.push_str(line.trim_end());
    out.push('\n');
}

pub fn emit_mps(model: &MilpModel) -> Result<String> {
    let names = sanitized_names(model)?;
    let mut out = String::new();
    let _ = writeln!(out, "NAME          {}", sanitize(&model.name));
    out.push_str("ROWS\n");
    mps_line(&mut out, "N", OBJECTIVE_ROW, "", "");
    for (c, name) in model.constraints().iter().zip(&names.rows) {
        let s = match c.sense {
            Sense::Le => "L",
            Sense::Eq => "E",
            Sense::Ge => "G",
        };
        mps_line(&mut out, s, name, "", "");
    }

    let obj = model.objective();
    let nvars = model.vars().len();
    let mut columns: Vec<Vec<(&str, f64)>> = vec![Vec::new(); nvars];
    for &(v, c) in &obj.terms {
        columns[v.0].push((OBJECTIVE_ROW, c));
    }
    for (c, name) in model.constraints().iter().zip(&names.rows) {
        for &(v, k) in &c.terms {
            columns[v.0].push((name.as_str(), k));
        }
    }

    out.push_str("COLUMNS\n");
    let mut in_int = false;
    let mut markers = 0;
    for (j, v) in model.vars().iter().enumerate() {
        let is_int = v.kind == VarKind::Binary;
        if is_int != in_int {
            let tag = if is_int { "'INTORG'" } else { "'INTEND'" };
            mps_line(&mut out, "", &format!("MARKER{markers}"), "'MARKER'", tag);
            markers += is_int as usize;
            in_int = is_int;
        }
        let col = &names.vars[j];
        if columns[j].is_empty() {
            mps_line(&mut out, "", col, OBJECTIVE_ROW, "0");
        }
        for &(row, c) in &columns[j] {
            mps_line(&mut out, "", col, row, &num(c));
        }
    }
    if in_int {
        mps_line(&mut out, "", &format!("MARKER{}", markers.saturating_sub(1)), "'MARKER'", "'INTEND'");
    }

    out.push_str("RHS\n");
    if obj.constant != 0.0 {
        mps_line(&mut out, "", "RHS", OBJECTIVE_ROW, &num(-obj.constant));
    }
    for (c, name) in model.constraints().iter().zip(&names.rows) {
        if c.rhs != 0.0 {
            mps_line(&mut out, "", "RHS", name, &num(c.rhs));
        }
    }

    out.push_str("BOUNDS\n");
    for (v, name) in model.vars().iter().zip(&names.vars) {
        let (lb, ub) = (v.lb, v.ub);
        if lb == ub {
            mps_line(&mut out, "FX", "BND", name, &num(lb));
            continue;
        }
        if lb == f64::NEG_INFINITY && ub == f64::INFINITY {
            mps_line(&mut out, "FR", "BND", name, "");
            continue;
        }
        if lb == f64::NEG_INFINITY {
            mps_line(&mut out, "MI", "BND", name, "");
        } else if lb != 0.0 || v.kind == VarKind::Binary {
            mps_line(&mut out, "LO", "BND", name, &num(lb));
        }
        if ub != f64::INFINITY {
            mps_line(&mut out, "UP", "BND", name, &num(ub));
        }
    }
    out.push_str("ENDATA\n");
    Ok(out)
}
