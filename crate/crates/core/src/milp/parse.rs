//! Readers for the subset of LP and MPS that the writers produce.

use std::collections::HashMap;

use crate::error::{Error, Result};

use super::emit::OBJECTIVE_ROW;
use super::model::{LinExpr, MilpModel, Sense, VarId, VarKind};

fn number(tok: &str, line: usize, field: &str) -> Result<f64> {
    match tok {
        "+inf" | "inf" | "+infinity" | "infinity" => Ok(f64::INFINITY),
        "-inf" | "-infinity" => Ok(f64::NEG_INFINITY),
        _ => tok
            .parse::<f64>()
            .map_err(|_| Error::parse(line, field, format!("`{tok}` is not a number"))),
    }
}

fn sense(tok: &str) -> Option<Sense> {
    match tok {
        "<=" | "<" | "=<" => Some(Sense::Le),
        ">=" | ">" | "=>" => Some(Sense::Ge),
        "=" => Some(Sense::Eq),
        _ => None,
    }
}

#[derive(Default)]
struct Pending {
    vars: Vec<(String, f64, f64, bool)>,
    index: HashMap<String, usize>,
}

impl Pending {
    fn id(&mut self, name: &str) -> usize {
        if let Some(&i) = self.index.get(name) {
            return i;
        }
        let i = self.vars.len();
        self.vars.push((name.to_string(), 0.0, f64::INFINITY, false));
        self.index.insert(name.to_string(), i);
        i
    }

    fn build(
        self,
        name: String,
        rows: Vec<(String, Vec<(usize, f64)>, Sense, f64)>,
        objective: (Vec<(usize, f64)>, f64),
    ) -> Result<MilpModel> {
        let mut m = MilpModel::new(name);
        for (n, lb, ub, int) in self.vars {
            let kind = if int { VarKind::Binary } else { VarKind::Continuous };
            m.add_var(n, kind, lb, ub)?;
        }
        for (n, terms, s, rhs) in rows {
            let mut e = LinExpr::new();
            for (v, c) in terms {
                e.add(VarId(v), c);
            }
            m.add_constraint(n, &e, s, rhs)?;
        }
        let mut obj = LinExpr::constant(objective.1);
        for (v, c) in objective.0 {
            obj.add(VarId(v), c);
        }
        m.set_objective(obj);
        Ok(m)
    }
}

#[derive(Clone, Copy, PartialEq)]
enum LpSection {
    Head,
    Objective,
    Rows,
    Bounds,
    Binaries,
    End,
}

/// Splits `tokens` (a sum of `± coef name` terms) into variable terms and a constant.
fn lp_terms(tokens: &[&str], line: usize, vars: &mut Pending) -> Result<(Vec<(usize, f64)>, f64)> {
    let mut terms = Vec::new();
    let mut constant = 0.0;
    let mut k = 0;
    while k < tokens.len() {
        let mut sign = 1.0;
        if tokens[k] == "+" || tokens[k] == "-" {
            if tokens[k] == "-" {
                sign = -1.0;
            }
            k += 1;
        }
        let tok = tokens
            .get(k)
            .ok_or_else(|| Error::parse(line, "term", "dangling sign"))?;
        match tok.parse::<f64>() {
            Ok(c) => {
                let next = tokens.get(k + 1);
                if let Some(name) = next.filter(|t| *t != &"+" && *t != &"-") {
                    terms.push((vars.id(name), sign * c));
                    k += 2;
                } else {
                    constant += sign * c;
                    k += 1;
                }
            }
            Err(_) => {
                terms.push((vars.id(tok), sign));
                k += 1;
            }
        }
    }
    Ok((terms, constant))
}

pub fn parse_lp(text: &str) -> Result<MilpModel> {
    let mut name = String::new();
    let mut section = LpSection::Head;
    let mut vars = Pending::default();
    let mut rows = Vec::new();
    let mut objective = (Vec::new(), 0.0);
    // Statement being accumulated across lines: (first line, tokens).
    let mut stmt: Option<(usize, Vec<String>)> = None;

    let flush = |stmt: &mut Option<(usize, Vec<String>)>,
                     section: LpSection,
                     vars: &mut Pending,
                     rows: &mut Vec<(String, Vec<(usize, f64)>, Sense, f64)>,
                     objective: &mut (Vec<(usize, f64)>, f64)|
     -> Result<()> {
        let Some((line, toks)) = stmt.take() else {
            return Ok(());
        };
        let toks: Vec<&str> = toks.iter().map(String::as_str).collect();
        let label = toks[0]
            .strip_suffix(':')
            .ok_or_else(|| Error::parse(line, "label", "expected `name:`"))?;
        let body = &toks[1..];
        match section {
            LpSection::Objective => {
                *objective = lp_terms(body, line, vars)?;
            }
            LpSection::Rows => {
                let at = body
                    .iter()
                    .position(|t| sense(t).is_some())
                    .ok_or_else(|| Error::parse(line, label, "missing comparison"))?;
                let (terms, constant) = lp_terms(&body[..at], line, vars)?;
                let rhs_tok = body
                    .get(at + 1)
                    .ok_or_else(|| Error::parse(line, label, "missing right-hand side"))?;
                let rhs = number(rhs_tok, line, label)?;
                rows.push((label.to_string(), terms, sense(body[at]).unwrap(), rhs - constant));
            }
            _ => unreachable!(),
        }
        Ok(())
    };

    // Declare variables in Bounds order first so the model order survives.
    let mut in_bounds = false;
    for raw in text.lines() {
        let t = raw.trim();
        match t.to_ascii_lowercase().as_str() {
            "bounds" => in_bounds = true,
            "binaries" | "binary" | "end" => in_bounds = false,
            _ if in_bounds && !t.is_empty() && !t.starts_with('\\') => {
                let toks: Vec<&str> = t.split_whitespace().collect();
                let v = if toks.len() == 5 { toks[2] } else { toks[0] };
                vars.id(v);
            }
            _ => {}
        }
    }

    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        if let Some(rest) = raw.strip_prefix("\\ Model:") {
            name = rest.trim().to_string();
            continue;
        }
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('\\') {
            continue;
        }
        let lower = trimmed.to_ascii_lowercase();
        let next = match lower.as_str() {
            "minimize" | "minimise" | "min" => Some(LpSection::Objective),
            "subject to" | "st" | "s.t." => Some(LpSection::Rows),
            "bounds" => Some(LpSection::Bounds),
            "binaries" | "binary" => Some(LpSection::Binaries),
            "end" => Some(LpSection::End),
            _ => None,
        };
        if let Some(next) = next {
            flush(&mut stmt, section, &mut vars, &mut rows, &mut objective)?;
            section = next;
            continue;
        }
        let toks: Vec<&str> = trimmed.split_whitespace().collect();
        match section {
            LpSection::Objective | LpSection::Rows => {
                if toks[0].ends_with(':') {
                    flush(&mut stmt, section, &mut vars, &mut rows, &mut objective)?;
                    stmt = Some((line, toks.iter().map(|s| s.to_string()).collect()));
                } else if let Some((_, acc)) = stmt.as_mut() {
                    acc.extend(toks.iter().map(|s| s.to_string()));
                } else {
                    return Err(Error::parse(line, "statement", "continuation without a label"));
                }
            }
            LpSection::Bounds => {
                let (var, lb, ub) = match toks.as_slice() {
                    [v, "free"] => (*v, f64::NEG_INFINITY, f64::INFINITY),
                    [v, "=", x] => {
                        let x = number(x, line, v)?;
                        (*v, x, x)
                    }
                    [lo, "<=", v, "<=", hi] => (*v, number(lo, line, v)?, number(hi, line, v)?),
                    _ => return Err(Error::parse(line, "bound", format!("unrecognized `{trimmed}`"))),
                };
                let id = vars.id(var);
                vars.vars[id].1 = lb;
                vars.vars[id].2 = ub;
            }
            LpSection::Binaries => {
                for v in toks {
                    let id = vars.id(v);
                    vars.vars[id].3 = true;
                }
            }
            LpSection::Head | LpSection::End => {
                return Err(Error::parse(line, "section", format!("unexpected `{trimmed}`")));
            }
        }
    }
    if section != LpSection::End {
        return Err(Error::parse(text.lines().count(), "End", "missing End"));
    }
    vars.build(name, rows, objective)
}

pub fn parse_mps(text: &str) -> Result<MilpModel> {
    let mut name = String::new();
    let mut section = "";
    let mut vars = Pending::default();
    let mut rows: Vec<(String, Vec<(usize, f64)>, Sense, f64)> = Vec::new();
    let mut row_index: HashMap<String, usize> = HashMap::new();
    let mut objective: (Vec<(usize, f64)>, f64) = (Vec::new(), 0.0);
    let mut in_int = false;
    let mut ended = false;

    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        if raw.trim().is_empty() || raw.starts_with('*') {
            continue;
        }
        if !raw.starts_with(' ') {
            let mut it = raw.split_whitespace();
            section = match it.next().unwrap_or("") {
                "NAME" => {
                    name = it.collect::<Vec<_>>().join(" ");
                    "NAME"
                }
                "ROWS" => "ROWS",
                "COLUMNS" => "COLUMNS",
                "RHS" => "RHS",
                "BOUNDS" => "BOUNDS",
                "ENDATA" => {
                    ended = true;
                    "ENDATA"
                }
                other => return Err(Error::parse(line, "section", format!("unsupported section `{other}`"))),
            };
            continue;
        }
        let f: Vec<&str> = raw.split_whitespace().collect();
        match section {
            "ROWS" => {
                let [kind, row] = f.as_slice() else {
                    return Err(Error::parse(line, "ROWS", "expected type and name"));
                };
                let s = match *kind {
                    "N" => {
                        if *row != OBJECTIVE_ROW {
                            return Err(Error::parse(line, "ROWS", format!("objective row must be `{OBJECTIVE_ROW}`")));
                        }
                        continue;
                    }
                    "L" => Sense::Le,
                    "G" => Sense::Ge,
                    "E" => Sense::Eq,
                    _ => return Err(Error::parse(line, "ROWS", format!("bad row type `{kind}`"))),
                };
                row_index.insert(row.to_string(), rows.len());
                rows.push((row.to_string(), Vec::new(), s, 0.0));
            }
            "COLUMNS" => {
                if f.get(1) == Some(&"'MARKER'") {
                    match f.get(2) {
                        Some(&"'INTORG'") => in_int = true,
                        Some(&"'INTEND'") => in_int = false,
                        _ => return Err(Error::parse(line, "MARKER", "unknown marker")),
                    }
                    continue;
                }
                if f.len() != 3 && f.len() != 5 {
                    return Err(Error::parse(line, "COLUMNS", "expected column, row, value"));
                }
                let col = vars.id(f[0]);
                vars.vars[col].3 = in_int;
                for pair in f[1..].chunks(2) {
                    let c = number(pair[1], line, pair[0])?;
                    if c == 0.0 {
                        continue;
                    }
                    if pair[0] == OBJECTIVE_ROW {
                        objective.0.push((col, c));
                    } else {
                        let r = *row_index
                            .get(pair[0])
                            .ok_or_else(|| Error::parse(line, pair[0], "unknown row"))?;
                        rows[r].1.push((col, c));
                    }
                }
            }
            "RHS" => {
                if f.len() != 3 && f.len() != 5 {
                    return Err(Error::parse(line, "RHS", "expected set, row, value"));
                }
                for pair in f[1..].chunks(2) {
                    let v = number(pair[1], line, pair[0])?;
                    if pair[0] == OBJECTIVE_ROW {
                        objective.1 = -v;
                    } else {
                        let r = *row_index
                            .get(pair[0])
                            .ok_or_else(|| Error::parse(line, pair[0], "unknown row"))?;
                        rows[r].3 = v;
                    }
                }
            }
            "BOUNDS" => {
                let (kind, col) = match f.as_slice() {
                    [k, _, c] | [k, _, c, _] => (*k, *c),
                    _ => return Err(Error::parse(line, "BOUNDS", "expected type, set, column[, value]")),
                };
                let id = *vars
                    .index
                    .get(col)
                    .ok_or_else(|| Error::parse(line, col, "bound on undeclared column"))?;
                let value = || -> Result<f64> {
                    let tok = f.get(3).ok_or_else(|| Error::parse(line, col, "missing bound value"))?;
                    number(tok, line, col)
                };
                let v = &mut vars.vars[id];
                match kind {
                    "UP" => v.2 = value()?,
                    "LO" => v.1 = value()?,
                    "FX" => {
                        let x = value()?;
                        v.1 = x;
                        v.2 = x;
                    }
                    "FR" => {
                        v.1 = f64::NEG_INFINITY;
                        v.2 = f64::INFINITY;
                    }
                    "MI" => v.1 = f64::NEG_INFINITY,
                    "PL" => v.2 = f64::INFINITY,
                    "BV" => {
                        v.1 = 0.0;
                        v.2 = 1.0;
                        v.3 = true;
                    }
                    _ => return Err(Error::parse(line, "BOUNDS", format!("unsupported bound type `{kind}`"))),
                }
            }
            _ => return Err(Error::parse(line, "section", "data outside a section")),
        }
    }
    if !ended {
        return Err(Error::parse(text.lines().count(), "ENDATA", "missing ENDATA"));
    }
    vars.build(name, rows, objective)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::milp::emit::{emit_lp, emit_mps};
    use proptest::prelude::*;

    fn fixture() -> MilpModel {
        let mut m = MilpModel::new("fixture");
        let x = m.continuous("x", 0.0, f64::INFINITY).unwrap();
        let y = m.continuous("y", 0.0, f64::INFINITY).unwrap();
        let mut e = LinExpr::var(x);
        e.add(y, 2.0);
        m.add_constraint("c1", &e, Sense::Le, 3.0).unwrap();
        m
    }

    const FIXTURE_LP: &str = "\\ Model: fixture
Minimize
 obj: + 0
Subject To
 c1: + 1 x + 2 y <= 3
Bounds
 0 <= x <= +inf
 0 <= y <= +inf
End
";

    const FIXTURE_MPS: &str = "NAME          fixture
ROWS
 N  obj
 L  c1
COLUMNS
    x         c1        1
    y         c1        2
RHS
    RHS       c1        3
BOUNDS
ENDATA
";

    #[test]
    fn canonical_fixture_text() {
        assert_eq!(emit_lp(&fixture()).unwrap(), FIXTURE_LP);
        assert_eq!(emit_mps(&fixture()).unwrap(), FIXTURE_MPS);
    }

    #[test]
    fn empty_model_is_header_only() {
        let m = MilpModel::new("empty");
        assert_eq!(
            emit_lp(&m).unwrap(),
            "\\ Model: empty\nMinimize\n obj: + 0\nSubject To\nBounds\nEnd\n"
        );
        assert_eq!(
            emit_mps(&m).unwrap(),
            "NAME          empty\nROWS\n N  obj\nCOLUMNS\nRHS\nBOUNDS\nENDATA\n"
        );
    }

    #[test]
    fn fixture_parses_back() {
        assert!(parse_lp(FIXTURE_LP).unwrap().same_program(&fixture()));
        assert!(parse_mps(FIXTURE_MPS).unwrap().same_program(&fixture()));
    }

    #[test]
    fn sanitization_collision_is_an_error() {
        let mut m = MilpModel::new("t");
        m.continuous("p[1]", 0.0, 1.0).unwrap();
        m.continuous("p(1)", 0.0, 1.0).unwrap();
        assert!(matches!(emit_lp(&m), Err(Error::Emission(_))));
        assert!(matches!(emit_mps(&m), Err(Error::Emission(_))));
    }

    #[test]
    fn objective_row_name_is_reserved() {
        let mut m = MilpModel::new("t");
        let x = m.continuous("x", 0.0, 1.0).unwrap();
        m.add_constraint("obj", &LinExpr::var(x), Sense::Le, 1.0).unwrap();
        assert!(matches!(emit_mps(&m), Err(Error::Emission(_))));
    }

    #[test]
    fn names_are_sanitized() {
        let mut m = MilpModel::new("t");
        let x = m.continuous("flow[1-2]@t3", 0.0, 1.0).unwrap();
        m.add_constraint("9lim", &LinExpr::var(x), Sense::Le, 1.0).unwrap();
        let lp = emit_lp(&m).unwrap();
        assert!(lp.contains(" _9lim: + 1 flow_1_2__t3 <= 1"));
        let long = "n".repeat(400);
        assert_eq!(crate::milp::sanitize(&long).len(), 255);
    }

    #[test]
    fn malformed_input_reports_line() {
        let bad = FIXTURE_LP.replace("<= 3", "<= three");
        match parse_lp(&bad) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 5),
            other => panic!("{other:?}"),
        }
        assert!(parse_mps("NAME x\nROWS\n N  obj\n").is_err());
    }

    fn coef() -> impl Strategy<Value = f64> {
        prop_oneof![
            (-20i32..=20).prop_filter("nonzero", |c| *c != 0).prop_map(f64::from),
            proptest::num::f64::NORMAL,
        ]
    }

    fn bounds() -> impl Strategy<Value = (f64, f64)> {
        prop_oneof![
            Just((0.0, f64::INFINITY)),
            Just((f64::NEG_INFINITY, f64::INFINITY)),
            (-1e3..1e3f64).prop_map(|u| (f64::NEG_INFINITY, u)),
            (-1e3..1e3f64, 0.0..1e3f64).prop_map(|(l, w)| (l, l + w)),
            (-1e3..1e3f64).prop_map(|v| (v, v)),
        ]
    }

    prop_compose! {
        fn arb_model()(
            vars in prop::collection::vec((bounds(), any::<bool>()), 0..8),
            rows in prop::collection::vec(
                (prop::collection::vec((0usize..8, coef()), 0..6), 0u8..3, prop_oneof![Just(0.0), coef()]),
                0..6,
            ),
            obj in prop::collection::vec((0usize..8, coef()), 0..6),
            constant in prop_oneof![Just(0.0), coef()],
        ) -> MilpModel {
            let mut m = MilpModel::new("rt");
            for (i, ((lb, ub), bin)) in vars.iter().enumerate() {
                if *bin {
                    m.add_var(format!("d{i}"), VarKind::Binary, 0.0, 1.0).unwrap();
                } else {
                    m.continuous(format!("x{i}"), *lb, *ub).unwrap();
                }
            }
            let n = vars.len();
            if n > 0 {
                for (r, (terms, s, rhs)) in rows.iter().enumerate() {
                    let mut e = LinExpr::new();
                    for &(v, c) in terms {
                        e.add(VarId(v % n), c);
                    }
                    let s = [Sense::Le, Sense::Eq, Sense::Ge][*s as usize];
                    if e.compact().terms.iter().all(|(_, c)| c.is_finite()) {
                        m.add_constraint(format!("r{r}"), &e, s, *rhs).unwrap();
                    }
                }
                let mut o = LinExpr::constant(constant);
                for &(v, c) in &obj {
                    o.add(VarId(v % n), c);
                }
                if o.compact().terms.iter().all(|(_, c)| c.is_finite()) {
                    m.set_objective(o);
                }
            }
            m
        }
    }

    proptest! {
        #[test]
        fn lp_round_trip(m in arb_model()) {
            let text = emit_lp(&m).unwrap();
            let back = parse_lp(&text).unwrap();
            prop_assert!(back.same_program(&m), "{text}");
            prop_assert_eq!(emit_lp(&back).unwrap(), text);
        }

        #[test]
        fn mps_round_trip(m in arb_model()) {
            let text = emit_mps(&m).unwrap();
            let back = parse_mps(&text).unwrap();
            prop_assert!(back.same_program(&m), "{text}");
            prop_assert_eq!(emit_mps(&back).unwrap(), text);
        }
    }
}
