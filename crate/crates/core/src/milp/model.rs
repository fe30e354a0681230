use std::collections::{BTreeMap, HashMap};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct VarId(pub usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ConId(pub usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VarKind {
    Continuous,
    Binary,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Variable {
    pub name: String,
    pub kind: VarKind,
    pub lb: f64,
    pub ub: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Le,
    Eq,
    Ge,
}

impl Sense {
    pub fn symbol(self) -> &'static str {
        match self {
            Sense::Le => "<=",
            Sense::Eq => "=",
            Sense::Ge => ">=",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Constraint {
    pub name: String,
    pub terms: Vec<(VarId, f64)>,
    pub sense: Sense,
    pub rhs: f64,
}

impl Constraint {
    pub fn activity(&self, values: &[f64]) -> f64 {
        self.terms.iter().map(|&(v, c)| c * values[v.0]).sum()
    }

    /// Amount by which `values` violate the constraint (0 when satisfied).
    pub fn violation(&self, values: &[f64]) -> f64 {
        let lhs = self.activity(values);
        match self.sense {
            Sense::Le => (lhs - self.rhs).max(0.0),
            Sense::Ge => (self.rhs - lhs).max(0.0),
            Sense::Eq => (lhs - self.rhs).abs(),
        }
    }
}

/// Affine expression over model variables.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct LinExpr {
    pub terms: Vec<(VarId, f64)>,
    pub constant: f64,
}

impl LinExpr {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn constant(c: f64) -> Self {
        LinExpr {
            terms: Vec::new(),
            constant: c,
        }
    }

    pub fn var(v: VarId) -> Self {
        LinExpr {
            terms: vec![(v, 1.0)],
            constant: 0.0,
        }
    }

    pub fn add(&mut self, v: VarId, c: f64) -> &mut Self {
        if c != 0.0 {
            self.terms.push((v, c));
        }
        self
    }

    pub fn add_constant(&mut self, c: f64) -> &mut Self {
        self.constant += c;
        self
    }

    pub fn add_expr(&mut self, other: &LinExpr, scale: f64) -> &mut Self {
        for &(v, c) in &other.terms {
            self.add(v, c * scale);
        }
        self.constant += other.constant * scale;
        self
    }

    pub fn eval(&self, values: &[f64]) -> f64 {
        self.terms.iter().map(|&(v, c)| c * values[v.0]).sum::<f64>() + self.constant
    }

    /// Merges repeated variables, drops exact zeros and sorts terms by variable.
    pub fn compact(&self) -> LinExpr {
        let mut acc: BTreeMap<VarId, f64> = BTreeMap::new();
        for &(v, c) in &self.terms {
            *acc.entry(v).or_insert(0.0) += c;
        }
        LinExpr {
            terms: acc.into_iter().filter(|&(_, c)| c != 0.0).collect(),
            constant: self.constant,
        }
    }
}

/// Solver-agnostic mixed-integer linear program (always minimized).
#[derive(Debug, Clone, Default)]
pub struct MilpModel {
    pub name: String,
    vars: Vec<Variable>,
    var_index: HashMap<String, VarId>,
    cons: Vec<Constraint>,
    con_index: HashMap<String, ConId>,
    objective: LinExpr,
    roles: BTreeMap<String, Vec<ConId>>,
}

impl MilpModel {
    pub fn new(name: impl Into<String>) -> Self {
        MilpModel {
            name: name.into(),
            ..Default::default()
        }
    }

    pub fn add_var(&mut self, name: impl Into<String>, kind: VarKind, lb: f64, ub: f64) -> Result<VarId> {
        let name = name.into();
        if self.var_index.contains_key(&name) {
            return Err(Error::Structural(format!("duplicate variable `{name}`")));
        }
        let (lb, ub) = match kind {
            VarKind::Binary => (lb.max(0.0), ub.min(1.0)),
            VarKind::Continuous => (lb, ub),
        };
        if lb.is_nan() || ub.is_nan() || lb > ub {
            return Err(Error::Structural(format!("variable `{name}` has empty bounds [{lb}, {ub}]")));
        }
        let id = VarId(self.vars.len());
        self.var_index.insert(name.clone(), id);
        self.vars.push(Variable { name, kind, lb, ub });
        Ok(id)
    }

    pub fn continuous(&mut self, name: impl Into<String>, lb: f64, ub: f64) -> Result<VarId> {
        self.add_var(name, VarKind::Continuous, lb, ub)
    }

    pub fn binary(&mut self, name: impl Into<String>) -> Result<VarId> {
        self.add_var(name, VarKind::Binary, 0.0, 1.0)
    }

    /// Adds `expr (sense) rhs`; the expression constant moves to the right-hand side.
    pub fn add_constraint(
        &mut self,
        name: impl Into<String>,
        expr: &LinExpr,
        sense: Sense,
        rhs: f64,
    ) -> Result<ConId> {
        let name = name.into();
        if self.con_index.contains_key(&name) {
            return Err(Error::Structural(format!("duplicate constraint `{name}`")));
        }
        let expr = expr.compact();
        if let Some(&(v, _)) = expr.terms.iter().find(|(v, _)| v.0 >= self.vars.len()) {
            return Err(Error::Structural(format!("constraint `{name}` references unknown variable {}", v.0)));
        }
        if expr.terms.iter().any(|(_, c)| !c.is_finite()) || !(rhs - expr.constant).is_finite() {
            return Err(Error::Structural(format!("constraint `{name}` has non-finite data")));
        }
        let id = ConId(self.cons.len());
        self.con_index.insert(name.clone(), id);
        self.cons.push(Constraint {
            name,
            terms: expr.terms,
            sense,
            rhs: rhs - expr.constant,
        });
        Ok(id)
    }

    /// Adds a constraint and tags it with `role`.
    pub fn add_tagged(
        &mut self,
        role: &str,
        name: impl Into<String>,
        expr: &LinExpr,
        sense: Sense,
        rhs: f64,
    ) -> Result<ConId> {
        let id = self.add_constraint(name, expr, sense, rhs)?;
        self.roles.entry(role.to_string()).or_default().push(id);
        Ok(id)
    }

    pub fn add_objective(&mut self, expr: &LinExpr) {
        self.objective.add_expr(expr, 1.0);
    }

    pub fn add_objective_term(&mut self, v: VarId, c: f64) {
        self.objective.add(v, c);
    }

    pub fn set_objective(&mut self, expr: LinExpr) {
        self.objective = expr;
    }

    /// The objective with repeated variables merged.
    pub fn objective(&self) -> LinExpr {
        self.objective.compact()
    }

    pub fn vars(&self) -> &[Variable] {
        &self.vars
    }

    pub fn var(&self, id: VarId) -> &Variable {
        &self.vars[id.0]
    }

    pub fn var_id(&self, name: &str) -> Option<VarId> {
        self.var_index.get(name).copied()
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.cons
    }

    pub fn constraint(&self, id: ConId) -> &Constraint {
        &self.cons[id.0]
    }

    pub fn con_id(&self, name: &str) -> Option<ConId> {
        self.con_index.get(name).copied()
    }

    pub fn roles(&self) -> &BTreeMap<String, Vec<ConId>> {
        &self.roles
    }

    pub fn with_role(&self, role: &str) -> &[ConId] {
        self.roles.get(role).map_or(&[], Vec::as_slice)
    }

    pub fn set_bounds(&mut self, id: VarId, lb: f64, ub: f64) {
        let v = &mut self.vars[id.0];
        v.lb = lb;
        v.ub = ub;
    }

    pub fn binary_count(&self) -> usize {
        self.vars.iter().filter(|v| v.kind == VarKind::Binary).count()
    }

    pub fn binary_count_with_prefix(&self, prefix: &str) -> usize {
        self.vars
            .iter()
            .filter(|v| v.kind == VarKind::Binary && v.name.starts_with(prefix))
            .count()
    }

    pub fn is_mip(&self) -> bool {
        self.binary_count() > 0
    }

    /// Turns every binary into a continuous variable fixed at its rounded value.
    pub fn fix_binaries(&mut self, values: &[f64]) {
        for (v, &x) in self.vars.iter_mut().zip(values) {
            if v.kind == VarKind::Binary {
                let x = if x >= 0.5 { 1.0 } else { 0.0 };
                v.kind = VarKind::Continuous;
                v.lb = x;
                v.ub = x;
            }
        }
    }

    /// Largest bound or constraint violation of a point, with binaries checked for integrality.
    pub fn max_violation(&self, values: &[f64]) -> f64 {
        let mut worst: f64 = 0.0;
        for (v, &x) in self.vars.iter().zip(values) {
            worst = worst.max(v.lb - x).max(x - v.ub);
            if v.kind == VarKind::Binary {
                worst = worst.max((x - x.round()).abs());
            }
        }
        for c in &self.cons {
            let scale = 1.0 + c.rhs.abs();
            worst = worst.max(c.violation(values) / scale);
        }
        worst
    }

    /// Structural equality: variables, constraints and objective (roles ignored).
    pub fn same_program(&self, other: &MilpModel) -> bool {
        self.vars == other.vars && self.cons == other.cons && self.objective() == other.objective()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn duplicate_names_are_rejected() {
        let mut m = MilpModel::new("t");
        m.continuous("x", 0.0, 1.0).unwrap();
        assert!(m.continuous("x", 0.0, 1.0).is_err());
        let x = m.var_id("x").unwrap();
        m.add_constraint("c", &LinExpr::var(x), Sense::Le, 1.0).unwrap();
        assert!(m.add_constraint("c", &LinExpr::var(x), Sense::Le, 1.0).is_err());
    }

    #[test]
    fn binaries_are_clamped_to_unit_bounds() {
        let mut m = MilpModel::new("t");
        let d = m.add_var("d", VarKind::Binary, -3.0, 7.0).unwrap();
        assert_eq!((m.var(d).lb, m.var(d).ub), (0.0, 1.0));
    }

    #[test]
    fn expression_constant_moves_to_rhs() {
        let mut m = MilpModel::new("t");
        let x = m.continuous("x", 0.0, 10.0).unwrap();
        let mut e = LinExpr::var(x);
        e.add(x, 1.0).add_constant(2.0);
        let c = m.add_constraint("c", &e, Sense::Ge, 5.0).unwrap();
        let con = m.constraint(c);
        assert_eq!(con.terms, vec![(x, 2.0)]);
        assert_eq!(con.rhs, 3.0);
    }

    #[test]
    fn unknown_variable_is_rejected() {
        let mut m = MilpModel::new("t");
        assert!(m
            .add_constraint("c", &LinExpr::var(VarId(3)), Sense::Le, 1.0)
            .is_err());
    }

    #[test]
    fn fixing_binaries_rounds_and_relaxes() {
        let mut m = MilpModel::new("t");
        m.binary("a").unwrap();
        m.binary("b").unwrap();
        m.fix_binaries(&[0.9999999, 1e-8]);
        assert!(!m.is_mip());
        assert_eq!((m.vars()[0].lb, m.vars()[0].ub), (1.0, 1.0));
        assert_eq!((m.vars()[1].lb, m.vars()[1].ub), (0.0, 0.0));
    }
}
