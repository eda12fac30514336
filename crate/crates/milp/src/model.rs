//! Problem container: variables with bounds, linear rows, objective sense.
//!
//! The model is always a maximization; minimize by negating the objective.
//! Rows are stored sparsely as `(VarId, coefficient)` lists. Duplicate
//! coefficients on the same variable within one row are summed at build time.

use std::fmt;

// ==================================================================
// identifiers
// ==================================================================

/// Index of a structural variable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct VarId(pub(crate) u32);

/// Index of a row (constraint).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct RowId(pub(crate) u32);

impl VarId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl RowId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

// ==================================================================
// variables and rows
// ==================================================================

/// Continuous or integral requirement on a variable.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VarKind {
    Continuous,
    /// Integer within its bounds; `Binary` is `Integer` with bounds [0, 1].
    Integer,
}

#[derive(Debug, Clone)]
pub struct Var {
    pub name: String,
    pub lo: f64,
    pub hi: f64,
    pub obj: f64,
    pub kind: VarKind,
    /// Branching priority; higher is branched first. Ties fall back to
    /// most-fractional.
    pub priority: i32,
}

/// Constraint sense for `lhs (sense) rhs`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RowSense {
    Le,
    Ge,
    Eq,
}

#[derive(Debug, Clone)]
pub struct Row {
    pub name: String,
    pub coefs: Vec<(VarId, f64)>,
    pub sense: RowSense,
    pub rhs: f64,
}

// ==================================================================
// model
// ==================================================================

/// A linear program with optional integrality marks.
#[derive(Debug, Clone, Default)]
pub struct Model {
    pub(crate) vars: Vec<Var>,
    pub(crate) rows: Vec<Row>,
}

impl Model {
    pub fn new() -> Self {
        Self::default()
    }

    /// Add a continuous variable. `obj` is its maximization coefficient.
    pub fn add_var(&mut self, name: impl Into<String>, lo: f64, hi: f64, obj: f64) -> VarId {
        self.push_var(name.into(), lo, hi, obj, VarKind::Continuous, 0)
    }

    /// Add a binary variable (integer in [0, 1]).
    pub fn add_bin(&mut self, name: impl Into<String>, obj: f64) -> VarId {
        self.push_var(name.into(), 0.0, 1.0, obj, VarKind::Integer, 0)
    }

    /// Add an integer variable within [lo, hi].
    pub fn add_int(&mut self, name: impl Into<String>, lo: f64, hi: f64, obj: f64) -> VarId {
        self.push_var(name.into(), lo, hi, obj, VarKind::Integer, 0)
    }

    fn push_var(&mut self, name: String, lo: f64, hi: f64, obj: f64, kind: VarKind, priority: i32) -> VarId {
        assert!(lo <= hi, "variable {name}: lo {lo} > hi {hi}");
        let id = VarId(self.vars.len() as u32);
        self.vars.push(Var { name, lo, hi, obj, kind, priority });
        id
    }

    /// Set the branching priority of a variable (higher branches earlier).
    pub fn set_priority(&mut self, v: VarId, priority: i32) {
        self.vars[v.index()].priority = priority;
    }

    /// Overwrite the objective coefficient of a variable.
    pub fn set_obj(&mut self, v: VarId, obj: f64) {
        self.vars[v.index()].obj = obj;
    }

    /// Overwrite the bounds of a variable.
    pub fn set_bounds(&mut self, v: VarId, lo: f64, hi: f64) {
        assert!(lo <= hi, "variable {}: lo {lo} > hi {hi}", self.vars[v.index()].name);
        self.vars[v.index()].lo = lo;
        self.vars[v.index()].hi = hi;
    }

    /// Add a row `Σ coefs (sense) rhs`; duplicate variable entries are summed.
    pub fn add_row(
        &mut self,
        name: impl Into<String>,
        sense: RowSense,
        rhs: f64,
        coefs: &[(VarId, f64)],
    ) -> RowId {
        let mut merged: Vec<(VarId, f64)> = Vec::with_capacity(coefs.len());
        for &(v, c) in coefs {
            debug_assert!(v.index() < self.vars.len(), "row references unknown var");
            if c == 0.0 {
                continue;
            }
            match merged.iter_mut().find(|(mv, _)| *mv == v) {
                Some((_, mc)) => *mc += c,
                None => merged.push((v, c)),
            }
        }
        let id = RowId(self.rows.len() as u32);
        self.rows.push(Row { name: name.into(), coefs: merged, sense, rhs });
        id
    }

    #[inline]
    pub fn num_vars(&self) -> usize {
        self.vars.len()
    }

    #[inline]
    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn var(&self, v: VarId) -> &Var {
        &self.vars[v.index()]
    }

    pub fn row(&self, r: RowId) -> &Row {
        &self.rows[r.index()]
    }

    pub fn vars(&self) -> impl Iterator<Item = (VarId, &Var)> {
        self.vars.iter().enumerate().map(|(i, v)| (VarId(i as u32), v))
    }

    pub fn rows(&self) -> impl Iterator<Item = (RowId, &Row)> {
        self.rows.iter().enumerate().map(|(i, r)| (RowId(i as u32), r))
    }

    /// Ids of all integer-constrained variables.
    pub fn integer_vars(&self) -> Vec<VarId> {
        self.vars
            .iter()
            .enumerate()
            .filter(|(_, v)| v.kind == VarKind::Integer)
            .map(|(i, _)| VarId(i as u32))
            .collect()
    }

    /// Evaluate a row's left-hand side at a point.
    pub fn row_lhs(&self, r: RowId, x: &[f64]) -> f64 {
        self.rows[r.index()]
            .coefs
            .iter()
            .map(|&(v, c)| c * x[v.index()])
            .sum()
    }

    /// Largest violation of rows and bounds at a point (0 when feasible).
    pub fn max_violation(&self, x: &[f64]) -> f64 {
        let mut worst = 0.0f64;
        for (i, var) in self.vars.iter().enumerate() {
            worst = worst.max(var.lo - x[i]).max(x[i] - var.hi);
        }
        for (i, row) in self.rows.iter().enumerate() {
            let lhs = self.row_lhs(RowId(i as u32), x);
            let v = match row.sense {
                RowSense::Le => lhs - row.rhs,
                RowSense::Ge => row.rhs - lhs,
                RowSense::Eq => (lhs - row.rhs).abs(),
            };
            worst = worst.max(v);
        }
        worst
    }

    /// Objective value at a point.
    pub fn objective_at(&self, x: &[f64]) -> f64 {
        self.vars.iter().enumerate().map(|(i, v)| v.obj * x[i]).sum()
    }
}

impl fmt::Display for RowSense {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RowSense::Le => write!(f, "<="),
            RowSense::Ge => write!(f, ">="),
            RowSense::Eq => write!(f, "="),
        }
    }
}

// ==================================================================
// tests
// ==================================================================

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn row_merges_duplicate_coefficients() {
        let mut m = Model::new();
        let x = m.add_var("x", 0.0, 1.0, 1.0);
        let r = m.add_row("r", RowSense::Le, 4.0, &[(x, 1.0), (x, 2.0)]);
        assert_eq!(m.row(r).coefs, vec![(x, 3.0)]);
    }

    #[test]
    fn violation_and_objective_eval() {
        let mut m = Model::new();
        let x = m.add_var("x", 0.0, 2.0, 3.0);
        let y = m.add_var("y", 0.0, 2.0, 1.0);
        m.add_row("cap", RowSense::Le, 2.0, &[(x, 1.0), (y, 1.0)]);
        assert_eq!(m.objective_at(&[1.0, 1.0]), 4.0);
        assert!(m.max_violation(&[1.0, 1.0]) <= 0.0);
        assert!((m.max_violation(&[2.0, 1.0]) - 1.0).abs() < 1e-12);
    }
}
