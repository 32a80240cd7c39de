//! Solver-agnostic mixed-integer linear models and the builders that emit them.

pub mod dddr;
pub mod lp_format;
pub mod mccormick;
pub mod saa;

use std::collections::HashMap;
use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};

pub use dddr::{build_dddr, build_dr, DualBounds, DualLayout, Formulation};
pub use lp_format::export_lp_text;
pub use mccormick::{mccormick_bilinear, mccormick_trilinear};
pub use saa::build_sp_saa;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct VarId(pub usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum VarKind {
    Continuous,
    Binary,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ConstraintSense {
    Le,
    Ge,
    Eq,
}

impl ConstraintSense {
    pub fn symbol(self) -> &'static str {
        match self {
            ConstraintSense::Le => "<=",
            ConstraintSense::Ge => ">=",
            ConstraintSense::Eq => "=",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Variable {
    pub name: String,
    pub kind: VarKind,
    pub lower: f64,
    pub upper: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Constraint {
    pub name: String,
    pub coeffs: Vec<(VarId, f64)>,
    pub sense: ConstraintSense,
    pub rhs: f64,
}

impl Constraint {
    pub fn activity(&self, values: &[f64]) -> f64 {
        self.coeffs.iter().map(|(v, a)| a * values[v.0]).sum()
    }

    /// Amount by which `values` violate this row (0 when satisfied).
    pub fn violation(&self, values: &[f64]) -> f64 {
        let lhs = self.activity(values);
        match self.sense {
            ConstraintSense::Le => (lhs - self.rhs).max(0.0),
            ConstraintSense::Ge => (self.rhs - lhs).max(0.0),
            ConstraintSense::Eq => (lhs - self.rhs).abs(),
        }
    }
}

/// Minimization model: variables, linear rows and a linear objective plus constant.
#[derive(Debug, Clone, Default)]
pub struct MilpModel {
    pub name: String,
    variables: Vec<Variable>,
    constraints: Vec<Constraint>,
    objective: Vec<f64>,
    pub objective_constant: f64,
    by_name: HashMap<String, VarId>,
    row_names: HashMap<String, usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ModelStats {
    pub variables: usize,
    pub binaries: usize,
    pub constraints: usize,
    pub nonzeros: usize,
}

impl fmt::Display for ModelStats {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "variables = {}\nbinaries = {}\nconstraints = {}\nnonzeros = {}\n",
            self.variables, self.binaries, self.constraints, self.nonzeros
        )
    }
}

impl MilpModel {
    pub fn new(name: impl Into<String>) -> Self {
        MilpModel {
            name: name.into(),
            ..Default::default()
        }
    }

    pub fn add_var(
        &mut self,
        name: impl Into<String>,
        kind: VarKind,
        lower: f64,
        upper: f64,
    ) -> Result<VarId> {
        let name = name.into();
        if lower > upper || lower.is_nan() || upper.is_nan() {
            return Err(Error::Model(format!(
                "variable {name} has empty bounds [{lower}, {upper}]"
            )));
        }
        if kind == VarKind::Binary && (lower < 0.0 || upper > 1.0) {
            return Err(Error::Model(format!(
                "binary variable {name} must have bounds within [0, 1]"
            )));
        }
        if self.by_name.contains_key(&name) {
            return Err(Error::Model(format!("duplicate variable name {name}")));
        }
        let id = VarId(self.variables.len());
        self.by_name.insert(name.clone(), id);
        self.variables.push(Variable {
            name,
            kind,
            lower,
            upper,
        });
        self.objective.push(0.0);
        Ok(id)
    }

    pub fn add_binary(&mut self, name: impl Into<String>) -> Result<VarId> {
        self.add_var(name, VarKind::Binary, 0.0, 1.0)
    }

    pub fn add_continuous(
        &mut self,
        name: impl Into<String>,
        lower: f64,
        upper: f64,
    ) -> Result<VarId> {
        self.add_var(name, VarKind::Continuous, lower, upper)
    }

    /// Adds a row. Repeated variables are merged and zero coefficients dropped.
    pub fn add_constraint(
        &mut self,
        name: impl Into<String>,
        coeffs: impl IntoIterator<Item = (VarId, f64)>,
        sense: ConstraintSense,
        rhs: f64,
    ) -> Result<usize> {
        let name = name.into();
        if self.row_names.contains_key(&name) {
            return Err(Error::Model(format!("duplicate constraint name {name}")));
        }
        if !rhs.is_finite() {
            return Err(Error::Model(format!(
                "constraint {name} has non-finite rhs"
            )));
        }
        let mut merged: Vec<(VarId, f64)> = Vec::new();
        for (v, a) in coeffs {
            if v.0 >= self.variables.len() {
                return Err(Error::Model(format!(
                    "constraint {name} references undeclared variable {}",
                    v.0
                )));
            }
            if !a.is_finite() {
                return Err(Error::Model(format!(
                    "constraint {name} has non-finite coefficient"
                )));
            }
            match merged.iter_mut().find(|(u, _)| *u == v) {
                Some(slot) => slot.1 += a,
                None => merged.push((v, a)),
            }
        }
        merged.retain(|(_, a)| *a != 0.0);
        let idx = self.constraints.len();
        self.row_names.insert(name.clone(), idx);
        self.constraints.push(Constraint {
            name,
            coeffs: merged,
            sense,
            rhs,
        });
        Ok(idx)
    }

    pub fn add_rows(&mut self, rows: Vec<Constraint>) -> Result<()> {
        for r in rows {
            self.add_constraint(r.name, r.coeffs, r.sense, r.rhs)?;
        }
        Ok(())
    }

    pub fn add_objective(&mut self, var: VarId, coeff: f64) {
        self.objective[var.0] += coeff;
    }

    pub fn set_objective(&mut self, var: VarId, coeff: f64) {
        self.objective[var.0] = coeff;
    }

    pub fn variables(&self) -> &[Variable] {
        &self.variables
    }

    pub fn variable(&self, v: VarId) -> &Variable {
        &self.variables[v.0]
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }

    /// Dense objective coefficients indexed by variable.
    pub fn objective(&self) -> &[f64] {
        &self.objective
    }

    pub fn var_by_name(&self, name: &str) -> Option<VarId> {
        self.by_name.get(name).copied()
    }

    pub fn constraint_by_name(&self, name: &str) -> Option<&Constraint> {
        self.row_names.get(name).map(|i| &self.constraints[*i])
    }

    pub fn num_vars(&self) -> usize {
        self.variables.len()
    }

    pub fn binaries(&self) -> Vec<VarId> {
        self.variables
            .iter()
            .enumerate()
            .filter(|(_, v)| v.kind == VarKind::Binary)
            .map(|(i, _)| VarId(i))
            .collect()
    }

    /// Tightens or relaxes the bounds of an existing variable.
    pub fn set_bounds(&mut self, v: VarId, lower: f64, upper: f64) {
        let var = &mut self.variables[v.0];
        var.lower = lower;
        var.upper = upper;
    }

    pub fn stats(&self) -> ModelStats {
        ModelStats {
            variables: self.variables.len(),
            binaries: self
                .variables
                .iter()
                .filter(|v| v.kind == VarKind::Binary)
                .count(),
            constraints: self.constraints.len(),
            nonzeros: self.constraints.iter().map(|c| c.coeffs.len()).sum(),
        }
    }

    pub fn objective_value(&self, values: &[f64]) -> f64 {
        self.objective_constant
            + self
                .objective
                .iter()
                .zip(values)
                .map(|(c, x)| c * x)
                .sum::<f64>()
    }

    /// Largest row or bound violation of a candidate point.
    pub fn max_violation(&self, values: &[f64]) -> f64 {
        let rows = self
            .constraints
            .iter()
            .map(|c| c.violation(values))
            .fold(0.0, f64::max);
        let bounds = self
            .variables
            .iter()
            .zip(values)
            .map(|(v, x)| (v.lower - x).max(x - v.upper).max(0.0))
            .fold(0.0, f64::max);
        rows.max(bounds)
    }

    /// Checks the container invariants: binary bounds and unique names are
    /// enforced on insertion, so this only revalidates bounds after edits.
    pub fn check(&self) -> Result<()> {
        for v in &self.variables {
            if v.lower > v.upper {
                return Err(Error::Model(format!(
                    "variable {} has empty bounds",
                    v.name
                )));
            }
            if v.kind == VarKind::Binary && (v.lower < 0.0 || v.upper > 1.0) {
                return Err(Error::Model(format!(
                    "binary variable {} left [0, 1]",
                    v.name
                )));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_duplicates_and_bad_refs() {
        let mut m = MilpModel::new("t");
        let x = m.add_continuous("x", 0.0, 1.0).unwrap();
        assert!(m.add_continuous("x", 0.0, 1.0).is_err());
        assert!(m.add_var("b", VarKind::Binary, 0.0, 2.0).is_err());
        m.add_constraint("c", [(x, 1.0)], ConstraintSense::Le, 1.0)
            .unwrap();
        assert!(m
            .add_constraint("c", [(x, 1.0)], ConstraintSense::Le, 1.0)
            .is_err());
        assert!(m
            .add_constraint("d", [(VarId(7), 1.0)], ConstraintSense::Le, 1.0)
            .is_err());
    }

    #[test]
    fn merges_repeated_terms() {
        let mut m = MilpModel::new("t");
        let x = m.add_continuous("x", 0.0, 1.0).unwrap();
        let y = m.add_continuous("y", 0.0, 1.0).unwrap();
        m.add_constraint(
            "c",
            [(x, 1.0), (y, 2.0), (x, 3.0), (y, -2.0)],
            ConstraintSense::Ge,
            0.0,
        )
        .unwrap();
        assert_eq!(m.constraints()[0].coeffs, vec![(x, 4.0)]);
        assert_eq!(m.stats().nonzeros, 1);
    }
}
