use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Sense {
    Le,
    Ge,
    Eq,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Variable {
    pub name: String,
    pub lower: f64,
    pub upper: f64,
    pub integer: bool,
    pub objective: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Row {
    pub coefs: Vec<(usize, f64)>,
    pub sense: Sense,
    pub rhs: f64,
}

impl Row {
    pub fn new(coefs: Vec<(usize, f64)>, sense: Sense, rhs: f64) -> Self {
        Row { coefs, sense, rhs }
    }

    pub fn activity(&self, x: &[f64]) -> f64 {
        self.coefs.iter().map(|&(j, a)| a * x[j]).sum()
    }

    /// Amount by which `x` violates the row; non-positive when satisfied.
    pub fn violation(&self, x: &[f64]) -> f64 {
        let act = self.activity(x);
        match self.sense {
            Sense::Le => act - self.rhs,
            Sense::Ge => self.rhs - act,
            Sense::Eq => (act - self.rhs).abs(),
        }
    }

    /// Merges duplicate columns and drops zero coefficients.
    pub fn normalized(mut self) -> Self {
        self.coefs.sort_by_key(|p| p.0);
        let mut out: Vec<(usize, f64)> = Vec::with_capacity(self.coefs.len());
        for (j, a) in self.coefs {
            match out.last_mut() {
                Some(last) if last.0 == j => last.1 += a,
                _ => out.push((j, a)),
            }
        }
        out.retain(|p| p.1 != 0.0);
        self.coefs = out;
        self
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("row references unknown variable {index} (model has {count})")]
    UnknownVariable { index: usize, count: usize },
    #[error("row has no nonzero coefficients")]
    EmptyRow,
    #[error("integer variable {0} needs finite bounds")]
    UnboundedInteger(String),
    #[error("variable {0} has lower bound above upper bound")]
    EmptyDomain(String),
}

/// Minimisation MILP in sparse row form.
#[derive(Clone, Debug, Default)]
pub struct MilpModel {
    vars: Vec<Variable>,
    rows: Vec<Row>,
}

impl MilpModel {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_var(&mut self, var: Variable) -> Result<usize, ModelError> {
        if var.lower > var.upper {
            return Err(ModelError::EmptyDomain(var.name));
        }
        if var.integer && !(var.lower.is_finite() && var.upper.is_finite()) {
            return Err(ModelError::UnboundedInteger(var.name));
        }
        self.vars.push(var);
        Ok(self.vars.len() - 1)
    }

    pub fn add_binary(&mut self, name: &str, objective: f64) -> usize {
        self.add_var(Variable { name: name.into(), lower: 0.0, upper: 1.0, integer: true, objective })
            .expect("binary bounds are valid")
    }

    pub fn add_integer(&mut self, name: &str, lower: f64, upper: f64, objective: f64) -> usize {
        self.add_var(Variable { name: name.into(), lower, upper, integer: true, objective })
            .expect("integer bounds must be finite and ordered")
    }

    pub fn add_continuous(&mut self, name: &str, lower: f64, upper: f64, objective: f64) -> usize {
        self.add_var(Variable { name: name.into(), lower, upper, integer: false, objective })
            .expect("bounds must be ordered")
    }

    pub fn check_row(&self, row: &Row) -> Result<(), ModelError> {
        if let Some(&(index, _)) = row.coefs.iter().find(|p| p.0 >= self.vars.len()) {
            return Err(ModelError::UnknownVariable { index, count: self.vars.len() });
        }
        if row.coefs.iter().all(|p| p.1 == 0.0) {
            return Err(ModelError::EmptyRow);
        }
        Ok(())
    }

    pub fn add_row(&mut self, row: Row) -> Result<usize, ModelError> {
        self.check_row(&row)?;
        self.rows.push(row.normalized());
        Ok(self.rows.len() - 1)
    }

    pub fn num_vars(&self) -> usize {
        self.vars.len()
    }

    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn vars(&self) -> &[Variable] {
        &self.vars
    }

    pub fn rows(&self) -> &[Row] {
        &self.rows
    }

    pub fn objective_value(&self, x: &[f64]) -> f64 {
        self.vars.iter().zip(x).map(|(v, x)| v.objective * x).sum()
    }

    /// Whether `x` respects bounds, integrality and every row within `tol`.
    pub fn is_feasible(&self, x: &[f64], tol: f64) -> bool {
        x.len() == self.vars.len()
            && self.vars.iter().zip(x).all(|(v, &x)| {
                x >= v.lower - tol && x <= v.upper + tol && (!v.integer || (x - x.round()).abs() <= tol)
            })
            && self.rows.iter().all(|r| r.violation(x) <= tol)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_invalid_rows_and_vars() {
        let mut m = MilpModel::new();
        let x = m.add_binary("x", 1.0);
        assert_eq!(
            m.add_row(Row::new(vec![(x, 1.0), (5, 1.0)], Sense::Le, 1.0)),
            Err(ModelError::UnknownVariable { index: 5, count: 1 })
        );
        assert_eq!(m.add_row(Row::new(vec![(x, 0.0)], Sense::Le, 1.0)), Err(ModelError::EmptyRow));
        assert!(m
            .add_var(Variable { name: "y".into(), lower: 0.0, upper: f64::INFINITY, integer: true, objective: 0.0 })
            .is_err());
    }

    #[test]
    fn normalization_merges_duplicates() {
        let r = Row::new(vec![(2, 1.0), (0, 2.0), (2, -1.0), (0, 1.0)], Sense::Ge, 0.0).normalized();
        assert_eq!(r.coefs, vec![(0, 3.0)]);
    }
}
