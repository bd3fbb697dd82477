use std::fmt;

use serde::{Deserialize, Serialize};

use crate::mathprog::program::MathProgram;

/// Outcome of plugging candidate values into a program.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub objective: f64,
    /// Largest violation over linear constraints, groups and variable bounds.
    pub max_residual: f64,
    pub max_constraint_residual: f64,
    pub max_group_residual: f64,
    pub max_bound_residual: f64,
    /// Achieving operand of each group (its binary set to 1).
    pub selections: Vec<usize>,
    pub tol: f64,
    pub pass: bool,
}

/// Evaluates the program at `state_values`. Auxiliary variables take the
/// value of their defining group and every group's binary selects its
/// achieving operand, so a group's residual is the distance of its target
/// from the max/min of its operands.
pub fn verify_solution(prog: &MathProgram, state_values: &[f64], tol: f64) -> VerifyReport {
    assert_eq!(state_values.len(), prog.num_states, "one value per state expected");
    let x = prog.complete_assignment(state_values);
    let objective = prog.objective(&x);
    let max_constraint_residual = prog.constraints.iter().map(|c| c.violation(&x)).fold(0.0, f64::max);
    let mut selections = Vec::with_capacity(prog.groups.len());
    let mut max_group_residual: f64 = 0.0;
    for g in &prog.groups {
        let (k, v) = g.select(&x);
        selections.push(k);
        max_group_residual = max_group_residual.max((x[g.target] - v).abs());
    }
    let max_bound_residual = x.iter().map(|&v| (-v).max(v - 1.0).max(0.0)).fold(0.0, f64::max);
    let max_residual = max_constraint_residual.max(max_group_residual).max(max_bound_residual);
    let pass = objective.abs() <= tol && max_residual <= tol && objective.is_finite() && max_residual.is_finite();
    VerifyReport {
        objective,
        max_residual,
        max_constraint_residual,
        max_group_residual,
        max_bound_residual,
        selections,
        tol,
        pass,
    }
}

impl fmt::Display for VerifyReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "objective          {:e}", self.objective)?;
        writeln!(f, "constraint residual {:e}", self.max_constraint_residual)?;
        writeln!(f, "group residual     {:e}", self.max_group_residual)?;
        writeln!(f, "bound residual     {:e}", self.max_bound_residual)?;
        if !self.selections.is_empty() {
            let sel: Vec<String> = self.selections.iter().map(|k| k.to_string()).collect();
            writeln!(f, "group selections   {}", sel.join(" "))?;
        }
        write!(f, "{} (tol {:e})", if self.pass { "PASS" } else { "FAIL" }, self.tol)
    }
}
