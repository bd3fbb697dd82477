use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

/// Affine expression `constant + Σ coeff·x_var` with variables sorted and
/// zero coefficients dropped.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Affine {
    pub constant: f64,
    pub coeffs: Vec<(usize, f64)>,
}

impl Affine {
    pub fn constant(c: f64) -> Self {
        Affine { constant: c, coeffs: Vec::new() }
    }

    pub fn var(v: usize) -> Self {
        Affine { constant: 0.0, coeffs: vec![(v, 1.0)] }
    }

    /// Builds a normalised expression from possibly repeated terms.
    pub fn from_terms(constant: f64, terms: impl IntoIterator<Item = (usize, f64)>) -> Self {
        let mut map: BTreeMap<usize, f64> = BTreeMap::new();
        for (v, c) in terms {
            *map.entry(v).or_insert(0.0) += c;
        }
        Affine { constant: normalise_zero(constant), coeffs: map.into_iter().filter(|&(_, c)| c != 0.0).collect() }
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.constant + self.coeffs.iter().map(|&(v, c)| c * x[v]).sum::<f64>()
    }

    /// `self - other`.
    pub fn minus(&self, other: &Affine) -> Affine {
        Affine::from_terms(
            self.constant - other.constant,
            self.coeffs.iter().copied().chain(other.coeffs.iter().map(|&(v, c)| (v, -c))),
        )
    }

    pub fn scaled(&self, k: f64) -> Affine {
        Affine::from_terms(self.constant * k, self.coeffs.iter().map(|&(v, c)| (v, c * k)))
    }

    pub fn plus(&self, other: &Affine) -> Affine {
        Affine::from_terms(self.constant + other.constant, self.coeffs.iter().chain(&other.coeffs).copied())
    }

    pub fn is_constant(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn vars(&self) -> impl Iterator<Item = usize> + '_ {
        self.coeffs.iter().map(|&(v, _)| v)
    }
}

fn normalise_zero(x: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        x
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Relation {
    Le,
    Eq,
    Ge,
}

impl Relation {
    pub fn symbol(self) -> &'static str {
        match self {
            Relation::Le => "<=",
            Relation::Eq => "=",
            Relation::Ge => ">=",
        }
    }
}

/// Why a constraint was added.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ConstraintKind {
    /// Value fixed to 1 (target) or 0 (sink, Minimizer-only end component).
    Pin,
    /// State with one action: value equals that action's value.
    Single,
    /// Maximizer value at least / Minimizer value at most each action value.
    Player,
}

impl ConstraintKind {
    pub fn keyword(self) -> &'static str {
        match self {
            ConstraintKind::Pin => "pin",
            ConstraintKind::Single => "single",
            ConstraintKind::Player => "player",
        }
    }
}

/// `lhs rel rhs`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Constraint {
    pub kind: ConstraintKind,
    pub lhs: Affine,
    pub rel: Relation,
    pub rhs: Affine,
}

impl Constraint {
    /// Amount by which `x` violates the constraint (0 when satisfied).
    pub fn violation(&self, x: &[f64]) -> f64 {
        let d = self.lhs.eval(x) - self.rhs.eval(x);
        match self.rel {
            Relation::Le => d.max(0.0),
            Relation::Ge => (-d).max(0.0),
            Relation::Eq => d.abs(),
        }
    }
}

/// Product of affine factors contributed by one state.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProductTerm {
    pub state: usize,
    pub factors: Vec<Affine>,
}

impl ProductTerm {
    pub fn degree(&self) -> usize {
        self.factors.len()
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.factors.iter().map(|f| f.eval(x)).product()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum GroupOp {
    Max,
    Min,
}

impl GroupOp {
    pub fn keyword(self) -> &'static str {
        match self {
            GroupOp::Max => "max",
            GroupOp::Min => "min",
        }
    }
}

/// `target = op { operands }`, linearised with one binary per operand and a
/// big-M constant.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MaxMinGroup {
    pub target: usize,
    pub op: GroupOp,
    pub operands: Vec<Affine>,
    pub big_m: f64,
}

impl MaxMinGroup {
    /// Operand values at `x` and the index of the lowest achieving operand.
    pub fn select(&self, x: &[f64]) -> (usize, f64) {
        let mut best = (0, self.operands[0].eval(x));
        for (k, e) in self.operands.iter().enumerate().skip(1) {
            let v = e.eval(x);
            let better = match self.op {
                GroupOp::Max => v > best.1,
                GroupOp::Min => v < best.1,
            };
            if better {
                best = (k, v);
            }
        }
        best
    }
}

/// Variables are numbered with the state values first (`v_<state>` is
/// variable `state`) followed by auxiliary variables `w_<k>` (variable
/// `num_states + k`).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MathProgram {
    pub num_states: usize,
    pub num_aux: usize,
    pub terms: Vec<ProductTerm>,
    pub constraints: Vec<Constraint>,
    pub groups: Vec<MaxMinGroup>,
}

impl MathProgram {
    pub fn new(num_states: usize) -> Self {
        MathProgram { num_states, num_aux: 0, terms: Vec::new(), constraints: Vec::new(), groups: Vec::new() }
    }

    pub fn num_vars(&self) -> usize {
        self.num_states + self.num_aux
    }

    pub fn add_aux(&mut self) -> usize {
        self.num_aux += 1;
        self.num_states + self.num_aux - 1
    }

    pub fn var_name(&self, v: usize) -> VarName {
        if v < self.num_states {
            VarName::State(v)
        } else {
            VarName::Aux(v - self.num_states)
        }
    }

    pub fn max_degree(&self) -> usize {
        self.terms.iter().map(ProductTerm::degree).max().unwrap_or(0)
    }

    pub fn num_binaries(&self) -> usize {
        self.groups.iter().map(|g| g.operands.len()).sum()
    }

    pub fn objective(&self, x: &[f64]) -> f64 {
        self.terms.iter().map(|t| t.eval(x)).sum()
    }

    /// Full assignment from state values: each auxiliary variable is set to
    /// the value of its defining group. Groups defining auxiliary variables
    /// only refer to state variables or earlier auxiliary variables.
    pub fn complete_assignment(&self, state_values: &[f64]) -> Vec<f64> {
        let mut x = state_values.to_vec();
        x.resize(self.num_vars(), 0.0);
        for g in &self.groups {
            if g.target >= self.num_states {
                x[g.target] = g.select(&x).1;
            }
        }
        x
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum VarName {
    State(usize),
    Aux(usize),
}

impl fmt::Display for VarName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            VarName::State(s) => write!(f, "v_{s}"),
            VarName::Aux(k) => write!(f, "w_{k}"),
        }
    }
}
