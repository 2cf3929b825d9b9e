//! Binary factor graphs with hard logic factors.
//!
//! Variables are binary; assigning 1 to a variable contributes its potential
//! to the objective and assigning 0 contributes nothing. Factors are hard
//! constraints over literals (a variable or its negation).

mod admm;
mod exhaustive;
mod projection;

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

pub use admm::{
    round_threshold, solve_map, solve_relaxed, solve_relaxed_from, AdmmSettings, InferenceResult,
    RelaxedSolution, SolveStatus, WarmStart,
};
pub use exhaustive::{exhaustive_map, MAX_EXHAUSTIVE_VARIABLES};
pub use projection::{project_factor, project_simplex};

/// Hard logic factor kinds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FactorKind {
    /// Exactly one literal is true.
    Xor,
    /// At most one literal is true.
    AtMostOne,
    /// At least one literal is true.
    Or,
    /// Antecedent implies consequent; exactly two literals.
    Imply,
}

impl FactorKind {
    pub const ALL: [FactorKind; 4] = [
        FactorKind::Xor,
        FactorKind::AtMostOne,
        FactorKind::Or,
        FactorKind::Imply,
    ];

    pub fn name(self) -> &'static str {
        match self {
            FactorKind::Xor => "XOR",
            FactorKind::AtMostOne => "AT_MOST_ONE",
            FactorKind::Or => "OR",
            FactorKind::Imply => "IMPLY",
        }
    }

    /// Whether the given literal truth values satisfy the factor.
    pub fn is_satisfied_by(self, literals: impl IntoIterator<Item = bool>) -> bool {
        let values: Vec<bool> = literals.into_iter().collect();
        let ones = values.iter().filter(|b| **b).count();
        match self {
            FactorKind::Xor => ones == 1,
            FactorKind::AtMostOne => ones <= 1,
            FactorKind::Or => ones >= 1,
            FactorKind::Imply => values.len() == 2 && (!values[0] || values[1]),
        }
    }
}

impl fmt::Display for FactorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for FactorKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "XOR" => Ok(FactorKind::Xor),
            "AT_MOST_ONE" => Ok(FactorKind::AtMostOne),
            "OR" => Ok(FactorKind::Or),
            "IMPLY" => Ok(FactorKind::Imply),
            "XOR_OUT" | "OR_OUT" | "AND_OUT" => Err(Error::UnsupportedFactor(format!(
                "{s} is a soft factor; only hard factors are supported"
            ))),
            other => Err(Error::UnsupportedFactor(other.to_string())),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BinaryVariable {
    pub id: usize,
    pub potential: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Literal {
    pub variable: usize,
    pub negated: bool,
}

impl Literal {
    pub fn positive(variable: usize) -> Self {
        Literal { variable, negated: false }
    }

    pub fn negative(variable: usize) -> Self {
        Literal { variable, negated: true }
    }

    /// Truth value of the literal under a 0/1 assignment.
    #[inline]
    pub fn value(&self, assignment: &[u8]) -> bool {
        (assignment[self.variable] == 1) != self.negated
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Factor {
    pub kind: FactorKind,
    pub literals: Vec<Literal>,
}

impl Factor {
    pub fn new(kind: FactorKind, literals: Vec<Literal>) -> Self {
        Factor { kind, literals }
    }

    pub fn is_satisfied(&self, assignment: &[u8]) -> bool {
        self.kind
            .is_satisfied_by(self.literals.iter().map(|l| l.value(assignment)))
    }
}

/// An immutable-once-built binary factor graph.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct FactorGraph {
    variables: Vec<BinaryVariable>,
    factors: Vec<Factor>,
}

impl FactorGraph {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_potentials(potentials: &[f64]) -> Self {
        let mut g = Self::new();
        for &p in potentials {
            g.add_variable(p);
        }
        g
    }

    /// Adds a variable and returns its id.
    pub fn add_variable(&mut self, potential: f64) -> usize {
        let id = self.variables.len();
        self.variables.push(BinaryVariable { id, potential });
        id
    }

    /// Adds a hard factor after validating it against the graph.
    ///
    /// An empty XOR or OR can never be satisfied and is reported as
    /// [`Error::Unsatisfiable`].
    pub fn add_factor(&mut self, factor: Factor) -> Result<()> {
        if factor.literals.is_empty() {
            return Err(match factor.kind {
                FactorKind::Xor | FactorKind::Or => Error::Unsatisfiable(format!(
                    "{} over an empty support",
                    factor.kind
                )),
                _ => Error::InvalidFactor(format!("{} with no literals", factor.kind)),
            });
        }
        if factor.kind == FactorKind::Imply && factor.literals.len() != 2 {
            return Err(Error::InvalidFactor(format!(
                "IMPLY takes exactly 2 literals, got {}",
                factor.literals.len()
            )));
        }
        let mut seen = std::collections::HashSet::with_capacity(factor.literals.len());
        for lit in &factor.literals {
            if lit.variable >= self.variables.len() {
                return Err(Error::InvalidFactor(format!(
                    "literal references variable {} but the graph has {}",
                    lit.variable,
                    self.variables.len()
                )));
            }
            if !seen.insert(lit.variable) {
                return Err(Error::InvalidFactor(format!(
                    "variable {} appears twice in one {} factor",
                    lit.variable, factor.kind
                )));
            }
        }
        self.factors.push(factor);
        Ok(())
    }

    pub fn variables(&self) -> &[BinaryVariable] {
        &self.variables
    }

    pub fn factors(&self) -> &[Factor] {
        &self.factors
    }

    pub fn num_variables(&self) -> usize {
        self.variables.len()
    }

    pub fn num_factors(&self) -> usize {
        self.factors.len()
    }

    pub fn potentials(&self) -> Vec<f64> {
        self.variables.iter().map(|v| v.potential).collect()
    }

    /// Adds `delta` to the potential of variable `id`.
    pub fn add_to_potential(&mut self, id: usize, delta: f64) {
        self.variables[id].potential += delta;
    }

    /// `sum_i potential_i * x_i`.
    pub fn objective(&self, assignment: &[u8]) -> f64 {
        self.variables
            .iter()
            .zip(assignment)
            .filter(|(_, &x)| x == 1)
            .map(|(v, _)| v.potential)
            .sum()
    }

    /// Number of factors the assignment violates.
    pub fn count_violations(&self, assignment: &[u8]) -> usize {
        self.factors
            .iter()
            .filter(|f| !f.is_satisfied(assignment))
            .count()
    }

    pub fn is_feasible(&self, assignment: &[u8]) -> bool {
        self.factors.iter().all(|f| f.is_satisfied(assignment))
    }
}
