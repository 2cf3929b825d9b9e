//! Logic constraints over node states, applied at inference time.
//!
//! A constraint is a hard factor kind over literals of the form
//! "node `v` of type `t` is in state `i`" (optionally negated). Compiling a
//! constraint against a [`BlockIndex`] yields one factor over the matching
//! `U[v,i]` indicators.
//!
//! Text form, one constraint per line: `OPERATOR type:node:state[!] ...`,
//! where a trailing `!` negates the literal. Blank lines and lines starting
//! with `#` are ignored.

use std::fmt;
use std::str::FromStr;

use crate::crf_model::{BlockIndex, Labeling};
use crate::error::{Error, Result};
use crate::factor_graph::{Factor, FactorKind, Literal};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct StateLiteral {
    pub node_type: usize,
    pub node: usize,
    pub state: usize,
    pub negated: bool,
}

impl StateLiteral {
    pub fn new(node_type: usize, node: usize, state: usize) -> Self {
        StateLiteral {
            node_type,
            node,
            state,
            negated: false,
        }
    }

    pub fn negated(mut self) -> Self {
        self.negated = !self.negated;
        self
    }

    /// Truth value under `y`; `None` when the node does not exist.
    pub fn value(&self, y: &Labeling) -> Option<bool> {
        if self.node_type >= y.num_types() {
            return None;
        }
        let label = *y.labels(self.node_type).get(self.node)?;
        Some((label == self.state) != self.negated)
    }
}

impl fmt::Display for StateLiteral {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.node_type, self.node, self.state)?;
        if self.negated {
            f.write_str("!")?;
        }
        Ok(())
    }
}

impl FromStr for StateLiteral {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (body, negated) = match s.strip_suffix('!') {
            Some(b) => (b, true),
            None => (s, false),
        };
        let parts: Vec<&str> = body.split(':').collect();
        if parts.len() != 3 {
            return Err(Error::InvalidConstraint(format!(
                "literal `{s}` is not of the form type:node:state[!]"
            )));
        }
        let num = |p: &str| {
            p.parse::<usize>()
                .map_err(|_| Error::InvalidConstraint(format!("`{p}` in literal `{s}` is not an index")))
        };
        Ok(StateLiteral {
            node_type: num(parts[0])?,
            node: num(parts[1])?,
            state: num(parts[2])?,
            negated,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NodeStateConstraint {
    operator: FactorKind,
    literals: Vec<StateLiteral>,
}

impl NodeStateConstraint {
    pub fn new(operator: FactorKind, literals: Vec<StateLiteral>) -> Result<Self> {
        if operator == FactorKind::Imply && literals.len() != 2 {
            return Err(Error::InvalidConstraint(format!(
                "IMPLY takes exactly 2 literals, got {}",
                literals.len()
            )));
        }
        Ok(NodeStateConstraint { operator, literals })
    }

    /// At most one of the listed nodes (all of type `t`) is in `state`.
    pub fn at_most_one(t: usize, nodes: impl IntoIterator<Item = usize>, state: usize) -> Self {
        NodeStateConstraint {
            operator: FactorKind::AtMostOne,
            literals: nodes
                .into_iter()
                .map(|v| StateLiteral::new(t, v, state))
                .collect(),
        }
    }

    pub fn operator(&self) -> FactorKind {
        self.operator
    }

    pub fn literals(&self) -> &[StateLiteral] {
        &self.literals
    }

    /// Whether `y` satisfies the constraint. Literals naming missing nodes
    /// make the constraint unsatisfied.
    pub fn is_satisfied(&self, y: &Labeling) -> bool {
        let values: Option<Vec<bool>> = self.literals.iter().map(|l| l.value(y)).collect();
        match values {
            Some(v) => self.operator.is_satisfied_by(v),
            None => false,
        }
    }
}

impl fmt::Display for NodeStateConstraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.operator.name())?;
        for lit in &self.literals {
            write!(f, " {lit}")?;
        }
        Ok(())
    }
}

impl FromStr for NodeStateConstraint {
    type Err = Error;

    fn from_str(line: &str) -> Result<Self> {
        let mut tokens = line.split_whitespace();
        let op = tokens
            .next()
            .ok_or_else(|| Error::InvalidConstraint("empty constraint line".into()))?;
        let operator: FactorKind = op.parse()?;
        let literals = tokens.map(str::parse).collect::<Result<Vec<_>>>()?;
        NodeStateConstraint::new(operator, literals)
    }
}

/// Parses the line-oriented text form.
pub fn parse_constraints(text: &str) -> Result<Vec<NodeStateConstraint>> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let c = line.parse().map_err(|e: Error| Error::Parse {
            line: i + 1,
            message: e.to_string(),
        })?;
        out.push(c);
    }
    Ok(out)
}

pub fn format_constraints(cs: &[NodeStateConstraint]) -> String {
    let mut s = String::new();
    for c in cs {
        s.push_str(&c.to_string());
        s.push('\n');
    }
    s
}

/// One factor per constraint over the corresponding `U[v,i]` variables.
pub fn compile(cs: &[NodeStateConstraint], blocks: &BlockIndex) -> Result<Vec<Factor>> {
    cs.iter()
        .map(|c| {
            let literals = c
                .literals
                .iter()
                .map(|l| {
                    blocks
                        .node_variable(l.node_type, l.node, l.state)
                        .map(|variable| Literal {
                            variable,
                            negated: l.negated,
                        })
                        .ok_or_else(|| {
                            Error::InvalidConstraint(format!(
                                "literal {l} does not name an existing node state"
                            ))
                        })
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(Factor::new(c.operator, literals))
        })
        .collect()
}

/// True iff `y` satisfies every constraint.
pub fn check(cs: &[NodeStateConstraint], y: &Labeling) -> bool {
    cs.iter().all(|c| c.is_satisfied(y))
}
