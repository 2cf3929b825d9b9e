use super::unroll::{unroll_with_loss, BlockIndex};
use super::{Labeling, TypedGraphInstance, Weights};
use crate::constraints::{self, NodeStateConstraint};
use crate::error::{Error, Result};
use crate::factor_graph::{solve_relaxed_from, AdmmSettings, FactorKind, SolveStatus, WarmStart};

/// Upper bound on search nodes visited while repairing a rounded labeling.
const REPAIR_BUDGET: usize = 1_000_000;

#[derive(Debug, Clone, PartialEq)]
pub struct Prediction {
    pub labeling: Labeling,
    pub status: SolveStatus,
    /// Dual bound reported by the solver.
    pub upper_bound: f64,
    pub iterations: usize,
    /// Whether the block-argmax rounding had to be repaired to satisfy the
    /// constraints.
    pub repaired: bool,
}

/// Per-node argmax over each node's indicator block; ties go to the lowest
/// label.
pub fn block_argmax(posteriors: &[f64], blocks: &BlockIndex) -> Labeling {
    let per_type = (0..blocks.num_types())
        .map(|t| {
            (0..blocks.num_nodes(t))
                .map(|v| argmax(&posteriors[blocks.node_range(t, v)]))
                .collect()
        })
        .collect();
    Labeling::new(per_type)
}

fn argmax(xs: &[f64]) -> usize {
    let mut best = 0;
    for (i, &x) in xs.iter().enumerate().skip(1) {
        if x > xs[best] {
            best = i;
        }
    }
    best
}

/// MAP labeling under optional constraints.
pub fn predict(
    g: &TypedGraphInstance,
    w: &Weights,
    settings: &AdmmSettings,
    constraints: &[NodeStateConstraint],
) -> Result<Labeling> {
    predict_detailed(g, w, settings, constraints).map(|p| p.labeling)
}

pub fn predict_detailed(
    g: &TypedGraphInstance,
    w: &Weights,
    settings: &AdmmSettings,
    constraints: &[NodeStateConstraint],
) -> Result<Prediction> {
    decode(g, w, None, settings, constraints, None).map(|(p, _)| p)
}

/// Margin-rescaled inference: maximizes `potential + hamming(y, gold)`.
pub fn loss_augmented_predict(
    g: &TypedGraphInstance,
    w: &Weights,
    gold: &Labeling,
    settings: &AdmmSettings,
) -> Result<Labeling> {
    decode(g, w, Some(gold), settings, &[], None).map(|(p, _)| p.labeling)
}

/// [`loss_augmented_predict`] seeded with the solver state of an earlier
/// call on the same instance; returns the new state for the next call.
pub fn loss_augmented_predict_warm(
    g: &TypedGraphInstance,
    w: &Weights,
    gold: &Labeling,
    settings: &AdmmSettings,
    warm: Option<&WarmStart>,
) -> Result<(Labeling, WarmStart)> {
    decode(g, w, Some(gold), settings, &[], warm).map(|(p, state)| (p.labeling, state))
}

fn decode(
    g: &TypedGraphInstance,
    w: &Weights,
    gold: Option<&Labeling>,
    settings: &AdmmSettings,
    cs: &[NodeStateConstraint],
    warm: Option<&WarmStart>,
) -> Result<(Prediction, WarmStart)> {
    let unrolled = unroll_with_loss(g, w, gold, cs)?;
    let (relaxed, state) = solve_relaxed_from(&unrolled.graph, settings, warm)?;
    let mut labeling = block_argmax(&relaxed.posteriors, &unrolled.blocks);
    let mut repaired = false;
    if !constraints::check(cs, &labeling) {
        labeling = repair(cs, &labeling, &relaxed.posteriors, &unrolled.blocks).map_err(|e| {
            if relaxed.converged {
                e
            } else {
                Error::Unsatisfiable(format!(
                    "{e}; solver stopped after {} iterations with primal residual {:.3e}",
                    relaxed.iterations, relaxed.primal_residual
                ))
            }
        })?;
        repaired = true;
    }
    let prediction = Prediction {
        labeling,
        status: relaxed.status(settings.residual_tolerance),
        upper_bound: relaxed.upper_bound,
        iterations: relaxed.iterations,
        repaired,
    };
    Ok((prediction, state))
}

/// Backtracking search over the nodes touched by constraints, trying labels
/// in decreasing posterior order; nodes outside every constraint keep their
/// rounded label.
fn repair(
    cs: &[NodeStateConstraint],
    rounded: &Labeling,
    posteriors: &[f64],
    blocks: &BlockIndex,
) -> Result<Labeling> {
    let mut involved: Vec<(usize, usize)> = Vec::new();
    let mut slot_of = std::collections::HashMap::new();
    let mut incident: Vec<Vec<usize>> = Vec::new();
    for (ci, c) in cs.iter().enumerate() {
        for l in c.literals() {
            let key = (l.node_type, l.node);
            let slot = *slot_of.entry(key).or_insert_with(|| {
                involved.push(key);
                incident.push(Vec::new());
                involved.len() - 1
            });
            if incident[slot].last() != Some(&ci) {
                incident[slot].push(ci);
            }
        }
    }

    let confidence = |&(t, v): &(usize, usize)| -> f64 {
        posteriors[blocks.node_range(t, v)]
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max)
    };
    let mut order: Vec<usize> = (0..involved.len()).collect();
    order.sort_by(|&a, &b| {
        confidence(&involved[b])
            .total_cmp(&confidence(&involved[a]))
            .then(involved[a].cmp(&involved[b]))
    });
    let candidates: Vec<Vec<usize>> = involved
        .iter()
        .map(|&(t, v)| {
            let block = &posteriors[blocks.node_range(t, v)];
            let mut labels: Vec<usize> = (0..block.len()).collect();
            labels.sort_by(|&a, &b| block[b].total_cmp(&block[a]).then(a.cmp(&b)));
            labels
        })
        .collect();

    let mut search = Search {
        cs,
        involved: &involved,
        incident: &incident,
        slot_of: &slot_of,
        assigned: vec![false; involved.len()],
        labeling: rounded.clone(),
        visited: 0,
    };
    match search.run(&order, &candidates, 0) {
        Some(true) => Ok(search.labeling),
        Some(false) => Err(Error::Unsatisfiable(
            "no labeling satisfies the constraints".into(),
        )),
        None => Err(Error::Unsatisfiable(format!(
            "no satisfying labeling found within {REPAIR_BUDGET} search steps"
        ))),
    }
}

struct Search<'a> {
    cs: &'a [NodeStateConstraint],
    involved: &'a [(usize, usize)],
    incident: &'a [Vec<usize>],
    slot_of: &'a std::collections::HashMap<(usize, usize), usize>,
    assigned: Vec<bool>,
    labeling: Labeling,
    visited: usize,
}

impl Search<'_> {
    /// `Some(true)` found, `Some(false)` exhausted, `None` out of budget.
    fn run(&mut self, order: &[usize], candidates: &[Vec<usize>], depth: usize) -> Option<bool> {
        if depth == order.len() {
            return Some(true);
        }
        let slot = order[depth];
        let (t, v) = self.involved[slot];
        self.assigned[slot] = true;
        for &label in &candidates[slot] {
            self.visited += 1;
            if self.visited > REPAIR_BUDGET {
                return None;
            }
            self.labeling.labels_mut(t)[v] = label;
            let consistent = self.incident[slot]
                .iter()
                .all(|&ci| !self.surely_violated(&self.cs[ci]));
            if consistent {
                match self.run(order, candidates, depth + 1) {
                    Some(false) => {}
                    done => return done,
                }
            }
        }
        self.assigned[slot] = false;
        Some(false)
    }

    fn surely_violated(&self, c: &NodeStateConstraint) -> bool {
        let mut ones = 0;
        let mut open = 0;
        let mut values = Vec::with_capacity(c.literals().len());
        for l in c.literals() {
            let slot = self.slot_of[&(l.node_type, l.node)];
            if !self.assigned[slot] {
                open += 1;
                values.push(None);
                continue;
            }
            let value = l.value(&self.labeling).unwrap_or(false);
            ones += usize::from(value);
            values.push(Some(value));
        }
        match c.operator() {
            FactorKind::Xor => ones > 1 || (ones == 0 && open == 0),
            FactorKind::AtMostOne => ones > 1,
            FactorKind::Or => ones == 0 && open == 0,
            FactorKind::Imply => values[0] == Some(true) && values[1] == Some(false),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::crf_model::{Matrix, TypeSchema};

    fn independent_nodes(scores: &[[f64; 2]]) -> (TypedGraphInstance, Weights) {
        // identity features so that theta rows are the scores
        let n = scores.len();
        let schema = TypeSchema::single(2, n, 0).unwrap();
        let mut feats = Matrix::zeros(n, n);
        for v in 0..n {
            feats.row_mut(v)[v] = 1.0;
        }
        let g = TypedGraphInstance::new(schema.clone(), vec![feats], vec![vec![]], vec![Matrix::zeros(0, 0)])
            .unwrap();
        let mut w = Weights::zeros(&schema);
        for (v, s) in scores.iter().enumerate() {
            w.unary_mut(0, 0)[v] = s[0];
            w.unary_mut(0, 1)[v] = s[1];
        }
        (g, w)
    }

    #[test]
    fn unconstrained_single_node() {
        let (g, w) = independent_nodes(&[[5.0, 1.0]]);
        let y = predict(&g, &w, &AdmmSettings::default(), &[]).unwrap();
        assert_eq!(y.labels(0), &[0]);
    }

    #[test]
    fn at_most_one_limits_state() {
        let (g, w) = independent_nodes(&[[0.0, 1.0], [0.0, 2.0], [0.0, 1.5]]);
        let c = vec![NodeStateConstraint::at_most_one(0, 0..3, 1)];
        let p = predict_detailed(&g, &w, &AdmmSettings::default(), &c).unwrap();
        assert_eq!(p.labeling.labels(0), &[0, 1, 0]);
        assert!(constraints::check(&c, &p.labeling));
    }

    #[test]
    fn infeasible_constraints() {
        let (g, w) = independent_nodes(&[[0.0, 1.0]]);
        let c = vec![
            NodeStateConstraint::new(FactorKind::Xor, vec![constraints::StateLiteral::new(0, 0, 1)]).unwrap(),
            NodeStateConstraint::new(FactorKind::Xor, vec![constraints::StateLiteral::new(0, 0, 0)]).unwrap(),
        ];
        let err = predict(&g, &w, &AdmmSettings::default(), &c).unwrap_err();
        assert!(matches!(err, Error::Unsatisfiable(_)), "{err:?}");
    }

    #[test]
    fn out_of_range_constraint() {
        let (g, w) = independent_nodes(&[[0.0, 1.0]]);
        let c = vec![NodeStateConstraint::at_most_one(0, [0], 2)];
        assert!(matches!(
            predict(&g, &w, &AdmmSettings::default(), &c),
            Err(Error::InvalidConstraint(_))
        ));
    }

    #[test]
    fn zero_weights_loss_augmented_differs_from_gold() {
        let (g, _) = independent_nodes(&[[0.0, 0.0], [0.0, 0.0]]);
        let w = Weights::zeros(g.schema());
        let gold = Labeling::new(vec![vec![0, 1]]);
        let y = loss_augmented_predict(&g, &w, &gold, &AdmmSettings::default()).unwrap();
        assert_eq!(y.labels(0), &[1, 0]);
    }
}
