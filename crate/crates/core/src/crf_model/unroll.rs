//! Reduction of a typed CRF to a binary pairwise factor graph.
//!
//! Node `v` of type `t` becomes `l_t` indicator variables `U[v,i]` tied by one
//! XOR factor. Edge `(v, w)` becomes `l_t * l_t'` indicators `U[v,w,i,j]`; for
//! every `i` an XOR over `{U[v,w,i,j]}_j` and `not U[v,i]` makes the row sum
//! equal `U[v,i]`, and symmetrically for every `j` over the columns.

use super::{check_schema, Labeling, TypedGraphInstance, Weights};
use crate::constraints::{self, NodeStateConstraint};
use crate::error::{Error, Result};
use crate::factor_graph::{Factor, FactorGraph, FactorKind, Literal};

/// Where the indicator variables of each node and edge live.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlockIndex {
    labels: Vec<usize>,
    node_counts: Vec<usize>,
    /// First variable of the first node of each type.
    type_offsets: Vec<usize>,
    /// First variable of the first edge of each ordered type pair.
    pair_offsets: Vec<usize>,
    edge_counts: Vec<usize>,
    num_variables: usize,
}

impl BlockIndex {
    pub fn new(g: &TypedGraphInstance) -> Self {
        let schema = g.schema();
        let k = schema.num_types();
        let labels = schema.all_labels().to_vec();
        let node_counts: Vec<usize> = (0..k).map(|t| g.num_nodes(t)).collect();
        let mut offset = 0;
        let mut type_offsets = Vec::with_capacity(k);
        for t in 0..k {
            type_offsets.push(offset);
            offset += node_counts[t] * labels[t];
        }
        let mut pair_offsets = Vec::with_capacity(k * k);
        let mut edge_counts = Vec::with_capacity(k * k);
        for (t, u) in schema.type_pairs() {
            pair_offsets.push(offset);
            let n = g.edges(t, u).len();
            edge_counts.push(n);
            offset += n * labels[t] * labels[u];
        }
        BlockIndex {
            labels,
            node_counts,
            type_offsets,
            pair_offsets,
            edge_counts,
            num_variables: offset,
        }
    }

    pub fn num_types(&self) -> usize {
        self.labels.len()
    }

    pub fn num_nodes(&self, t: usize) -> usize {
        self.node_counts[t]
    }

    pub fn labels(&self, t: usize) -> usize {
        self.labels[t]
    }

    pub fn num_variables(&self) -> usize {
        self.num_variables
    }

    /// Variable ids `U[v, 0..l_t]` of node `v` of type `t`.
    pub fn node_range(&self, t: usize, v: usize) -> std::ops::Range<usize> {
        let start = self.type_offsets[t] + v * self.labels[t];
        start..start + self.labels[t]
    }

    /// Variable id of `U[v, state]`, if the triple exists.
    pub fn node_variable(&self, t: usize, v: usize, state: usize) -> Option<usize> {
        if t >= self.num_types() || v >= self.node_counts[t] || state >= self.labels[t] {
            return None;
        }
        Some(self.type_offsets[t] + v * self.labels[t] + state)
    }

    /// Variable id of `U[v,w,i,j]` for edge `e` of pair `(t, u)`.
    pub fn edge_variable(&self, t: usize, u: usize, e: usize, i: usize, j: usize) -> usize {
        let k = self.num_types();
        let (lt, lu) = (self.labels[t], self.labels[u]);
        self.pair_offsets[t * k + u] + e * lt * lu + i * lu + j
    }

    pub fn num_edges(&self, t: usize, u: usize) -> usize {
        self.edge_counts[t * self.num_types() + u]
    }

    /// 0/1 assignment induced by a labeling (nodes and edges).
    pub fn indicator(&self, g: &TypedGraphInstance, y: &Labeling) -> Vec<u8> {
        let mut x = vec![0u8; self.num_variables];
        for t in 0..self.num_types() {
            for (v, &label) in y.labels(t).iter().enumerate() {
                x[self.node_range(t, v).start + label] = 1;
            }
        }
        for (t, u) in g.schema().type_pairs() {
            for (e, &(a, b)) in g.edges(t, u).iter().enumerate() {
                x[self.edge_variable(t, u, e, y.get(t, a), y.get(u, b))] = 1;
            }
        }
        x
    }
}

/// A binarized graph together with its block index.
#[derive(Debug, Clone)]
pub struct Unrolled {
    pub graph: FactorGraph,
    pub blocks: BlockIndex,
}

/// Builds the binary factor graph of `g` under `w`, with the compiled
/// constraints appended after the structural factors.
pub fn unroll(
    g: &TypedGraphInstance,
    w: &Weights,
    constraints: &[NodeStateConstraint],
) -> Result<Unrolled> {
    unroll_with_loss(g, w, None, constraints)
}

/// Like [`unroll`], and when `gold` is given every `U[v,i]` with `i` different
/// from the gold label of `v` gets one extra unit of potential.
pub fn unroll_with_loss(
    g: &TypedGraphInstance,
    w: &Weights,
    gold: Option<&Labeling>,
    constraints: &[NodeStateConstraint],
) -> Result<Unrolled> {
    check_schema(g, w)?;
    if let Some(y) = gold {
        g.check_labeling(y)?;
    }
    let schema = g.schema();
    let blocks = BlockIndex::new(g);
    let mut potentials = vec![0.0; blocks.num_variables()];

    for t in 0..schema.num_types() {
        let feats = g.node_features(t);
        let lt = schema.labels(t);
        for v in 0..g.num_nodes(t) {
            let (idx, vals) = sparse(feats.row(v));
            let base = blocks.node_range(t, v).start;
            for i in 0..lt {
                let wi = w.unary(t, i);
                let mut score = sparse_dot(wi, &idx, &vals);
                if let Some(y) = gold {
                    if y.get(t, v) != i {
                        score += 1.0;
                    }
                }
                potentials[base + i] = score;
            }
        }
    }
    for (t, u) in schema.type_pairs() {
        let feats = g.edge_features(t, u);
        let (lt, lu) = (schema.labels(t), schema.labels(u));
        for e in 0..g.edges(t, u).len() {
            let (idx, vals) = sparse(feats.row(e));
            for i in 0..lt {
                for j in 0..lu {
                    potentials[blocks.edge_variable(t, u, e, i, j)] =
                        sparse_dot(w.pairwise(t, u, i, j), &idx, &vals);
                }
            }
        }
    }

    let mut graph = FactorGraph::with_potentials(&potentials);
    for t in 0..schema.num_types() {
        for v in 0..g.num_nodes(t) {
            graph.add_factor(Factor::new(
                FactorKind::Xor,
                blocks.node_range(t, v).map(Literal::positive).collect(),
            ))?;
        }
    }
    for (t, u) in schema.type_pairs() {
        let (lt, lu) = (schema.labels(t), schema.labels(u));
        for (e, &(a, b)) in g.edges(t, u).iter().enumerate() {
            let src = blocks.node_range(t, a).start;
            let dst = blocks.node_range(u, b).start;
            for i in 0..lt {
                let mut lits: Vec<Literal> = (0..lu)
                    .map(|j| Literal::positive(blocks.edge_variable(t, u, e, i, j)))
                    .collect();
                lits.push(Literal::negative(src + i));
                graph.add_factor(Factor::new(FactorKind::Xor, lits))?;
            }
            for j in 0..lu {
                let mut lits: Vec<Literal> = (0..lt)
                    .map(|i| Literal::positive(blocks.edge_variable(t, u, e, i, j)))
                    .collect();
                lits.push(Literal::negative(dst + j));
                graph.add_factor(Factor::new(FactorKind::Xor, lits))?;
            }
        }
    }
    for factor in constraints::compile(constraints, &blocks)? {
        graph.add_factor(factor).map_err(|e| match e {
            Error::InvalidFactor(m) => Error::InvalidConstraint(m),
            other => other,
        })?;
    }
    Ok(Unrolled { graph, blocks })
}

fn sparse(row: &[f64]) -> (Vec<usize>, Vec<f64>) {
    let mut idx = Vec::new();
    let mut vals = Vec::new();
    for (i, &x) in row.iter().enumerate() {
        if x != 0.0 {
            idx.push(i);
            vals.push(x);
        }
    }
    (idx, vals)
}

#[inline]
fn sparse_dot(w: &[f64], idx: &[usize], vals: &[f64]) -> f64 {
    idx.iter().zip(vals).map(|(&i, &x)| w[i] * x).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::crf_model::{Matrix, TypeSchema};

    #[test]
    fn single_node_counts() {
        let schema = TypeSchema::single(3, 1, 0).unwrap();
        let g = TypedGraphInstance::new(
            schema.clone(),
            vec![Matrix::zeros(1, 1)],
            vec![vec![]],
            vec![Matrix::zeros(0, 0)],
        )
        .unwrap();
        let u = unroll(&g, &Weights::zeros(&schema), &[]).unwrap();
        assert_eq!(u.graph.num_variables(), 3);
        assert_eq!(u.graph.num_factors(), 1);
    }

    #[test]
    fn one_edge_counts() {
        let schema = TypeSchema::single(2, 1, 1).unwrap();
        let g = TypedGraphInstance::new(
            schema.clone(),
            vec![Matrix::zeros(2, 1)],
            vec![vec![(0, 1)]],
            vec![Matrix::zeros(1, 1)],
        )
        .unwrap();
        let u = unroll(&g, &Weights::zeros(&schema), &[]).unwrap();
        assert_eq!(u.graph.num_variables(), 4 + 4);
        assert_eq!(u.graph.num_factors(), 2 + 4);
        // the indicator of any labeling satisfies every structural factor
        for y in [[0, 0], [0, 1], [1, 0], [1, 1]] {
            let lab = Labeling::new(vec![y.to_vec()]);
            assert!(u.graph.is_feasible(&u.blocks.indicator(&g, &lab)));
        }
    }

    #[test]
    fn block_lookup() {
        let schema = TypeSchema::single(3, 1, 0).unwrap();
        let g = TypedGraphInstance::new(
            schema,
            vec![Matrix::zeros(2, 1)],
            vec![vec![]],
            vec![Matrix::zeros(0, 0)],
        )
        .unwrap();
        let b = BlockIndex::new(&g);
        assert_eq!(b.node_variable(0, 1, 2), Some(5));
        assert_eq!(b.node_variable(0, 2, 0), None);
        assert_eq!(b.node_variable(0, 0, 3), None);
        assert_eq!(b.node_variable(1, 0, 0), None);
    }
}
