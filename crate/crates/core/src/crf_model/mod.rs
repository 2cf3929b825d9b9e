//! Multi-type CRFs with linear potentials.
//!
//! A graph has `k` node types. Type `t` has `l_t` labels and node features of
//! width `d_t`; each ordered type pair `(t, t')` has edge features of width
//! `d_{t,t'}` (zero when the pair carries no edges). The score of a labeling
//! is the sum of unary terms `theta^t[y_v] . phi(v)` over nodes and pairwise
//! terms `vartheta^{t,t'}[y_v, y_w] . phi(v, w)` over edges.

mod io;
mod predict;
mod unroll;

use crate::error::{Error, Result};

pub use io::{read_weights, write_weights};
pub use predict::{
    block_argmax, loss_augmented_predict, loss_augmented_predict_warm, predict, predict_detailed, Prediction,
};
pub use unroll::{unroll, unroll_with_loss, BlockIndex, Unrolled};

/// Row-major dense matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::Dimension(format!(
                "{} values for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        Ok(Matrix { rows, cols, data })
    }

    pub fn from_rows(cols: usize, rows: &[Vec<f64>]) -> Result<Self> {
        let mut data = Vec::with_capacity(rows.len() * cols);
        for (i, r) in rows.iter().enumerate() {
            if r.len() != cols {
                return Err(Error::Dimension(format!(
                    "row {i} has {} values, expected {cols}",
                    r.len()
                )));
            }
            data.extend_from_slice(r);
        }
        Ok(Matrix {
            rows: rows.len(),
            cols,
            data,
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }
}

#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Label counts and feature widths of a k-type graph.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TypeSchema {
    labels: Vec<usize>,
    node_dims: Vec<usize>,
    /// `k * k`, ordered pair `(t, t')` at `t * k + t'`.
    edge_dims: Vec<usize>,
}

impl TypeSchema {
    pub fn new(labels: Vec<usize>, node_dims: Vec<usize>, edge_dims: Vec<usize>) -> Result<Self> {
        let k = labels.len();
        if k == 0 {
            return Err(Error::InvalidArgument("a schema needs at least one type".into()));
        }
        if node_dims.len() != k {
            return Err(Error::Dimension(format!(
                "{} node widths for {k} types",
                node_dims.len()
            )));
        }
        if edge_dims.len() != k * k {
            return Err(Error::Dimension(format!(
                "{} edge widths for {k} types (expected {})",
                edge_dims.len(),
                k * k
            )));
        }
        if let Some(t) = labels.iter().position(|&l| l == 0) {
            return Err(Error::InvalidArgument(format!("type {t} has no labels")));
        }
        if let Some(t) = node_dims.iter().position(|&d| d == 0) {
            return Err(Error::InvalidArgument(format!("type {t} has zero node features")));
        }
        Ok(TypeSchema {
            labels,
            node_dims,
            edge_dims,
        })
    }

    /// Single-type schema.
    pub fn single(labels: usize, node_dim: usize, edge_dim: usize) -> Result<Self> {
        Self::new(vec![labels], vec![node_dim], vec![edge_dim])
    }

    pub fn num_types(&self) -> usize {
        self.labels.len()
    }

    pub fn labels(&self, t: usize) -> usize {
        self.labels[t]
    }

    pub fn all_labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn node_dim(&self, t: usize) -> usize {
        self.node_dims[t]
    }

    pub fn node_dims(&self) -> &[usize] {
        &self.node_dims
    }

    pub fn edge_dim(&self, t: usize, u: usize) -> usize {
        self.edge_dims[t * self.num_types() + u]
    }

    pub fn edge_dims(&self) -> &[usize] {
        &self.edge_dims
    }

    /// Ordered type pairs in lexicographic order.
    pub fn type_pairs(&self) -> impl Iterator<Item = (usize, usize)> {
        let k = self.num_types();
        (0..k).flat_map(move |t| (0..k).map(move |u| (t, u)))
    }

    fn unary_len(&self, t: usize) -> usize {
        self.labels[t] * self.node_dims[t]
    }

    fn pair_len(&self, t: usize, u: usize) -> usize {
        self.labels[t] * self.labels[u] * self.edge_dim(t, u)
    }

    /// Length of the flattened weight vector.
    pub fn weight_len(&self) -> usize {
        (0..self.num_types()).map(|t| self.unary_len(t)).sum::<usize>()
            + self
                .type_pairs()
                .map(|(t, u)| self.pair_len(t, u))
                .sum::<usize>()
    }

    /// `k * sum(l) + (sum l)^2`: label blocks of one concatenated model.
    pub fn param_count_naive(&self) -> usize {
        let total: usize = self.labels.iter().sum();
        self.num_types() * total + total * total
    }

    /// Label blocks (or, with feature widths, parameters) of the typed model.
    ///
    /// Without feature widths every ordered pair is counted; with them, only
    /// pairs that carry edge features contribute.
    pub fn param_count_typed(&self, with_feature_dims: bool) -> usize {
        if with_feature_dims {
            self.weight_len()
        } else {
            let unary: usize = self.labels.iter().sum();
            let pairwise: usize = self
                .type_pairs()
                .map(|(t, u)| self.labels[t] * self.labels[u])
                .sum();
            unary + pairwise
        }
    }
}

/// A k-type graph with node and edge features.
#[derive(Debug, Clone, PartialEq)]
pub struct TypedGraphInstance {
    schema: TypeSchema,
    node_features: Vec<Matrix>,
    edges: Vec<Vec<(usize, usize)>>,
    edge_features: Vec<Matrix>,
}

impl TypedGraphInstance {
    /// `edges` and `edge_features` are indexed like the schema's ordered
    /// pairs (`t * k + t'`).
    pub fn new(
        schema: TypeSchema,
        node_features: Vec<Matrix>,
        edges: Vec<Vec<(usize, usize)>>,
        edge_features: Vec<Matrix>,
    ) -> Result<Self> {
        let k = schema.num_types();
        if node_features.len() != k {
            return Err(Error::Dimension(format!(
                "{} node feature matrices for {k} types",
                node_features.len()
            )));
        }
        if edges.len() != k * k || edge_features.len() != k * k {
            return Err(Error::Dimension(format!(
                "edge lists and edge features must have {} entries",
                k * k
            )));
        }
        for (t, m) in node_features.iter().enumerate() {
            if m.cols() != schema.node_dim(t) {
                return Err(Error::Dimension(format!(
                    "type {t} node features have width {}, schema says {}",
                    m.cols(),
                    schema.node_dim(t)
                )));
            }
        }
        for (t, u) in schema.type_pairs() {
            let p = t * k + u;
            let list = &edges[p];
            let feats = &edge_features[p];
            if schema.edge_dim(t, u) == 0 && !list.is_empty() {
                return Err(Error::Dimension(format!(
                    "type pair ({t},{u}) has no edge features but {} edges",
                    list.len()
                )));
            }
            if feats.rows() != list.len() || (feats.rows() > 0 && feats.cols() != schema.edge_dim(t, u)) {
                return Err(Error::Dimension(format!(
                    "type pair ({t},{u}): {}x{} edge features for {} edges of width {}",
                    feats.rows(),
                    feats.cols(),
                    list.len(),
                    schema.edge_dim(t, u)
                )));
            }
            let (nt, nu) = (node_features[t].rows(), node_features[u].rows());
            if let Some(&(a, b)) = list.iter().find(|&&(a, b)| a >= nt || b >= nu) {
                return Err(Error::Dimension(format!(
                    "edge ({a},{b}) of pair ({t},{u}) is out of range ({nt}, {nu} nodes)"
                )));
            }
        }
        Ok(TypedGraphInstance {
            schema,
            node_features,
            edges,
            edge_features,
        })
    }

    pub fn schema(&self) -> &TypeSchema {
        &self.schema
    }

    pub fn num_nodes(&self, t: usize) -> usize {
        self.node_features[t].rows()
    }

    pub fn total_nodes(&self) -> usize {
        self.node_features.iter().map(Matrix::rows).sum()
    }

    pub fn node_features(&self, t: usize) -> &Matrix {
        &self.node_features[t]
    }

    pub fn edges(&self, t: usize, u: usize) -> &[(usize, usize)] {
        &self.edges[t * self.schema.num_types() + u]
    }

    pub fn edge_features(&self, t: usize, u: usize) -> &Matrix {
        &self.edge_features[t * self.schema.num_types() + u]
    }

    pub fn num_edges(&self) -> usize {
        self.edges.iter().map(Vec::len).sum()
    }

    /// Labeling that gives every node label 0.
    pub fn zero_labeling(&self) -> Labeling {
        Labeling::new(
            (0..self.schema.num_types())
                .map(|t| vec![0; self.num_nodes(t)])
                .collect(),
        )
    }

    /// Checks that `y` has one in-range label per node.
    pub fn check_labeling(&self, y: &Labeling) -> Result<()> {
        if y.num_types() != self.schema.num_types() {
            return Err(Error::Dimension(format!(
                "labeling has {} types, graph has {}",
                y.num_types(),
                self.schema.num_types()
            )));
        }
        for t in 0..y.num_types() {
            let labels = y.labels(t);
            if labels.len() != self.num_nodes(t) {
                return Err(Error::Dimension(format!(
                    "type {t}: {} labels for {} nodes",
                    labels.len(),
                    self.num_nodes(t)
                )));
            }
            if let Some(&bad) = labels.iter().find(|&&l| l >= self.schema.labels(t)) {
                return Err(Error::Dimension(format!(
                    "type {t}: label {bad} out of range (l = {})",
                    self.schema.labels(t)
                )));
            }
        }
        Ok(())
    }
}

/// One label per node, grouped by type. Labels are 0-based.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Labeling {
    per_type: Vec<Vec<usize>>,
}

impl Labeling {
    pub fn new(per_type: Vec<Vec<usize>>) -> Self {
        Labeling { per_type }
    }

    pub fn num_types(&self) -> usize {
        self.per_type.len()
    }

    pub fn labels(&self, t: usize) -> &[usize] {
        &self.per_type[t]
    }

    pub fn labels_mut(&mut self, t: usize) -> &mut Vec<usize> {
        &mut self.per_type[t]
    }

    pub fn get(&self, t: usize, v: usize) -> usize {
        self.per_type[t][v]
    }

    pub fn len(&self) -> usize {
        self.per_type.iter().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn into_inner(self) -> Vec<Vec<usize>> {
        self.per_type
    }
}

/// Unary and pairwise weight blocks.
#[derive(Debug, Clone, PartialEq)]
pub struct Weights {
    schema: TypeSchema,
    /// Per type, `l_t x d_t` row-major.
    unary: Vec<Vec<f64>>,
    /// Per ordered pair, `l_t x l_t' x d_{t,t'}` label-pair-major.
    pairwise: Vec<Vec<f64>>,
}

impl Weights {
    pub fn zeros(schema: &TypeSchema) -> Self {
        let unary = (0..schema.num_types())
            .map(|t| vec![0.0; schema.unary_len(t)])
            .collect();
        let pairwise = schema
            .type_pairs()
            .map(|(t, u)| vec![0.0; schema.pair_len(t, u)])
            .collect();
        Weights {
            schema: schema.clone(),
            unary,
            pairwise,
        }
    }

    pub fn schema(&self) -> &TypeSchema {
        &self.schema
    }

    /// `theta^t[label]`.
    pub fn unary(&self, t: usize, label: usize) -> &[f64] {
        let d = self.schema.node_dim(t);
        &self.unary[t][label * d..(label + 1) * d]
    }

    pub fn unary_mut(&mut self, t: usize, label: usize) -> &mut [f64] {
        let d = self.schema.node_dim(t);
        &mut self.unary[t][label * d..(label + 1) * d]
    }

    /// `vartheta^{t,u}[i, j]`.
    pub fn pairwise(&self, t: usize, u: usize, i: usize, j: usize) -> &[f64] {
        let d = self.schema.edge_dim(t, u);
        let lu = self.schema.labels(u);
        let start = (i * lu + j) * d;
        &self.pairwise[t * self.schema.num_types() + u][start..start + d]
    }

    pub fn pairwise_mut(&mut self, t: usize, u: usize, i: usize, j: usize) -> &mut [f64] {
        let d = self.schema.edge_dim(t, u);
        let lu = self.schema.labels(u);
        let start = (i * lu + j) * d;
        let k = self.schema.num_types();
        &mut self.pairwise[t * k + u][start..start + d]
    }

    /// Unary blocks in type order, then pairwise blocks in `(t, t')` order.
    pub fn flatten(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.schema.weight_len());
        for block in self.unary.iter().chain(&self.pairwise) {
            out.extend_from_slice(block);
        }
        out
    }

    pub fn unflatten(schema: &TypeSchema, flat: &[f64]) -> Result<Self> {
        if flat.len() != schema.weight_len() {
            return Err(Error::Dimension(format!(
                "{} weights for a schema of {} parameters",
                flat.len(),
                schema.weight_len()
            )));
        }
        let mut w = Weights::zeros(schema);
        let mut offset = 0;
        for block in w.unary.iter_mut().chain(w.pairwise.iter_mut()) {
            let n = block.len();
            block.copy_from_slice(&flat[offset..offset + n]);
            offset += n;
        }
        Ok(w)
    }
}

fn check_schema(g: &TypedGraphInstance, w: &Weights) -> Result<()> {
    if g.schema() != w.schema() {
        return Err(Error::Dimension(
            "graph and weights were built for different schemas".into(),
        ));
    }
    Ok(())
}

/// Score of labeling `y` on graph `g` under weights `w`.
pub fn potential(g: &TypedGraphInstance, y: &Labeling, w: &Weights) -> Result<f64> {
    check_schema(g, w)?;
    g.check_labeling(y)?;
    let schema = g.schema();
    let mut total = 0.0;
    for t in 0..schema.num_types() {
        let feats = g.node_features(t);
        for (v, &label) in y.labels(t).iter().enumerate() {
            total += dot(w.unary(t, label), feats.row(v));
        }
    }
    for (t, u) in schema.type_pairs() {
        let feats = g.edge_features(t, u);
        for (e, &(a, b)) in g.edges(t, u).iter().enumerate() {
            total += dot(w.pairwise(t, u, y.get(t, a), y.get(u, b)), feats.row(e));
        }
    }
    Ok(total)
}

/// Feature vector aggregated per (type, label) and (type pair, label pair),
/// laid out in the weight flattening order.
pub fn joint_feature(g: &TypedGraphInstance, y: &Labeling) -> Result<Vec<f64>> {
    g.check_labeling(y)?;
    let schema = g.schema();
    let mut acc = Weights::zeros(schema);
    for t in 0..schema.num_types() {
        let feats = g.node_features(t);
        for (v, &label) in y.labels(t).iter().enumerate() {
            add_assign(acc.unary_mut(t, label), feats.row(v));
        }
    }
    for (t, u) in schema.type_pairs() {
        let feats = g.edge_features(t, u);
        for (e, &(a, b)) in g.edges(t, u).iter().enumerate() {
            add_assign(acc.pairwise_mut(t, u, y.get(t, a), y.get(u, b)), feats.row(e));
        }
    }
    Ok(acc.flatten())
}

#[inline]
fn add_assign(dst: &mut [f64], src: &[f64]) {
    for (d, s) in dst.iter_mut().zip(src) {
        *d += s;
    }
}
