//! Structured SVM for the CRF models and a logistic-regression baseline.

mod logistic;
mod ssvm;

pub use logistic::{predict_logistic, train_logistic, LinearBinaryModel};
pub use ssvm::{ssvm_objective, train_ssvm, train_ssvm_with, Sample, SsvmSettings};

use crate::crf_model::Labeling;
use crate::error::{Error, Result};

/// Number of nodes, over all types, whose labels differ.
pub fn hamming(y: &Labeling, other: &Labeling) -> Result<usize> {
    if y.num_types() != other.num_types() {
        return Err(Error::Dimension(format!(
            "labelings have {} and {} types",
            y.num_types(),
            other.num_types()
        )));
    }
    let mut count = 0;
    for t in 0..y.num_types() {
        let (a, b) = (y.labels(t), other.labels(t));
        if a.len() != b.len() {
            return Err(Error::Dimension(format!(
                "type {t} has {} and {} nodes",
                a.len(),
                b.len()
            )));
        }
        count += a.iter().zip(b).filter(|(x, y)| x != y).count();
    }
    Ok(count)
}
