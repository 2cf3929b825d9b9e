use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

const BATCH: usize = 8;

#[derive(Debug, Clone, PartialEq)]
pub struct LinearBinaryModel {
    pub weights: Vec<f64>,
    pub bias: f64,
}

impl LinearBinaryModel {
    pub fn zeros(dim: usize) -> Self {
        LinearBinaryModel {
            weights: vec![0.0; dim],
            bias: 0.0,
        }
    }

    /// `w . x + b`.
    pub fn decision(&self, features: &[f64]) -> Result<f64> {
        if features.len() != self.weights.len() {
            return Err(Error::Dimension(format!(
                "{} features for a model of dimension {}",
                features.len(),
                self.weights.len()
            )));
        }
        Ok(self
            .weights
            .iter()
            .zip(features)
            .map(|(w, x)| w * x)
            .sum::<f64>()
            + self.bias)
    }
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// `(label, probability)` with label 1 iff the probability is at least 0.5.
pub fn predict_logistic(m: &LinearBinaryModel, features: &[f64]) -> Result<(u8, f64)> {
    let p = sigmoid(m.decision(features)?);
    Ok((u8::from(p >= 0.5), p))
}

/// Mini-batch gradient descent on the mean log-loss.
///
/// Features are standardized internally (per-column mean and deviation) and
/// the returned model is expressed on the raw features. Batches are drawn in
/// a seeded shuffle order.
pub fn train_logistic(
    features: &[Vec<f64>],
    labels: &[u8],
    epochs: usize,
    rate: f64,
    seed: u64,
) -> Result<LinearBinaryModel> {
    if features.len() != labels.len() {
        return Err(Error::Dimension(format!(
            "{} feature rows for {} labels",
            features.len(),
            labels.len()
        )));
    }
    if features.len() < 2 {
        return Err(Error::DegenerateData("need at least two samples".into()));
    }
    let positives = labels.iter().filter(|&&l| l == 1).count();
    if positives == 0 || positives == labels.len() {
        return Err(Error::DegenerateData("both classes must be present".into()));
    }
    if let Some(&bad) = labels.iter().find(|&&l| l > 1) {
        return Err(Error::InvalidArgument(format!("label {bad} is not binary")));
    }
    let dim = features[0].len();
    if features.iter().any(|f| f.len() != dim) {
        return Err(Error::Dimension("ragged feature matrix".into()));
    }

    let n = features.len() as f64;
    let mean: Vec<f64> = (0..dim)
        .map(|j| features.iter().map(|f| f[j]).sum::<f64>() / n)
        .collect();
    let scale: Vec<f64> = (0..dim)
        .map(|j| {
            let var = features.iter().map(|f| (f[j] - mean[j]).powi(2)).sum::<f64>() / n;
            if var > 0.0 {
                var.sqrt()
            } else {
                1.0
            }
        })
        .collect();
    let standardized: Vec<Vec<f64>> = features
        .iter()
        .map(|f| (0..dim).map(|j| (f[j] - mean[j]) / scale[j]).collect())
        .collect();

    let mut w = vec![0.0; dim];
    let mut b = 0.0;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut order: Vec<usize> = (0..features.len()).collect();
    for _ in 0..epochs {
        order.shuffle(&mut rng);
        for batch in order.chunks(BATCH) {
            let mut gw = vec![0.0; dim];
            let mut gb = 0.0;
            for &i in batch {
                let x = &standardized[i];
                let z: f64 = w.iter().zip(x).map(|(a, b)| a * b).sum::<f64>() + b;
                let err = sigmoid(z) - labels[i] as f64;
                for (g, xi) in gw.iter_mut().zip(x) {
                    *g += err * xi;
                }
                gb += err;
            }
            let m = batch.len() as f64;
            for (wj, g) in w.iter_mut().zip(&gw) {
                *wj -= rate * g / m;
            }
            b -= rate * gb / m;
        }
    }

    // back to raw features: w'x' + b with x' = (x - mean) / scale
    let weights: Vec<f64> = (0..dim).map(|j| w[j] / scale[j]).collect();
    let bias = b - (0..dim).map(|j| w[j] * mean[j] / scale[j]).sum::<f64>();
    Ok(LinearBinaryModel { weights, bias })
}
