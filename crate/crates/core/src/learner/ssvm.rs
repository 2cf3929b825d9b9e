//! Margin-rescaled structured SVM trained by stochastic subgradient descent.
//!
//! Minimizes `0.5 * |w|^2 + C * sum_n max_y [g(x_n, y) + hamming(y, y_n) - g(x_n, y_n)]`.
//! Each step takes the subgradient of one sample's share of that objective,
//! `w / N + C * (phi(x, y_hat) - phi(x, y_n))`, where `y_hat` comes from
//! loss-augmented inference.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::crf_model::{
    joint_feature, loss_augmented_predict, loss_augmented_predict_warm, potential, Labeling, TypeSchema, TypedGraphInstance,
    Weights,
};
use crate::error::{Error, Result};
use crate::factor_graph::{AdmmSettings, WarmStart};

use super::hamming;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SsvmSettings {
    /// Trade-off between the regularizer and the summed hinge losses.
    pub c: f64,
    pub epochs: usize,
    /// Learning rate of the first epoch; epoch `e` uses `step_size / (1 + e)`.
    pub step_size: f64,
    pub averaging: bool,
    pub seed: u64,
    /// Threads used for loss-augmented inference.
    pub workers: usize,
    /// Samples whose inference shares one weight snapshot. Updates are still
    /// applied one sample at a time, in a fixed order.
    pub batch_size: usize,
    /// Seed each sample's inference with its solver state from the previous
    /// epoch.
    pub warm_start: bool,
    /// Diagonal AdaGrad preconditioning: each coordinate's step is divided
    /// by the root of its accumulated squared subgradients, and the epoch
    /// decay is dropped. Suits feature blocks of very different scales.
    pub adaptive: bool,
}

impl Default for SsvmSettings {
    fn default() -> Self {
        SsvmSettings {
            c: 1.0,
            epochs: 30,
            step_size: 0.1,
            averaging: true,
            seed: 0,
            workers: 1,
            batch_size: 1,
            warm_start: true,
            adaptive: false,
        }
    }
}

impl SsvmSettings {
    pub fn validate(&self) -> Result<()> {
        if !(self.c >= 0.0) {
            return Err(Error::InvalidArgument(format!("C must be non-negative, got {}", self.c)));
        }
        if self.epochs == 0 {
            return Err(Error::InvalidArgument("epochs must be >= 1".into()));
        }
        if !(self.step_size > 0.0) {
            return Err(Error::InvalidArgument("step size must be positive".into()));
        }
        if self.workers == 0 || self.batch_size == 0 {
            return Err(Error::InvalidArgument("workers and batch size must be >= 1".into()));
        }
        Ok(())
    }
}

pub type Sample = (TypedGraphInstance, Labeling);

/// Trains a structured SVM and returns the (averaged) weights.
pub fn train_ssvm(
    data: &[Sample],
    schema: &TypeSchema,
    s: &SsvmSettings,
    inf: &AdmmSettings,
) -> Result<Weights> {
    train_ssvm_with(data, schema, s, inf, |_, _| Ok(()))
}

/// Same as [`train_ssvm`], calling `on_epoch(epoch, weights)` after every
/// epoch with the weights that would be returned if training stopped there.
pub fn train_ssvm_with<F>(
    data: &[Sample],
    schema: &TypeSchema,
    s: &SsvmSettings,
    inf: &AdmmSettings,
    mut on_epoch: F,
) -> Result<Weights>
where
    F: FnMut(usize, &Weights) -> Result<()>,
{
    s.validate()?;
    inf.validate()?;
    if data.is_empty() {
        return Err(Error::InvalidArgument("no training samples".into()));
    }
    for (i, (g, y)) in data.iter().enumerate() {
        if g.schema() != schema {
            return Err(Error::Dimension(format!("sample {i} does not follow the schema")));
        }
        g.check_labeling(y)?;
    }

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(s.workers)
        .build()
        .map_err(|e| Error::InvalidArgument(format!("thread pool: {e}")))?;

    let gold_features: Vec<Vec<f64>> = data
        .iter()
        .map(|(g, y)| joint_feature(g, y))
        .collect::<Result<_>>()?;

    let dim = schema.weight_len();
    let n = data.len() as f64;
    let mut w = vec![0.0f64; dim];
    let mut avg = vec![0.0f64; dim];
    let mut sq_sum = vec![0.0f64; if s.adaptive { dim } else { 0 }];
    let mut steps = 0usize;
    let mut rng = ChaCha8Rng::seed_from_u64(s.seed);
    let mut order: Vec<usize> = (0..data.len()).collect();
    let mut states: Vec<Option<WarmStart>> = vec![None; data.len()];

    for epoch in 0..s.epochs {
        order.shuffle(&mut rng);
        let rate = s.step_size / (1.0 + epoch as f64);
        for batch in order.chunks(s.batch_size) {
            let snapshot = Weights::unflatten(schema, &w)?;
            let predictions: Vec<Result<(Labeling, WarmStart)>> = pool.install(|| {
                batch
                    .par_iter()
                    .map(|&i| {
                        let warm = if s.warm_start { states[i].as_ref() } else { None };
                        loss_augmented_predict_warm(&data[i].0, &snapshot, &data[i].1, inf, warm)
                    })
                    .collect()
            });
            for (&i, outcome) in batch.iter().zip(predictions) {
                let (y_hat, state) = outcome?;
                if s.warm_start {
                    states[i] = Some(state);
                }
                let violated = s.c > 0.0 && y_hat != data[i].1;
                let phi_hat = if violated { Some(joint_feature(&data[i].0, &y_hat)?) } else { None };
                if s.adaptive {
                    for k in 0..dim {
                        let mut grad = w[k] / n;
                        if let Some(phi) = &phi_hat {
                            grad += s.c * (phi[k] - gold_features[i][k]);
                        }
                        if grad != 0.0 {
                            sq_sum[k] += grad * grad;
                            w[k] -= s.step_size * grad / sq_sum[k].sqrt();
                        }
                    }
                } else {
                    let shrink = 1.0 - rate / n;
                    w.iter_mut().for_each(|x| *x *= shrink);
                    if let Some(phi) = &phi_hat {
                        for ((x, a), b) in w.iter_mut().zip(phi).zip(&gold_features[i]) {
                            *x -= rate * s.c * (a - b);
                        }
                    }
                }
                steps += 1;
                let k = 1.0 / steps as f64;
                for (a, x) in avg.iter_mut().zip(&w) {
                    *a += (x - *a) * k;
                }
            }
        }
        let current = Weights::unflatten(schema, if s.averaging { &avg } else { &w })?;
        on_epoch(epoch, &current)?;
    }
    Weights::unflatten(schema, if s.averaging { &avg } else { &w })
}

/// Regularized hinge objective with loss-augmented inference by ADMM.
pub fn ssvm_objective(data: &[Sample], w: &Weights, c: f64, inf: &AdmmSettings) -> Result<f64> {
    let reg = 0.5 * w.flatten().iter().map(|x| x * x).sum::<f64>();
    let mut hinge = 0.0;
    for (g, y) in data {
        let y_hat = loss_augmented_predict(g, w, y, inf)?;
        let slack = potential(g, &y_hat, w)? + hamming(&y_hat, y)? as f64 - potential(g, y, w)?;
        hinge += slack.max(0.0);
    }
    Ok(reg + c * hinge)
}
