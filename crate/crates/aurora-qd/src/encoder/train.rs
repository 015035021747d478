//! Loss functions, gradient descent training and the encoder update
//! schedule.

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::mine::Triplet;
use super::EncoderModel;
use crate::error::{Error, Result};
use crate::types::{euclidean_distance_unchecked, StateTrajectory};

/// Which loss the encoder trains with.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Objective {
    #[default]
    Mse,
    Triplet,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub batch_size: usize,
    pub max_epochs: usize,
    pub early_stop_delta: f64,
    pub early_stop_patience: usize,
    pub base_interval: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            learning_rate: 1e-2,
            batch_size: 128,
            max_epochs: 200,
            early_stop_delta: 5e-4,
            early_stop_patience: 10,
            base_interval: 10,
        }
    }
}

/// Training data with its objective already bound.
#[derive(Debug, Clone)]
pub enum TrainData {
    Reconstruction(Vec<StateTrajectory>),
    Contrastive { triplets: Vec<Triplet>, margin: f64 },
}

impl TrainData {
    fn len(&self) -> usize {
        match self {
            TrainData::Reconstruction(t) => t.len(),
            TrainData::Contrastive { triplets, .. } => triplets.len(),
        }
    }
}

/// Mean reconstruction error over a batch of trajectories.
pub fn mse_loss(model: &EncoderModel, trajectories: &[StateTrajectory]) -> Result<f64> {
    let net = model.architecture.net();
    let mut total = 0.0;
    for t in trajectories {
        let y = model.reconstruct(t)?;
        let n = y.len() as f64;
        total += y
            .iter()
            .zip(t.flat())
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            / n;
    }
    let _ = net;
    Ok(total / trajectories.len().max(1) as f64)
}

/// Mean reconstruction error and its parameter gradient.
pub fn mse_loss_grad(
    model: &EncoderModel,
    trajectories: &[StateTrajectory],
) -> Result<(f64, Vec<f64>)> {
    let net = model.architecture.net();
    let mut grad = vec![0.0; model.params.len()];
    let mut total = 0.0;
    for t in trajectories {
        total += net.mse_backward(&model.params, t.flat(), &mut grad);
    }
    let scale = 1.0 / trajectories.len().max(1) as f64;
    grad.iter_mut().for_each(|g| *g *= scale);
    Ok((total * scale, grad))
}

/// Summed hinge loss `sum_i max(d(a,p) - d(a,n) + m, 0)` over encoded
/// features.
pub fn triplet_loss(model: &EncoderModel, triplets: &[Triplet], margin: f64) -> Result<f64> {
    assert!(margin > 0.0, "margin must be positive");
    let mut total = 0.0;
    for t in triplets {
        let za = model.encode(&t.anchor)?;
        let zp = model.encode(&t.positive)?;
        let zn = model.encode(&t.negative)?;
        let dap = euclidean_distance_unchecked(&za, &zp);
        let dan = euclidean_distance_unchecked(&za, &zn);
        total += (dap - dan + margin).max(0.0);
    }
    Ok(total)
}

/// Summed triplet loss and its parameter gradient.
pub fn triplet_loss_grad(
    model: &EncoderModel,
    triplets: &[Triplet],
    margin: f64,
) -> Result<(f64, Vec<f64>)> {
    assert!(margin > 0.0, "margin must be positive");
    let net = model.architecture.net();
    let mut grad = vec![0.0; model.params.len()];
    let mut total = 0.0;
    for t in triplets {
        let za = net.encode(&model.params, t.anchor.flat());
        let zp = net.encode(&model.params, t.positive.flat());
        let zn = net.encode(&model.params, t.negative.flat());
        let dap = euclidean_distance_unchecked(&za, &zp);
        let dan = euclidean_distance_unchecked(&za, &zn);
        let hinge = dap - dan + margin;
        if hinge <= 0.0 {
            continue;
        }
        total += hinge;
        // d hinge / d za = (za - zp)/dap - (za - zn)/dan, with guards at
        // coincident embeddings where the subgradient is taken as zero.
        let dim = za.len();
        let mut d_za = vec![0.0; dim];
        let mut d_zp = vec![0.0; dim];
        let mut d_zn = vec![0.0; dim];
        if dap > 1e-12 {
            for k in 0..dim {
                let v = (za[k] - zp[k]) / dap;
                d_za[k] += v;
                d_zp[k] -= v;
            }
        }
        if dan > 1e-12 {
            for k in 0..dim {
                let v = (za[k] - zn[k]) / dan;
                d_za[k] -= v;
                d_zn[k] += v;
            }
        }
        net.encode_backward(&model.params, t.anchor.flat(), &d_za, &mut grad);
        net.encode_backward(&model.params, t.positive.flat(), &d_zp, &mut grad);
        net.encode_backward(&model.params, t.negative.flat(), &d_zn, &mut grad);
    }
    Ok((total, grad))
}

/// Gradient descent with shuffled minibatches and early stopping: training
/// halts once the best epoch loss has failed to improve by more than
/// `early_stop_delta` for `early_stop_patience` consecutive epochs.
/// Returns the per-epoch loss history (mean per-sample loss).
pub fn train(
    model: &mut EncoderModel,
    data: &TrainData,
    cfg: &TrainConfig,
    rng: &mut impl Rng,
) -> Result<Vec<f64>> {
    let n = data.len();
    if n == 0 {
        return Err(Error::InvalidArgument("empty training data".into()));
    }
    let net = model.architecture.net();
    let mut order: Vec<usize> = (0..n).collect();
    let mut history = Vec::new();
    let mut best = f64::INFINITY;
    let mut stalled = 0usize;

    for epoch in 0..cfg.max_epochs {
        order.shuffle(rng);
        let mut epoch_loss = 0.0;
        for chunk in order.chunks(cfg.batch_size.max(1)) {
            let mut grad = vec![0.0; model.params.len()];
            let mut batch_loss = 0.0;
            match data {
                TrainData::Reconstruction(trajs) => {
                    for &i in chunk {
                        batch_loss += net.mse_backward(&model.params, trajs[i].flat(), &mut grad);
                    }
                }
                TrainData::Contrastive { triplets, margin } => {
                    let picked: Vec<Triplet> = chunk.iter().map(|&i| triplets[i].clone()).collect();
                    let (l, g) = triplet_loss_grad(model, &picked, *margin)?;
                    batch_loss = l;
                    grad = g;
                }
            }
            let scale = cfg.learning_rate / chunk.len() as f64;
            for (p, g) in model.params.iter_mut().zip(&grad) {
                *p -= scale * g;
            }
            epoch_loss += batch_loss;
        }
        let loss = epoch_loss / n as f64;
        if !loss.is_finite() {
            return Err(Error::TrainingDiverged { epoch });
        }
        if model.params.iter().any(|p| !p.is_finite()) {
            return Err(Error::TrainingDiverged { epoch });
        }
        history.push(loss);
        if loss < best - cfg.early_stop_delta {
            best = loss;
            stalled = 0;
        } else {
            best = best.min(loss);
            stalled += 1;
            if stalled >= cfg.early_stop_patience {
                break;
            }
        }
    }
    model.version += 1;
    Ok(history)
}

/// Encoder update iterations U_n with linearly increasing gaps:
/// gaps of `base`, `2 * base`, `3 * base`, so U_n = base * n(n+1)/2.
pub fn update_schedule(base_interval: usize) -> impl Iterator<Item = u64> {
    assert!(base_interval >= 1);
    (1u64..).scan(0u64, move |acc, n| {
        *acc += n * base_interval as u64;
        Some(*acc)
    })
}
