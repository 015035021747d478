//! Trajectory auto-encoder defining the learned feature space.
//!
//! The same model shape serves both training objectives: reconstruction
//! (MSE over the decoded trajectory) and contrastive (triplet loss over
//! encoded features); the decoder is simply unused by the latter.

pub mod checkpoint;
pub mod diagnostics;
pub mod lstm;
pub mod mine;
pub mod mlp;
pub mod train;

pub use diagnostics::{latent_diagnostics, silhouette, synthetic_clusters, LatentDiagnostics};
pub use mine::{adaptive_margin, mine_triplets, MarginMode, Triplet};
pub use train::{
    mse_loss, mse_loss_grad, train, triplet_loss, triplet_loss_grad, update_schedule, Objective,
    TrainConfig, TrainData,
};

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::types::StateTrajectory;

/// Network shape of the auto-encoder.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "arch")]
pub enum Architecture {
    /// MLP over the flattened trajectory, one hidden layer each side.
    Mlp {
        input_rows: usize,
        input_cols: usize,
        hidden: usize,
        latent: usize,
    },
    /// Single-layer LSTM encoder/decoder over trajectory rows.
    Lstm {
        input_rows: usize,
        input_cols: usize,
        hidden: usize,
        latent: usize,
    },
}

impl Architecture {
    pub fn input_shape(&self) -> (usize, usize) {
        match *self {
            Architecture::Mlp {
                input_rows,
                input_cols,
                ..
            }
            | Architecture::Lstm {
                input_rows,
                input_cols,
                ..
            } => (input_rows, input_cols),
        }
    }

    pub fn latent_dim(&self) -> usize {
        match *self {
            Architecture::Mlp { latent, .. } | Architecture::Lstm { latent, .. } => latent,
        }
    }

    pub(crate) fn net(&self) -> Box<dyn Net> {
        match *self {
            Architecture::Mlp {
                input_rows,
                input_cols,
                hidden,
                latent,
            } => Box::new(mlp::MlpNet::new(input_rows * input_cols, hidden, latent)),
            Architecture::Lstm {
                input_rows,
                input_cols,
                hidden,
                latent,
            } => Box::new(lstm::LstmNet::new(input_rows, input_cols, hidden, latent)),
        }
    }

    pub fn param_count(&self) -> usize {
        self.net().param_count()
    }
}

/// Forward/backward interface implemented by each architecture. Gradients
/// are accumulated into a caller-owned buffer so minibatch averaging stays
/// in one place.
pub(crate) trait Net {
    fn param_count(&self) -> usize;
    fn encode(&self, params: &[f64], input: &[f64]) -> Vec<f64>;
    fn reconstruct(&self, params: &[f64], input: &[f64]) -> Vec<f64>;
    /// Per-sample reconstruction MSE; accumulates its parameter gradient.
    fn mse_backward(&self, params: &[f64], input: &[f64], grad: &mut [f64]) -> f64;
    /// Backprop an upstream latent gradient through the encoder half.
    fn encode_backward(&self, params: &[f64], input: &[f64], latent_grad: &[f64], grad: &mut [f64]);
}

/// Auto-encoder parameters plus shape.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EncoderModel {
    pub architecture: Architecture,
    pub params: Vec<f64>,
    /// Bumped on every completed training call.
    pub version: u64,
}

impl EncoderModel {
    /// Random init with 1/sqrt(fan_in)-style scaling.
    pub fn init(architecture: Architecture, rng: &mut impl Rng) -> Self {
        let n = architecture.param_count();
        let (rows, cols) = architecture.input_shape();
        let scale = 1.0 / ((rows * cols) as f64).sqrt().max(1.0);
        let params = (0..n)
            .map(|_| {
                let z: f64 = rng.sample(StandardNormal);
                z * scale.max(0.05)
            })
            .collect();
        Self {
            architecture,
            params,
            version: 0,
        }
    }

    pub fn latent_dim(&self) -> usize {
        self.architecture.latent_dim()
    }

    fn check_shape(&self, trajectory: &StateTrajectory) -> Result<()> {
        let (rows, cols) = self.architecture.input_shape();
        if (trajectory.rows, trajectory.cols) != (rows, cols) {
            return Err(Error::DimensionMismatch {
                expected: rows * cols,
                got: trajectory.rows * trajectory.cols,
            });
        }
        Ok(())
    }

    /// Deterministic latent feature of a trajectory.
    pub fn encode(&self, trajectory: &StateTrajectory) -> Result<Vec<f64>> {
        self.check_shape(trajectory)?;
        let z = self.architecture.net().encode(&self.params, trajectory.flat());
        if z.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("encoder output"));
        }
        Ok(z)
    }

    /// Decoder output for a trajectory (used by the reconstruction loss).
    pub fn reconstruct(&self, trajectory: &StateTrajectory) -> Result<Vec<f64>> {
        self.check_shape(trajectory)?;
        Ok(self
            .architecture
            .net()
            .reconstruct(&self.params, trajectory.flat()))
    }
}
