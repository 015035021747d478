//! Triplet mining and the adaptive margin.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::types::{euclidean_distance_unchecked, StateTrajectory};

/// Anchor/positive/negative trajectories with the fitnesses used to mine
/// them (kept for invariant checks only).
#[derive(Debug, Clone)]
pub struct Triplet {
    pub anchor: StateTrajectory,
    pub positive: StateTrajectory,
    pub negative: StateTrajectory,
    pub fitness_anchor: f64,
    pub fitness_positive: f64,
    pub fitness_negative: f64,
}

impl Triplet {
    /// `|f_a - f_p| <= |f_a - f_n|` holds by construction.
    pub fn is_valid(&self) -> bool {
        (self.fitness_anchor - self.fitness_positive).abs()
            <= (self.fitness_anchor - self.fitness_negative).abs()
    }
}

/// One triplet per entry: the entry is the anchor; of a uniformly sampled
/// pair of two distinct others, the one with closer fitness becomes the
/// positive and the other the negative. An exact |delta f| tie keeps the
/// first-sampled as positive.
pub fn mine_triplets(
    items: &[(StateTrajectory, f64)],
    rng: &mut impl Rng,
) -> Result<Vec<Triplet>> {
    if items.len() < 3 {
        return Err(Error::InvalidArgument(format!(
            "need at least 3 solutions to mine triplets, got {}",
            items.len()
        )));
    }
    let n = items.len();
    let mut out = Vec::with_capacity(n);
    for a in 0..n {
        // Two distinct indices, both different from the anchor.
        let i = {
            let r = rng.random_range(0..n - 1);
            if r >= a {
                r + 1
            } else {
                r
            }
        };
        let j = loop {
            let r = rng.random_range(0..n - 1);
            let r = if r >= a { r + 1 } else { r };
            if r != i {
                break r;
            }
        };
        let fa = items[a].1;
        let (p, nidx) = if (fa - items[i].1).abs() <= (fa - items[j].1).abs() {
            (i, j)
        } else {
            (j, i)
        };
        out.push(Triplet {
            anchor: items[a].0.clone(),
            positive: items[p].0.clone(),
            negative: items[nidx].0.clone(),
            fitness_anchor: fa,
            fitness_positive: items[p].1,
            fitness_negative: items[nidx].1,
        });
    }
    Ok(out)
}

/// How the mined margin is derived from the repertoire's minimum pairwise
/// feature distance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum MarginMode {
    /// m = h * d_min.
    #[default]
    ScaledByLatentDim,
    /// m = d_min.
    Plain,
}

/// Floor used when the minimum pairwise distance degenerates to zero.
pub const MARGIN_FLOOR: f64 = 1e-6;

/// Margin from the current feature set: `d_min` is the minimum pairwise
/// Euclidean distance, scaled by the latent dimension unless `Plain`.
pub fn adaptive_margin(features: &[Vec<f64>], latent_dim: usize, mode: MarginMode) -> Result<f64> {
    if features.len() < 2 {
        return Err(Error::InvalidArgument(
            "adaptive margin needs at least 2 features".into(),
        ));
    }
    let mut d_min = f64::INFINITY;
    for i in 0..features.len() {
        for j in i + 1..features.len() {
            let d = euclidean_distance_unchecked(&features[i], &features[j]);
            if d < d_min {
                d_min = d;
            }
        }
    }
    if d_min == 0.0 {
        return Ok(MARGIN_FLOOR);
    }
    Ok(match mode {
        MarginMode::ScaledByLatentDim => latent_dim as f64 * d_min,
        MarginMode::Plain => d_min,
    })
}
