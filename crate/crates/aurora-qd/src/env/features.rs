//! Hand-coded and random feature extractors used by the MAP-Elites
//! baselines and ablations.

use serde::{Deserialize, Serialize};

use crate::env::maze::EpisodeResult;
use crate::error::{Error, Result};

/// Random-dimension feature spec, fixed once at experiment initialization:
/// which trajectory rows and observation dimensions to read, and the
/// empirical bounds used for min-max normalization.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RandomDimsSpec {
    pub dims: [usize; 2],
    pub rows: [usize; 2],
    pub bounds: [(f64, f64); 2],
}

impl RandomDimsSpec {
    /// Draw a spec uniformly for a trajectory of the given shape. Bounds
    /// default to the normalized observation range [0, 1].
    pub fn sample(rows: usize, cols: usize, rng: &mut impl rand::Rng) -> Self {
        Self {
            dims: [rng.random_range(0..cols), rng.random_range(0..cols)],
            rows: [rng.random_range(0..rows), rng.random_range(0..rows)],
            bounds: [(0.0, 1.0), (0.0, 1.0)],
        }
    }
}

/// Which feature extractor a grid-based algorithm uses.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum FeatureKind {
    /// Final robot position, the hand-coded feature aligned with the task.
    Xy,
    /// Mean per-side bumper activation over the episode.
    Bumper,
    /// Mean reading of each laser over the episode.
    LaserMean,
    /// Fixed random state dimensions at fixed trajectory rows.
    RandomDims { spec: RandomDimsSpec },
}

impl FeatureKind {
    pub fn dim(&self) -> usize {
        match self {
            FeatureKind::LaserMean => 3,
            _ => 2,
        }
    }

    /// Per-dimension feature-space bounds; every extractor normalizes into
    /// the unit interval.
    pub fn bounds(&self) -> Vec<(f64, f64)> {
        vec![(0.0, 1.0); self.dim()]
    }
}

/// Extract the feature vector of one episode under the given kind.
pub fn extract_feature(result: &EpisodeResult, kind: &FeatureKind) -> Result<Vec<f64>> {
    match kind {
        FeatureKind::Xy => Ok(vec![result.final_position.0, result.final_position.1]),
        FeatureKind::Bumper => Ok(vec![result.bumper_means.0, result.bumper_means.1]),
        FeatureKind::LaserMean => Ok(result.laser_means.to_vec()),
        FeatureKind::RandomDims { spec } => {
            let traj = &result.trajectory;
            let mut out = Vec::with_capacity(2);
            for i in 0..2 {
                let (row, dim) = (spec.rows[i], spec.dims[i]);
                if row >= traj.rows || dim >= traj.cols {
                    return Err(Error::InvalidArgument(format!(
                        "random dims spec out of range: row {row}, dim {dim}"
                    )));
                }
                let (lo, hi) = spec.bounds[i];
                if !(hi > lo) {
                    return Err(Error::InvalidArgument(format!(
                        "degenerate bounds ({lo}, {hi})"
                    )));
                }
                let v = traj.row(row)[dim].clamp(lo, hi);
                out.push((v - lo) / (hi - lo));
            }
            Ok(out)
        }
    }
}
