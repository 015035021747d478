//! Latent-structure diagnostics: silhouette score over labeled encodings
//! plus a synthetic clustered-trajectory generator for exercising them
//! without an environment in the loop.

use std::collections::BTreeMap;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use super::EncoderModel;
use crate::error::{Error, Result};
use crate::types::{euclidean_distance_unchecked, StateTrajectory};

/// Mean silhouette coefficient of `features` under `labels`, in [-1, 1].
/// All-identical features (or any single-cluster labeling) score 0.
/// Singleton clusters contribute 0 for their lone point, as usual.
pub fn silhouette(features: &[Vec<f64>], labels: &[usize]) -> f64 {
    assert_eq!(features.len(), labels.len());
    let n = features.len();
    if n < 2 {
        return 0.0;
    }
    let distinct_labels: Vec<usize> = {
        let mut l = labels.to_vec();
        l.sort_unstable();
        l.dedup();
        l
    };
    if distinct_labels.len() < 2 {
        return 0.0;
    }
    if features.iter().all(|f| f == &features[0]) {
        return 0.0;
    }
    let mut counts: BTreeMap<usize, usize> = BTreeMap::new();
    for &l in labels {
        *counts.entry(l).or_insert(0) += 1;
    }
    let mut total = 0.0;
    for i in 0..n {
        if counts[&labels[i]] == 1 {
            continue; // s(i) = 0 for singleton clusters
        }
        // Mean distance from i to each label's points.
        let mut sums: BTreeMap<usize, f64> = BTreeMap::new();
        for j in 0..n {
            if i == j {
                continue;
            }
            *sums.entry(labels[j]).or_insert(0.0) +=
                euclidean_distance_unchecked(&features[i], &features[j]);
        }
        let own = labels[i];
        let a = sums.get(&own).copied().unwrap_or(0.0) / (counts[&own] - 1) as f64;
        let b = sums
            .iter()
            .filter(|(&l, _)| l != own)
            .map(|(&l, &s)| s / counts[&l] as f64)
            .fold(f64::INFINITY, f64::min);
        let denom = a.max(b);
        if denom > 0.0 {
            total += (b - a) / denom;
        }
    }
    total / n as f64
}

/// Silhouette plus per-label dispersion of the encoded features.
#[derive(Debug, Clone, Serialize)]
pub struct LatentDiagnostics {
    pub silhouette: f64,
    /// Mean distance from each label's encodings to their centroid.
    pub centroid_spread: BTreeMap<usize, f64>,
    pub num_samples: usize,
    pub latent_dim: usize,
}

/// Encode every labeled trajectory and summarize the latent structure.
/// Requires at least 2 labels with at least 2 samples each.
pub fn latent_diagnostics(
    model: &EncoderModel,
    labeled: &[(StateTrajectory, usize)],
) -> Result<LatentDiagnostics> {
    let mut counts: BTreeMap<usize, usize> = BTreeMap::new();
    for (_, l) in labeled {
        *counts.entry(*l).or_insert(0) += 1;
    }
    if counts.len() < 2 || counts.values().any(|&c| c < 2) {
        return Err(Error::InvalidArgument(
            "latent diagnostics need >= 2 labels with >= 2 samples each".into(),
        ));
    }
    let mut features = Vec::with_capacity(labeled.len());
    let mut labels = Vec::with_capacity(labeled.len());
    for (t, l) in labeled {
        features.push(model.encode(t)?);
        labels.push(*l);
    }
    let dim = model.latent_dim();
    let mut centroids: BTreeMap<usize, Vec<f64>> = BTreeMap::new();
    for (f, &l) in features.iter().zip(&labels) {
        let c = centroids.entry(l).or_insert_with(|| vec![0.0; dim]);
        for (ck, fk) in c.iter_mut().zip(f) {
            *ck += fk;
        }
    }
    for (l, c) in centroids.iter_mut() {
        let n = counts[l] as f64;
        c.iter_mut().for_each(|v| *v /= n);
    }
    let mut centroid_spread: BTreeMap<usize, f64> = BTreeMap::new();
    for (f, &l) in features.iter().zip(&labels) {
        *centroid_spread.entry(l).or_insert(0.0) +=
            euclidean_distance_unchecked(f, &centroids[&l]);
    }
    for (l, s) in centroid_spread.iter_mut() {
        *s /= counts[l] as f64;
    }
    Ok(LatentDiagnostics {
        silhouette: silhouette(&features, &labels),
        centroid_spread,
        num_samples: labeled.len(),
        latent_dim: dim,
    })
}

/// Synthetic trajectories from 4 fitness-labeled clusters. Each sample is
/// a mix of three smooth basis patterns: two carry high-variance nuisance
/// factors shared by every cluster, the third carries a small label-
/// dependent offset. The dominant variance directions are therefore
/// fitness-irrelevant: a reconstruction objective is drawn to the nuisance
/// factors, while the label signal lives in a quiet direction that only
/// fitness-aware training has a reason to amplify. Cluster c gets fitness
/// 10c + N(0, 0.1). Returns (trajectory, label, fitness) tuples.
pub fn synthetic_clusters(
    per_cluster: usize,
    rows: usize,
    cols: usize,
    rng: &mut impl Rng,
) -> Vec<(StateTrajectory, usize, f64)> {
    use std::f64::consts::PI;
    let n = rows * cols;
    let basis = |freq: f64, i: usize| (2.0 * PI * freq * i as f64 / n as f64).sin();
    let mut out = Vec::with_capacity(4 * per_cluster);
    for label in 0..4usize {
        let offset = 0.4 * label as f64 - 0.6; // -0.6, -0.2, 0.2, 0.6
        for _ in 0..per_cluster {
            let a1: f64 = rng.sample(StandardNormal);
            let a2: f64 = rng.sample(StandardNormal);
            let data: Vec<f64> = (0..n)
                .map(|i| {
                    let noise: f64 = rng.sample(StandardNormal);
                    a1 * basis(1.0, i) + a2 * basis(2.0, i) + offset * basis(3.0, i) + 0.05 * noise
                })
                .collect();
            let fitness_noise: f64 = rng.sample(StandardNormal);
            out.push((
                StateTrajectory::new(rows, cols, data),
                label,
                10.0 * label as f64 + 0.1 * fitness_noise,
            ));
        }
    }
    out
}
