//! Shared domain types and small vector utilities.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Flat real parameter vector of a policy network; the unit of evolution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Genotype {
    pub params: Vec<f64>,
}

impl Genotype {
    pub fn new(params: Vec<f64>) -> Self {
        debug_assert!(params.iter().all(|p| p.is_finite()));
        Self { params }
    }

    pub fn dim(&self) -> usize {
        self.params.len()
    }
}

/// Fixed-length subsampled sequence of environment observations, stored
/// row-major as `rows` rows of `cols` entries each.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateTrajectory {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
}

impl StateTrajectory {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Self {
        assert_eq!(data.len(), rows * cols, "trajectory shape mismatch");
        Self { rows, cols, data }
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn flat(&self) -> &[f64] {
        &self.data
    }
}

/// Genotype together with its evaluation outcome; the unit held in
/// repertoires.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Solution {
    pub genotype: Genotype,
    pub fitness: f64,
    pub feature: Vec<f64>,
    pub trajectory: StateTrajectory,
}

/// Euclidean distance between two equal-dimension vectors.
pub fn euclidean_distance(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch {
            expected: a.len(),
            got: b.len(),
        });
    }
    Ok(euclidean_distance_unchecked(a, b))
}

/// As [`euclidean_distance`] but assumes equal dimensions.
#[inline]
pub fn euclidean_distance_unchecked(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// Row indices selected by [`subsample_trajectory`]: `target` indices evenly
/// spaced over `[0, full - 1]`, endpoints always included.
pub fn subsample_indices(full: usize, target: usize) -> Vec<usize> {
    if target == 1 {
        return vec![0];
    }
    (0..target)
        .map(|i| ((i * (full - 1)) as f64 / (target - 1) as f64).round() as usize)
        .collect()
}

/// Reduce a `full_rows x cols` observation matrix to `target` evenly spaced
/// rows, keeping the first and last row.
pub fn subsample_trajectory(
    full: &[f64],
    full_rows: usize,
    cols: usize,
    target: usize,
) -> Result<StateTrajectory> {
    assert_eq!(full.len(), full_rows * cols, "input shape mismatch");
    if target == 0 || target > full_rows {
        return Err(Error::InvalidArgument(format!(
            "cannot subsample {full_rows} rows to {target}"
        )));
    }
    let mut data = Vec::with_capacity(target * cols);
    for idx in subsample_indices(full_rows, target) {
        data.extend_from_slice(&full[idx * cols..(idx + 1) * cols]);
    }
    Ok(StateTrajectory::new(target, cols, data))
}
