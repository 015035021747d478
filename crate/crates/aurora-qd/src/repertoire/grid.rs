//! CVT grid repertoire: the classic MAP-Elites container over a bounded
//! feature space discretized by k-means centroids.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::types::{euclidean_distance_unchecked, Solution};

/// Centroidal Voronoi tessellation of a bounded box: k-means over uniform
/// samples (50 per centroid), deterministic given the rng stream.
pub fn cvt_centroids(
    n_centroids: usize,
    dims: usize,
    bounds: &[(f64, f64)],
    rng: &mut impl Rng,
) -> Vec<Vec<f64>> {
    assert!(n_centroids >= 1 && dims >= 1);
    assert_eq!(bounds.len(), dims);
    assert!(bounds.iter().all(|(lo, hi)| lo.is_finite() && hi > lo));

    // 50 samples per centroid, with a floor so tiny grids still get a
    // low-variance estimate of each cell's mass center.
    let n_samples = (50 * n_centroids).max(5000);
    let samples: Vec<Vec<f64>> = (0..n_samples)
        .map(|_| {
            bounds
                .iter()
                .map(|&(lo, hi)| rng.random_range(lo..hi))
                .collect()
        })
        .collect();

    let mut centroids: Vec<Vec<f64>> = samples[..n_centroids].to_vec();
    let mut assignment = vec![0usize; n_samples];
    for _ in 0..20 {
        for (s, slot) in samples.iter().zip(assignment.iter_mut()) {
            *slot = nearest(&centroids, s);
        }
        let mut sums = vec![vec![0.0; dims]; n_centroids];
        let mut counts = vec![0usize; n_centroids];
        for (s, &c) in samples.iter().zip(&assignment) {
            counts[c] += 1;
            for (acc, v) in sums[c].iter_mut().zip(s) {
                *acc += v;
            }
        }
        let mut moved = 0.0f64;
        for c in 0..n_centroids {
            if counts[c] == 0 {
                continue; // empty cluster keeps its previous centroid
            }
            let new: Vec<f64> = sums[c].iter().map(|v| v / counts[c] as f64).collect();
            moved = moved.max(euclidean_distance_unchecked(&new, &centroids[c]));
            centroids[c] = new;
        }
        if moved < 1e-9 {
            break;
        }
    }
    centroids
}

fn nearest(centroids: &[Vec<f64>], point: &[f64]) -> usize {
    let mut best = 0;
    let mut best_d = f64::INFINITY;
    for (i, c) in centroids.iter().enumerate() {
        let mut d = 0.0;
        for (a, b) in c.iter().zip(point) {
            d += (a - b) * (a - b);
        }
        if d < best_d {
            best_d = d;
            best = i;
        }
    }
    best
}

/// Outcome of offering a candidate to the grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AddOutcome {
    Inserted,
    Replaced,
    Rejected,
}

/// Grid archive: one optional solution per centroid, per-cell fitness
/// monotone non-decreasing over the run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GridRepertoire {
    pub centroids: Vec<Vec<f64>>,
    pub cells: Vec<Option<Solution>>,
    pub bounds: Vec<(f64, f64)>,
}

impl GridRepertoire {
    pub fn new(centroids: Vec<Vec<f64>>, bounds: Vec<(f64, f64)>) -> Self {
        let n = centroids.len();
        Self {
            centroids,
            cells: vec![None; n],
            bounds,
        }
    }

    pub fn feature_dim(&self) -> usize {
        self.bounds.len()
    }

    /// Offer a candidate: it lands in the cell of its nearest centroid
    /// (feature clipped to the bounds first) and wins only on strictly
    /// higher fitness; ties keep the incumbent.
    pub fn add(&mut self, candidate: Solution) -> Result<AddOutcome> {
        if candidate.feature.len() != self.feature_dim() {
            return Err(Error::DimensionMismatch {
                expected: self.feature_dim(),
                got: candidate.feature.len(),
            });
        }
        let clipped: Vec<f64> = candidate
            .feature
            .iter()
            .zip(&self.bounds)
            .map(|(&v, &(lo, hi))| v.clamp(lo, hi))
            .collect();
        let cell = nearest(&self.centroids, &clipped);
        match &self.cells[cell] {
            None => {
                self.cells[cell] = Some(candidate);
                Ok(AddOutcome::Inserted)
            }
            Some(incumbent) if candidate.fitness > incumbent.fitness => {
                self.cells[cell] = Some(candidate);
                Ok(AddOutcome::Replaced)
            }
            Some(_) => Ok(AddOutcome::Rejected),
        }
    }

    pub fn occupied(&self) -> impl Iterator<Item = &Solution> {
        self.cells.iter().filter_map(|c| c.as_ref())
    }

    pub fn num_occupied(&self) -> usize {
        self.cells.iter().filter(|c| c.is_some()).count()
    }

    pub fn best(&self) -> Option<&Solution> {
        self.occupied()
            .max_by(|a, b| a.fitness.partial_cmp(&b.fitness).unwrap())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::RngStream;
    use crate::types::{Genotype, StateTrajectory};

    fn sol(feature: Vec<f64>, fitness: f64) -> Solution {
        Solution {
            genotype: Genotype::new(vec![0.0]),
            fitness,
            feature,
            trajectory: StateTrajectory::new(1, 1, vec![0.0]),
        }
    }

    #[test]
    fn single_centroid_is_box_center() {
        let mut rng = RngStream::new(0, 0).rng();
        let c = cvt_centroids(1, 2, &[(0.0, 1.0), (0.0, 1.0)], &mut rng);
        // Tolerance: 2% of the box diagonal.
        let d = euclidean_distance_unchecked(&c[0], &[0.5, 0.5]);
        assert!(d < 0.02 * 2f64.sqrt(), "off-center by {d}");
    }

    #[test]
    fn centroids_distinct_and_inside_box() {
        let mut rng = RngStream::new(1, 0).rng();
        let cs = cvt_centroids(1024, 2, &[(0.0, 1.0), (0.0, 1.0)], &mut rng);
        assert_eq!(cs.len(), 1024);
        for c in &cs {
            assert!(c.iter().all(|v| (0.0..=1.0).contains(v)));
        }
        for i in 0..cs.len() {
            for j in i + 1..cs.len() {
                assert_ne!(cs[i], cs[j]);
            }
        }
    }

    #[test]
    fn cvt_deterministic_per_seed() {
        let a = cvt_centroids(64, 2, &[(0.0, 1.0), (0.0, 1.0)], &mut RngStream::new(9, 0).rng());
        let b = cvt_centroids(64, 2, &[(0.0, 1.0), (0.0, 1.0)], &mut RngStream::new(9, 0).rng());
        assert_eq!(a, b);
    }

    #[test]
    fn add_insert_replace_reject() {
        let centroids = vec![vec![0.25, 0.5], vec![0.75, 0.5]];
        let mut rep = GridRepertoire::new(centroids, vec![(0.0, 1.0), (0.0, 1.0)]);
        assert_eq!(rep.add(sol(vec![0.2, 0.5], 3.0)).unwrap(), AddOutcome::Inserted);
        assert_eq!(rep.add(sol(vec![0.3, 0.5], 5.0)).unwrap(), AddOutcome::Replaced);
        // Fitness tie keeps the incumbent.
        assert_eq!(rep.add(sol(vec![0.2, 0.5], 5.0)).unwrap(), AddOutcome::Rejected);
        assert_eq!(rep.num_occupied(), 1);
        assert_eq!(rep.best().unwrap().fitness, 5.0);
    }

    #[test]
    fn dimension_mismatch_rejected() {
        let mut rep = GridRepertoire::new(vec![vec![0.5, 0.5]], vec![(0.0, 1.0), (0.0, 1.0)]);
        assert!(rep.add(sol(vec![0.5], 1.0)).is_err());
    }

    #[test]
    fn cell_fitness_equals_max_ever_offered() {
        // Replay-log oracle: per cell, track the max fitness offered.
        let mut rng = RngStream::new(4, 0).rng();
        let centroids = cvt_centroids(16, 2, &[(0.0, 1.0), (0.0, 1.0)], &mut rng);
        let mut rep = GridRepertoire::new(centroids.clone(), vec![(0.0, 1.0), (0.0, 1.0)]);
        let mut oracle: Vec<Option<f64>> = vec![None; 16];
        use rand::Rng;
        for _ in 0..500 {
            let f = vec![rng.random_range(0.0..1.0), rng.random_range(0.0..1.0)];
            let fit: f64 = rng.random_range(-1.0..1.0);
            let cell = nearest(&centroids, &f);
            rep.add(sol(f, fit)).unwrap();
            oracle[cell] = Some(oracle[cell].map_or(fit, |o: f64| o.max(fit)));
        }
        for (cell, expect) in oracle.iter().enumerate() {
            assert_eq!(rep.cells[cell].as_ref().map(|s| s.fitness), *expect);
        }
    }
}
