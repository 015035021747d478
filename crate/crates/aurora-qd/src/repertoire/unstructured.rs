//! Unstructured repertoire with dominated-novelty local competition and
//! extinction events.

use rand::seq::index::sample;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::types::{euclidean_distance_unchecked, Solution};

/// A member with its insertion id (used only for deterministic tie-breaks).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Member {
    pub solution: Solution,
    pub id: u64,
}

/// Fixed-capacity archive without a grid. Replacement ranks the pooled
/// members and candidates by dominated-novelty score: the feature distance
/// to the nearest strictly-fitter solution, infinite for the pool's best.
/// The global best can therefore never be evicted.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct UnstructuredRepertoire {
    pub capacity: usize,
    members: Vec<Member>,
    next_id: u64,
}

/// Dominated-novelty scores for a pool of (feature, fitness) entries.
pub fn dominated_novelty_scores(pool: &[(&[f64], f64)]) -> Vec<f64> {
    pool.iter()
        .map(|(feat, fit)| {
            let mut score = f64::INFINITY;
            for (other_feat, other_fit) in pool {
                if *other_fit > *fit {
                    let d = euclidean_distance_unchecked(feat, other_feat);
                    if d < score {
                        score = d;
                    }
                }
            }
            score
        })
        .collect()
}

impl UnstructuredRepertoire {
    pub fn new(capacity: usize) -> Self {
        assert!(capacity >= 1);
        Self {
            capacity,
            members: Vec::new(),
            next_id: 0,
        }
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn members(&self) -> &[Member] {
        &self.members
    }

    pub fn solutions(&self) -> impl Iterator<Item = &Solution> {
        self.members.iter().map(|m| &m.solution)
    }

    pub fn best(&self) -> Option<&Solution> {
        // First-inserted wins fitness ties.
        self.members
            .iter()
            .max_by(|a, b| {
                a.solution
                    .fitness
                    .partial_cmp(&b.solution.fitness)
                    .unwrap()
                    .then(b.id.cmp(&a.id))
            })
            .map(|m| &m.solution)
    }

    fn check_dim(&self, candidates: &[Solution]) -> Result<()> {
        let dim = self
            .members
            .first()
            .map(|m| m.solution.feature.len())
            .or_else(|| candidates.first().map(|c| c.feature.len()));
        if let Some(dim) = dim {
            for c in candidates {
                if c.feature.len() != dim {
                    return Err(Error::DimensionMismatch {
                        expected: dim,
                        got: c.feature.len(),
                    });
                }
            }
        }
        Ok(())
    }

    /// Pool the current members with a batch of candidates and keep the
    /// `capacity` highest dominated-novelty scores. Ties break toward
    /// higher fitness, then earlier insertion.
    pub fn add_batch(&mut self, candidates: Vec<Solution>) -> Result<()> {
        self.check_dim(&candidates)?;
        for c in candidates {
            let id = self.next_id;
            self.next_id += 1;
            self.members.push(Member { solution: c, id });
        }
        self.refilter();
        Ok(())
    }

    /// Re-rank all members and truncate to capacity.
    fn refilter(&mut self) {
        if self.members.len() <= self.capacity {
            return;
        }
        let pool: Vec<(&[f64], f64)> = self
            .members
            .iter()
            .map(|m| (m.solution.feature.as_slice(), m.solution.fitness))
            .collect();
        let scores = dominated_novelty_scores(&pool);
        let mut order: Vec<usize> = (0..self.members.len()).collect();
        order.sort_by(|&a, &b| {
            scores[b]
                .partial_cmp(&scores[a])
                .unwrap()
                .then(
                    self.members[b]
                        .solution
                        .fitness
                        .partial_cmp(&self.members[a].solution.fitness)
                        .unwrap(),
                )
                .then(self.members[a].id.cmp(&self.members[b].id))
        });
        order.truncate(self.capacity);
        order.sort_unstable();
        let mut keep = Vec::with_capacity(self.capacity);
        for (i, m) in std::mem::take(&mut self.members).into_iter().enumerate() {
            if order.binary_search(&i).is_ok() {
                keep.push(m);
            }
        }
        self.members = keep;
    }

    /// Keep `max(1, round(k * n))` members: the current best plus a uniform
    /// without-replacement draw from the rest.
    pub fn extinction(&mut self, k: f64, rng: &mut impl Rng) -> Result<()> {
        if self.members.is_empty() {
            return Err(Error::EmptyRepertoire);
        }
        if !(0.0..=1.0).contains(&k) || k <= 0.0 {
            return Err(Error::InvalidArgument(format!(
                "extinction proportion {k} outside (0, 1]"
            )));
        }
        let n = self.members.len();
        let survivors = ((k * n as f64).round() as usize).max(1).min(n);
        let best_idx = self
            .members
            .iter()
            .enumerate()
            .max_by(|(ia, a), (ib, b)| {
                a.solution
                    .fitness
                    .partial_cmp(&b.solution.fitness)
                    .unwrap()
                    .then(ib.cmp(ia))
            })
            .map(|(i, _)| i)
            .unwrap();
        let rest: Vec<usize> = (0..n).filter(|&i| i != best_idx).collect();
        let mut chosen = vec![best_idx];
        for pick in sample(rng, rest.len(), survivors - 1) {
            chosen.push(rest[pick]);
        }
        chosen.sort_unstable();
        let mut keep = Vec::with_capacity(survivors);
        for (i, m) in std::mem::take(&mut self.members).into_iter().enumerate() {
            if chosen.binary_search(&i).is_ok() {
                keep.push(m);
            }
        }
        self.members = keep;
        Ok(())
    }

    /// Replace every member's feature via the given encoder and re-filter
    /// once so the capacity invariant holds immediately.
    pub fn reencode_all<F>(&mut self, mut encode: F) -> Result<()>
    where
        F: FnMut(&crate::types::StateTrajectory) -> Result<Vec<f64>>,
    {
        for m in &mut self.members {
            m.solution.feature = encode(&m.solution.trajectory)?;
        }
        self.refilter();
        Ok(())
    }
}
