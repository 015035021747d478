//! Passive best-solution tracker: the metric of record for optimization
//! runs. Survives extinction by construction (it holds its own copy).

use serde::{Deserialize, Serialize};

use crate::types::Solution;

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct BestTracker {
    pub best: Option<Solution>,
    /// (evaluation count, max fitness so far) samples, one per batch.
    pub history: Vec<(u64, f64)>,
}

impl BestTracker {
    pub fn new() -> Self {
        Self::default()
    }

    /// Offer a candidate; kept only if strictly better than the best so far.
    pub fn offer(&mut self, candidate: &Solution) {
        let better = self
            .best
            .as_ref()
            .map(|b| candidate.fitness > b.fitness)
            .unwrap_or(true);
        if better {
            self.best = Some(candidate.clone());
        }
    }

    /// Record one history sample at the given evaluation count.
    pub fn record(&mut self, evaluations: u64) {
        let fit = self.best.as_ref().map(|b| b.fitness).unwrap_or(f64::NEG_INFINITY);
        debug_assert!(self
            .history
            .last()
            .map(|&(e, f)| e < evaluations && f <= fit)
            .unwrap_or(true));
        self.history.push((evaluations, fit));
    }

    pub fn max_fitness(&self) -> Option<f64> {
        self.best.as_ref().map(|b| b.fitness)
    }
}
