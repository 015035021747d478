//! Solution containers: CVT grid, unstructured archive with local
//! competition, passive best tracker, and snapshot serialization.

pub mod grid;
pub mod tracker;
pub mod unstructured;

pub use grid::{cvt_centroids, AddOutcome, GridRepertoire};
pub use tracker::BestTracker;
pub use unstructured::{dominated_novelty_scores, UnstructuredRepertoire};

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::types::Solution;

/// Resumable dump of a repertoire plus run metadata.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Snapshot {
    pub iteration: u64,
    pub evaluations: u64,
    pub encoder_version: u64,
    pub solutions: Vec<Solution>,
}

impl Snapshot {
    pub fn save(&self, path: &std::path::Path) -> Result<()> {
        Ok(std::fs::write(path, serde_json::to_vec(self)?)?)
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        Ok(serde_json::from_slice(&std::fs::read(path)?)?)
    }
}
