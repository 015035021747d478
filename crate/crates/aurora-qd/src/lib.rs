//! Quality-diversity optimization for deceptive fitness landscapes.
//!
//! This crate implements a family of evolutionary algorithms built around
//! learned feature spaces: a vanilla GA, CVT MAP-Elites with hand-coded or
//! random features, and the AURORA variants, which learn features as the
//! latent space of a trajectory auto-encoder trained with either a
//! reconstruction (MSE) or contrastive (triplet) objective. Periodic
//! extinction events and an unstructured repertoire with local competition
//! complete the AURORA-XCon configuration.
//!
//! Built-in environments are a differential-drive maze robot with laser and
//! bumper sensors and a lightweight point-maze testbed, both deceptive by
//! construction. The [`bench`] module provides the experiment harness:
//! multi-seed runs, median/IQR aggregation, Wilcoxon rank-sum tests with
//! Holm-Bonferroni correction, and CSV/JSON result emission.

pub mod bench;
pub mod encoder;
pub mod engine;
pub mod env;
pub mod error;
pub mod repertoire;
pub mod rng;
pub mod types;
pub mod variation;

pub use error::{Error, Result};
pub use rng::RngStream;
pub use types::{Genotype, Solution, StateTrajectory};
