//! Resolved run configuration and the named variant presets.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::encoder::{MarginMode, TrainConfig};
use crate::env::TaskSpec;
use crate::error::{Error, Result};
use crate::variation::VariationParams;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum AlgorithmKind {
    Ga,
    MapElites,
    #[default]
    Aurora,
}

/// Feature extractor selector for MAP-Elites. `RandomDims` is resolved to
/// concrete trajectory indices from the run seed at startup, so distinct
/// seeds exercise distinct random projections.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum FeatureConfig {
    #[default]
    Xy,
    Bumper,
    LaserMean,
    RandomDims,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum EncoderArch {
    #[default]
    Mlp,
    Lstm,
}

/// Everything a single run needs, serializable as the run's `config.json`.
/// Unknown keys are rejected so config typos fail loudly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AlgorithmConfig {
    pub algorithm: AlgorithmKind,
    /// Contrastive (triplet) objective instead of reconstruction.
    pub use_triplet: bool,
    /// Periodic extinction events on the unstructured repertoire.
    pub use_extinction: bool,
    pub feature: FeatureConfig,
    pub batch_size: usize,
    pub total_evaluations: u64,
    pub extinction_period: u64,
    pub extinction_proportion: f64,
    pub train: TrainConfig,
    pub variation: VariationParams,
    pub seed: u64,
    pub task: TaskSpec,
    pub population_size: usize,
    pub num_centroids: usize,
    pub repertoire_capacity: usize,
    pub latent_dim: usize,
    pub encoder_hidden: usize,
    pub encoder_arch: EncoderArch,
    pub margin_mode: MarginMode,
}

impl Default for AlgorithmConfig {
    fn default() -> Self {
        Self {
            algorithm: AlgorithmKind::Aurora,
            use_triplet: true,
            use_extinction: true,
            feature: FeatureConfig::Xy,
            batch_size: 64,
            total_evaluations: 100_000,
            extinction_period: 50,
            extinction_proportion: 0.05,
            train: TrainConfig::default(),
            variation: VariationParams::default(),
            seed: 0,
            task: TaskSpec::default(),
            population_size: 1024,
            num_centroids: 1024,
            repertoire_capacity: 256,
            latent_dim: 10,
            encoder_hidden: 32,
            encoder_arch: EncoderArch::default(),
            margin_mode: MarginMode::default(),
        }
    }
}

/// Names accepted by `--variant`, in display order.
pub const VARIANT_NAMES: &[&str] = &[
    "ga",
    "map_elites_xy",
    "map_elites_bumper",
    "map_elites_laser_mean",
    "map_elites_random_dims",
    "aurora",
    "aurora_x",
    "aurora_con",
    "aurora_xcon",
];

impl AlgorithmConfig {
    /// Preset for a named variant, on top of the defaults.
    pub fn variant(name: &str) -> Option<Self> {
        let mut cfg = Self::default();
        match name {
            "ga" => cfg.algorithm = AlgorithmKind::Ga,
            "map_elites" | "map_elites_xy" => {
                cfg.algorithm = AlgorithmKind::MapElites;
                cfg.feature = FeatureConfig::Xy;
            }
            "map_elites_bumper" => {
                cfg.algorithm = AlgorithmKind::MapElites;
                cfg.feature = FeatureConfig::Bumper;
            }
            "map_elites_laser_mean" => {
                cfg.algorithm = AlgorithmKind::MapElites;
                cfg.feature = FeatureConfig::LaserMean;
            }
            "map_elites_random_dims" => {
                cfg.algorithm = AlgorithmKind::MapElites;
                cfg.feature = FeatureConfig::RandomDims;
            }
            "aurora" => {
                cfg.use_triplet = false;
                cfg.use_extinction = false;
            }
            "aurora_x" => {
                cfg.use_triplet = false;
                cfg.use_extinction = true;
            }
            "aurora_con" => {
                cfg.use_triplet = true;
                cfg.use_extinction = false;
            }
            "aurora_xcon" => {
                cfg.use_triplet = true;
                cfg.use_extinction = true;
            }
            _ => return None,
        }
        Some(cfg)
    }

    /// The canonical variant name this config corresponds to.
    pub fn variant_name(&self) -> String {
        match self.algorithm {
            AlgorithmKind::Ga => "ga".into(),
            AlgorithmKind::MapElites => {
                let feat = match self.feature {
                    FeatureConfig::Xy => "xy",
                    FeatureConfig::Bumper => "bumper",
                    FeatureConfig::LaserMean => "laser_mean",
                    FeatureConfig::RandomDims => "random_dims",
                };
                format!("map_elites_{feat}")
            }
            AlgorithmKind::Aurora => match (self.use_triplet, self.use_extinction) {
                (false, false) => "aurora".into(),
                (false, true) => "aurora_x".into(),
                (true, false) => "aurora_con".into(),
                (true, true) => "aurora_xcon".into(),
            },
        }
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let bytes = std::fs::read(path)?;
        let cfg: Self = serde_json::from_slice(&bytes)
            .map_err(|e| Error::MalformedConfig(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.batch_size < 3 {
            return Err(Error::MalformedConfig(
                "batch_size must be at least 3 (triplet mining needs 3 solutions)".into(),
            ));
        }
        if self.total_evaluations < self.batch_size as u64 {
            return Err(Error::MalformedConfig(
                "total_evaluations must cover at least one batch".into(),
            ));
        }
        if !(0.0 < self.extinction_proportion && self.extinction_proportion <= 1.0) {
            return Err(Error::MalformedConfig(format!(
                "extinction_proportion {} outside (0, 1]",
                self.extinction_proportion
            )));
        }
        if self.extinction_period == 0 {
            return Err(Error::MalformedConfig("extinction_period must be >= 1".into()));
        }
        if self.population_size == 0
            || self.num_centroids == 0
            || self.repertoire_capacity == 0
            || self.latent_dim == 0
            || self.encoder_hidden == 0
        {
            return Err(Error::MalformedConfig(
                "sizes (population, centroids, capacity, latent, hidden) must be >= 1".into(),
            ));
        }
        if self.train.base_interval == 0 {
            return Err(Error::MalformedConfig("train.base_interval must be >= 1".into()));
        }
        Ok(())
    }
}
