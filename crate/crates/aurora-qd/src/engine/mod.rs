//! Top-level algorithm loops wiring selection, variation, evaluation,
//! replacement, encoder updates and extinction.

pub mod config;
pub mod run;

pub use config::{AlgorithmConfig, AlgorithmKind, EncoderArch, FeatureConfig, VARIANT_NAMES};
pub use run::{
    execute_run, read_metrics_csv, run_aurora, run_ga, run_map_elites, write_metrics_csv,
    AuroraRun, GaRun, MapElitesRun, MetricsRow, RunSummary,
};
