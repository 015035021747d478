//! Experiment harness: multi-seed orchestration, nonparametric statistics
//! and CSV/JSON result emission.

pub mod experiment;
pub mod stats;

pub use experiment::{
    aggregate, evaluations_to_goal, load_record, read_curves_csv, run_experiment, variant_config,
    write_curves_csv, ComparisonReport, PairwiseComparison, RunRecord, VariantStats,
};
pub use stats::{holm_bonferroni, median_iqr, wilcoxon_rank_sum, EXACT_ENUMERATION_LIMIT};
