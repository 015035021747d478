//! Multi-variant, multi-seed experiment orchestration and result emission.
//!
//! Layout under the output directory:
//!   <variant>/seed_<s>/   standard run directories
//!   curves.csv            long format: variant,seed,evaluations,max_fitness
//!   report.json           per-variant stats + pairwise comparisons

use std::io::Write;
use std::path::Path;

use serde::Serialize;

use super::stats::{holm_bonferroni, median_iqr, wilcoxon_rank_sum};
use crate::engine::{execute_run, read_metrics_csv, AlgorithmConfig};
use crate::error::{Error, Result};

/// One completed run as the harness sees it.
#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub variant: String,
    pub seed: u64,
    /// (evaluations, max fitness) per batch; strictly increasing x.
    pub curve: Vec<(u64, f64)>,
    pub evaluations_to_goal: Option<u64>,
    pub wall_time_seconds: f64,
}

/// Smallest evaluation count at which the curve reaches fitness 0.
pub fn evaluations_to_goal(curve: &[(u64, f64)]) -> Option<u64> {
    curve.iter().find(|&&(_, f)| f >= 0.0).map(|&(e, _)| e)
}

impl RunRecord {
    pub fn new(variant: String, seed: u64, curve: Vec<(u64, f64)>, wall: f64) -> Result<Self> {
        if !curve.windows(2).all(|w| w[0].0 < w[1].0) {
            return Err(Error::InvalidArgument(
                "curve evaluation counts must be strictly increasing".into(),
            ));
        }
        let etg = evaluations_to_goal(&curve);
        Ok(Self {
            variant,
            seed,
            curve,
            evaluations_to_goal: etg,
            wall_time_seconds: wall,
        })
    }

    /// Ranking metric: evaluations-to-goal, with unfinished runs ranked
    /// just past the budget.
    pub fn goal_metric(&self, budget: u64) -> f64 {
        self.evaluations_to_goal.unwrap_or(budget + 1) as f64
    }

    pub fn final_fitness(&self) -> f64 {
        self.curve.last().map(|&(_, f)| f).unwrap_or(f64::NEG_INFINITY)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct VariantStats {
    pub variant: String,
    pub seeds: usize,
    pub median_final_fitness: f64,
    pub iqr_final_fitness: f64,
    /// Median/IQR of evaluations-to-goal with unfinished runs at budget+1.
    pub median_evals_to_goal: f64,
    pub iqr_evals_to_goal: f64,
    pub goal_reached: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct PairwiseComparison {
    pub a: String,
    pub b: String,
    pub p_raw: f64,
    pub p_adjusted: f64,
    pub significant: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct ComparisonReport {
    /// Metric the comparisons are computed on.
    pub metric: String,
    pub budget: u64,
    pub alpha: f64,
    pub variants: Vec<VariantStats>,
    pub comparisons: Vec<PairwiseComparison>,
    /// (variant, seed, error) for runs that failed to complete.
    pub failures: Vec<(String, u64, String)>,
}

/// Aggregate records into per-variant stats and Holm-adjusted pairwise
/// rank-sum tests on evaluations-to-goal.
pub fn aggregate(records: &[RunRecord], budget: u64, failures: Vec<(String, u64, String)>) -> Result<ComparisonReport> {
    let mut names: Vec<String> = records.iter().map(|r| r.variant.clone()).collect();
    names.sort();
    names.dedup();

    let mut variants = Vec::new();
    for name in &names {
        let of_variant: Vec<&RunRecord> =
            records.iter().filter(|r| &r.variant == name).collect();
        let finals: Vec<f64> = of_variant.iter().map(|r| r.final_fitness()).collect();
        let goals: Vec<f64> = of_variant.iter().map(|r| r.goal_metric(budget)).collect();
        let (mf, qf) = median_iqr(&finals)?;
        let (mg, qg) = median_iqr(&goals)?;
        variants.push(VariantStats {
            variant: name.clone(),
            seeds: of_variant.len(),
            median_final_fitness: mf,
            iqr_final_fitness: qf,
            median_evals_to_goal: mg,
            iqr_evals_to_goal: qg,
            goal_reached: of_variant
                .iter()
                .filter(|r| r.evaluations_to_goal.is_some())
                .count(),
        });
    }

    let mut pairs = Vec::new();
    let mut raw = Vec::new();
    for i in 0..names.len() {
        for j in i + 1..names.len() {
            let xs: Vec<f64> = records
                .iter()
                .filter(|r| r.variant == names[i])
                .map(|r| r.goal_metric(budget))
                .collect();
            let ys: Vec<f64> = records
                .iter()
                .filter(|r| r.variant == names[j])
                .map(|r| r.goal_metric(budget))
                .collect();
            raw.push(wilcoxon_rank_sum(&xs, &ys)?);
            pairs.push((names[i].clone(), names[j].clone()));
        }
    }
    let adjusted = holm_bonferroni(&raw)?;
    let comparisons = pairs
        .into_iter()
        .zip(raw.iter().zip(&adjusted))
        .map(|((a, b), (&p_raw, &p_adjusted))| PairwiseComparison {
            a,
            b,
            p_raw,
            p_adjusted,
            significant: p_adjusted < 0.05,
        })
        .collect();
    Ok(ComparisonReport {
        metric: "evaluations_to_goal".into(),
        budget,
        alpha: 0.05,
        variants,
        comparisons,
        failures,
    })
}

pub fn write_curves_csv(path: &Path, records: &[RunRecord]) -> Result<()> {
    let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(f, "variant,seed,evaluations,max_fitness")?;
    for r in records {
        for &(e, fit) in &r.curve {
            writeln!(f, "{},{},{},{}", r.variant, r.seed, e, fit)?;
        }
    }
    f.flush()?;
    Ok(())
}

/// Parse curves.csv back into records (wall time is not stored there).
pub fn read_curves_csv(path: &Path) -> Result<Vec<RunRecord>> {
    let text = std::fs::read_to_string(path)?;
    let mut lines = text.lines();
    match lines.next() {
        Some("variant,seed,evaluations,max_fitness") => {}
        _ => {
            return Err(Error::InvalidArgument(format!(
                "unrecognized curves header in {}",
                path.display()
            )))
        }
    }
    let mut records: Vec<RunRecord> = Vec::new();
    for line in lines {
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 4 {
            return Err(Error::InvalidArgument(format!("malformed curve row: {line}")));
        }
        let err = |what: &str| Error::InvalidArgument(format!("bad {what} in row: {line}"));
        let variant = fields[0].to_string();
        let seed: u64 = fields[1].parse().map_err(|_| err("seed"))?;
        let e: u64 = fields[2].parse().map_err(|_| err("evaluations"))?;
        let fit: f64 = fields[3].parse().map_err(|_| err("max_fitness"))?;
        match records
            .iter_mut()
            .find(|r| r.variant == variant && r.seed == seed)
        {
            Some(r) => r.curve.push((e, fit)),
            None => records.push(RunRecord {
                variant,
                seed,
                curve: vec![(e, fit)],
                evaluations_to_goal: None,
                wall_time_seconds: 0.0,
            }),
        }
    }
    for r in &mut records {
        r.evaluations_to_goal = evaluations_to_goal(&r.curve);
    }
    Ok(records)
}

fn run_dir(out: &Path, variant: &str, seed: u64) -> std::path::PathBuf {
    out.join(variant).join(format!("seed_{seed}"))
}

/// Load the record of a completed run directory.
pub fn load_record(dir: &Path, variant: &str, seed: u64) -> Result<RunRecord> {
    let rows = read_metrics_csv(&dir.join("metrics.csv"))?;
    let curve: Vec<(u64, f64)> = rows.iter().map(|r| (r.evaluations, r.max_fitness)).collect();
    let wall = std::fs::read_to_string(dir.join("meta.json"))
        .ok()
        .and_then(|s| serde_json::from_str::<serde_json::Value>(&s).ok())
        .and_then(|v| v.get("wall_time_seconds").and_then(|w| w.as_f64()))
        .unwrap_or(0.0);
    RunRecord::new(variant.to_string(), seed, curve, wall)
}

/// Apply a named variant's identity onto a base config, keeping the base's
/// task, budget, sizes and training settings.
pub fn variant_config(base: &AlgorithmConfig, name: &str) -> Option<AlgorithmConfig> {
    let preset = AlgorithmConfig::variant(name)?;
    Some(AlgorithmConfig {
        algorithm: preset.algorithm,
        use_triplet: preset.use_triplet,
        use_extinction: preset.use_extinction,
        feature: preset.feature,
        ..base.clone()
    })
}

/// Run every (variant, seed) cell, reusing completed run directories, then
/// aggregate and emit `curves.csv` and `report.json`. Individual run
/// failures are recorded in the report instead of aborting the experiment.
pub fn run_experiment(
    base: &AlgorithmConfig,
    variant_names: &[String],
    seeds: &[u64],
    out: &Path,
) -> Result<ComparisonReport> {
    if variant_names.is_empty() || seeds.is_empty() {
        return Err(Error::InvalidArgument(
            "experiment needs at least one variant and one seed".into(),
        ));
    }
    std::fs::create_dir_all(out)?;
    let mut records = Vec::new();
    let mut failures = Vec::new();
    for name in variant_names {
        let cfg = variant_config(base, name).ok_or_else(|| {
            Error::InvalidArgument(format!("unknown variant '{name}'"))
        })?;
        for &seed in seeds {
            let dir = run_dir(out, name, seed);
            let complete =
                dir.join("metrics.csv").exists() && dir.join("meta.json").exists();
            if !complete {
                let cfg = AlgorithmConfig { seed, ..cfg.clone() };
                if let Err(e) = execute_run(&cfg, &dir) {
                    failures.push((name.clone(), seed, e.to_string()));
                    continue;
                }
            }
            match load_record(&dir, name, seed) {
                Ok(r) => records.push(r),
                Err(e) => failures.push((name.clone(), seed, e.to_string())),
            }
        }
    }
    if records.is_empty() {
        return Err(Error::InvalidArgument(
            "no run completed successfully".into(),
        ));
    }
    let report = aggregate(&records, base.total_evaluations, failures)?;
    write_curves_csv(&out.join("curves.csv"), &records)?;
    std::fs::write(
        out.join("report.json"),
        serde_json::to_string_pretty(&report)?,
    )?;
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::encoder::TrainConfig;
    use crate::env::TaskSpec;

    fn record(variant: &str, seed: u64, curve: Vec<(u64, f64)>) -> RunRecord {
        RunRecord::new(variant.into(), seed, curve, 1.0).unwrap()
    }

    #[test]
    fn first_crossing_semantics() {
        assert_eq!(
            evaluations_to_goal(&[(10_000, -0.5), (40_000, 0.0), (50_000, 0.0)]),
            Some(40_000)
        );
        assert_eq!(evaluations_to_goal(&[(10_000, -0.5), (20_000, -0.1)]), None);
        assert_eq!(evaluations_to_goal(&[(64, 0.0), (128, 0.0)]), Some(64));
    }

    #[test]
    fn non_increasing_curve_rejected() {
        assert!(RunRecord::new("x".into(), 0, vec![(10, -1.0), (10, -0.5)], 0.0).is_err());
    }

    #[test]
    fn unfinished_runs_rank_past_the_budget() {
        let r = record("x", 0, vec![(64, -0.5)]);
        assert_eq!(r.goal_metric(1000), 1001.0);
        let done = record("x", 1, vec![(64, 0.0)]);
        assert_eq!(done.goal_metric(1000), 64.0);
    }

    #[test]
    fn curves_csv_round_trips() {
        let records = vec![
            record("a", 0, vec![(64, -0.9), (128, -0.4), (192, 0.0)]),
            record("a", 1, vec![(64, -1.1), (128, -1.1)]),
            record("b", 7, vec![(64, -0.2)]),
        ];
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("curves.csv");
        write_curves_csv(&path, &records).unwrap();
        let back = read_curves_csv(&path).unwrap();
        assert_eq!(back.len(), records.len());
        for (orig, parsed) in records.iter().zip(&back) {
            assert_eq!(orig.curve, parsed.curve);
            assert_eq!(orig.evaluations_to_goal, parsed.evaluations_to_goal);
        }
    }

    #[test]
    fn aggregate_counts_pairs_and_orders_adjustments() {
        let mut records = Vec::new();
        for s in 0..4 {
            records.push(record("fast", s, vec![(64, -0.5), (128, 0.0)]));
            records.push(record("slow", s, vec![(64, -0.5), (128, -0.2)]));
            records.push(record("mid", s, vec![(64, -0.5), (128, if s < 2 { 0.0 } else { -0.1 })]));
        }
        let report = aggregate(&records, 128, Vec::new()).unwrap();
        assert_eq!(report.variants.len(), 3);
        assert_eq!(report.comparisons.len(), 3);
        for c in &report.comparisons {
            assert!(c.p_adjusted >= c.p_raw);
        }
        let fast = report.variants.iter().find(|v| v.variant == "fast").unwrap();
        assert_eq!(fast.goal_reached, 4);
        assert_eq!(fast.median_evals_to_goal, 128.0);
        let slow = report.variants.iter().find(|v| v.variant == "slow").unwrap();
        assert_eq!(slow.goal_reached, 0);
        assert_eq!(slow.median_evals_to_goal, 129.0);
    }

    fn tiny_base() -> AlgorithmConfig {
        AlgorithmConfig {
            task: TaskSpec::PointMaze,
            batch_size: 8,
            total_evaluations: 64,
            repertoire_capacity: 16,
            num_centroids: 32,
            population_size: 32,
            latent_dim: 3,
            encoder_hidden: 6,
            train: TrainConfig {
                max_epochs: 10,
                base_interval: 5,
                ..TrainConfig::default()
            },
            ..AlgorithmConfig::default()
        }
    }

    #[test]
    fn experiment_layout_and_resume() {
        let dir = tempfile::tempdir().unwrap();
        let out = dir.path().join("exp");
        let variants = vec!["ga".to_string(), "aurora_xcon".to_string()];
        let seeds = vec![0, 1, 2];
        let report = run_experiment(&tiny_base(), &variants, &seeds, &out).unwrap();
        assert_eq!(report.variants.len(), 2);
        assert_eq!(report.comparisons.len(), 1);
        assert!(report.failures.is_empty());
        for v in &variants {
            for s in &seeds {
                assert!(out.join(v).join(format!("seed_{s}")).join("metrics.csv").exists());
            }
        }
        assert!(out.join("curves.csv").exists());
        assert!(out.join("report.json").exists());

        // Resuming must not rewrite completed run directories.
        let stamp = |p: &Path| std::fs::metadata(p).unwrap().modified().unwrap();
        let probe = out.join("ga").join("seed_0").join("metrics.csv");
        let before = stamp(&probe);
        std::thread::sleep(std::time::Duration::from_millis(20));
        run_experiment(&tiny_base(), &variants, &seeds, &out).unwrap();
        assert_eq!(stamp(&probe), before);
    }

    #[test]
    fn same_variant_under_two_names_is_not_significant() {
        // Null self-test: identical configurations under different labels
        // should rarely reach significance. With identical seeds the runs
        // are bit-identical, so the test is exactly p = 1.
        let mut records = Vec::new();
        for s in 0..5 {
            let curve = vec![(64, -0.5), (128, -0.3 + s as f64 * 0.01)];
            records.push(record("left", s, curve.clone()));
            records.push(record("right", s, curve));
        }
        let report = aggregate(&records, 128, Vec::new()).unwrap();
        assert!(!report.comparisons[0].significant);
    }

    #[test]
    fn unknown_variant_is_an_error() {
        let dir = tempfile::tempdir().unwrap();
        let r = run_experiment(
            &tiny_base(),
            &["warp_drive".to_string()],
            &[0],
            &dir.path().join("exp"),
        );
        assert!(r.is_err());
    }
}
