use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use aurora_qd::bench::{aggregate, load_record, run_experiment, write_curves_csv, RunRecord};
use aurora_qd::encoder::{
    latent_diagnostics, synthetic_clusters, train, Architecture, EncoderModel, TrainConfig,
    TrainData,
};
use aurora_qd::encoder::{adaptive_margin, mine_triplets, MarginMode};
use aurora_qd::engine::{execute_run, AlgorithmConfig, VARIANT_NAMES};
use aurora_qd::{Result, RngStream};

#[derive(Parser)]
#[command(
    name = "aurora-qd",
    about = "Quality-diversity optimization with learned feature spaces",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct CommonOpts {
    /// JSON config file (AlgorithmConfig schema; unknown keys rejected)
    #[arg(long)]
    config: Option<PathBuf>,
    /// Comma-separated seed list
    #[arg(long, value_delimiter = ',', default_value = "0")]
    seeds: Vec<u64>,
    /// Output directory
    #[arg(long, default_value = "runs")]
    out: PathBuf,
    /// Override the evaluation budget
    #[arg(long)]
    budget: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Execute one variant across the given seeds
    Run {
        #[command(flatten)]
        common: CommonOpts,
        /// Variant preset applied on top of the config
        #[arg(long)]
        variant: Option<String>,
    },
    /// Run a multi-variant experiment and emit report.json + curves.csv
    Compare {
        #[command(flatten)]
        common: CommonOpts,
        /// Variant to include (repeatable); defaults to all
        #[arg(long = "variant")]
        variants: Vec<String>,
    },
    /// Recompute report.json and curves.csv from existing run directories
    Stats {
        /// Experiment directory produced by `run` or `compare`
        #[arg(long, default_value = "runs")]
        out: PathBuf,
        /// Budget used to rank unfinished runs; defaults to the largest
        /// budget found in the run configs
        #[arg(long)]
        budget: Option<u64>,
    },
    /// Train both encoder objectives on synthetic clustered trajectories
    /// and report their latent structure
    DiagnoseLatent {
        /// Comma-separated seed list
        #[arg(long, value_delimiter = ',', default_value = "0")]
        seeds: Vec<u64>,
    },
}

fn base_config(common: &CommonOpts, variant: Option<&str>) -> Result<AlgorithmConfig> {
    let mut cfg = match &common.config {
        Some(path) => AlgorithmConfig::from_file(path)?,
        None => AlgorithmConfig::default(),
    };
    if let Some(name) = variant {
        let preset = AlgorithmConfig::variant(name).ok_or_else(|| {
            aurora_qd::Error::InvalidArgument(format!(
                "unknown variant '{name}' (expected one of: {})",
                VARIANT_NAMES.join(", ")
            ))
        })?;
        cfg.algorithm = preset.algorithm;
        cfg.use_triplet = preset.use_triplet;
        cfg.use_extinction = preset.use_extinction;
        cfg.feature = preset.feature;
    }
    if let Some(budget) = common.budget {
        cfg.total_evaluations = budget;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn cmd_run(common: &CommonOpts, variant: Option<&str>) -> Result<()> {
    let cfg = base_config(common, variant)?;
    let name = cfg.variant_name();
    let mut records = Vec::new();
    for &seed in &common.seeds {
        let cfg = AlgorithmConfig { seed, ..cfg.clone() };
        let dir = common.out.join(&name).join(format!("seed_{seed}"));
        let summary = execute_run(&cfg, &dir)?;
        println!(
            "{} seed {}: max fitness {} after {} evaluations -> {}",
            summary.variant,
            seed,
            summary.max_fitness,
            summary.evaluations,
            dir.display()
        );
        records.push(RunRecord::new(
            summary.variant,
            seed,
            summary.history,
            0.0,
        )?);
    }
    write_curves_csv(&common.out.join("curves.csv"), &records)?;
    Ok(())
}

fn cmd_compare(common: &CommonOpts, variants: &[String]) -> Result<()> {
    let base = base_config(common, None)?;
    let names: Vec<String> = if variants.is_empty() {
        VARIANT_NAMES.iter().map(|s| s.to_string()).collect()
    } else {
        variants.to_vec()
    };
    let report = run_experiment(&base, &names, &common.seeds, &common.out)?;
    print_report_summary(&report);
    println!("report: {}", common.out.join("report.json").display());
    Ok(())
}

fn print_report_summary(report: &aurora_qd::bench::ComparisonReport) {
    for v in &report.variants {
        println!(
            "{:>24}  median fitness {:>8.3}  evals-to-goal {:>9}  goal {}/{}",
            v.variant, v.median_final_fitness, v.median_evals_to_goal, v.goal_reached, v.seeds
        );
    }
    for c in &report.comparisons {
        println!(
            "{} vs {}: p = {:.4} (adjusted {:.4}){}",
            c.a,
            c.b,
            c.p_raw,
            c.p_adjusted,
            if c.significant { " *" } else { "" }
        );
    }
    for (variant, seed, err) in &report.failures {
        eprintln!("failed: {variant} seed {seed}: {err}");
    }
}

fn cmd_stats(out: &Path, budget: Option<u64>) -> Result<()> {
    let mut records = Vec::new();
    let mut max_budget = 0u64;
    for variant_entry in std::fs::read_dir(out)? {
        let variant_dir = variant_entry?.path();
        if !variant_dir.is_dir() {
            continue;
        }
        let variant = variant_dir
            .file_name()
            .and_then(|n| n.to_str())
            .unwrap_or_default()
            .to_string();
        for run_entry in std::fs::read_dir(&variant_dir)? {
            let run_dir = run_entry?.path();
            let name = run_dir
                .file_name()
                .and_then(|n| n.to_str())
                .unwrap_or_default();
            let Some(seed) = name.strip_prefix("seed_").and_then(|s| s.parse().ok()) else {
                continue;
            };
            if !run_dir.join("metrics.csv").exists() {
                continue;
            }
            records.push(load_record(&run_dir, &variant, seed)?);
            if let Ok(cfg) = AlgorithmConfig::from_file(&run_dir.join("config.json")) {
                max_budget = max_budget.max(cfg.total_evaluations);
            }
        }
    }
    if records.is_empty() {
        return Err(aurora_qd::Error::InvalidArgument(format!(
            "no run directories found under {}",
            out.display()
        )));
    }
    let budget = budget.unwrap_or(max_budget);
    let report = aggregate(&records, budget, Vec::new())?;
    write_curves_csv(&out.join("curves.csv"), &records)?;
    std::fs::write(
        out.join("report.json"),
        serde_json::to_string_pretty(&report)?,
    )?;
    print_report_summary(&report);
    Ok(())
}

fn cmd_diagnose_latent(seeds: &[u64]) -> Result<()> {
    const ROWS: usize = 20;
    const COLS: usize = 3;
    for &seed in seeds {
        let mut rng = RngStream::new(seed, 0).rng();
        let data = synthetic_clusters(25, ROWS, COLS, &mut rng);
        let arch = Architecture::Mlp {
            input_rows: ROWS,
            input_cols: COLS,
            hidden: 16,
            latent: 2,
        };
        let cfg = TrainConfig::default();
        let labeled: Vec<_> = data.iter().map(|(t, l, _)| (t.clone(), *l)).collect();

        let mut mse_model = EncoderModel::init(arch.clone(), &mut RngStream::new(seed, 1).rng());
        let trajectories: Vec<_> = data.iter().map(|(t, _, _)| t.clone()).collect();
        train(
            &mut mse_model,
            &TrainData::Reconstruction(trajectories),
            &cfg,
            &mut RngStream::new(seed, 2).rng(),
        )?;
        let mse_diag = latent_diagnostics(&mse_model, &labeled)?;

        let mut tri_model = EncoderModel::init(arch.clone(), &mut RngStream::new(seed, 1).rng());
        let items: Vec<_> = data.iter().map(|(t, _, f)| (t.clone(), *f)).collect();
        let mut tri_rng = RngStream::new(seed, 2).rng();
        let features: Vec<Vec<f64>> = items
            .iter()
            .map(|(t, _)| tri_model.encode(t))
            .collect::<Result<_>>()?;
        let margin = adaptive_margin(&features, tri_model.latent_dim(), MarginMode::default())?;
        let triplets = mine_triplets(&items, &mut tri_rng)?;
        train(
            &mut tri_model,
            &TrainData::Contrastive { triplets, margin },
            &cfg,
            &mut tri_rng,
        )?;
        let tri_diag = latent_diagnostics(&tri_model, &labeled)?;

        println!(
            "seed {seed}: silhouette mse {:.4}, triplet {:.4}{}",
            mse_diag.silhouette,
            tri_diag.silhouette,
            if tri_diag.silhouette > mse_diag.silhouette {
                "  (triplet better)"
            } else {
                ""
            }
        );
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // Help/version requests are successes; anything else is usage.
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let result = match &cli.command {
        Command::Run { common, variant } => cmd_run(common, variant.as_deref()),
        Command::Compare { common, variants } => cmd_compare(common, variants),
        Command::Stats { out, budget } => cmd_stats(out, *budget),
        Command::DiagnoseLatent { seeds } => cmd_diagnose_latent(seeds),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(aurora_qd::Error::InvalidArgument(msg))
        | Err(aurora_qd::Error::MalformedConfig(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
