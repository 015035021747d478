//! The three algorithm loops (GA, MAP-Elites, AURORA) and run-directory
//! emission.
//!
//! Random-stream layout per run (all under the config seed): stream 0 seeds
//! initial genotypes, 1 is the coordinator (selection, training shuffles,
//! mining, extinction), 2 resolves feature extractors and centroids, 3
//! initializes the encoder. Per-episode and per-offspring streams live in
//! disjoint high regions indexed by batch, so batch internals are
//! order-independent.

use std::io::Write;
use std::path::Path;
use std::time::Instant;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use super::config::{AlgorithmConfig, AlgorithmKind, EncoderArch, FeatureConfig};
use crate::encoder::{
    adaptive_margin, checkpoint, mine_triplets, train, update_schedule, Architecture,
    EncoderModel, TrainData,
};
use crate::env::maze::EpisodeResult;
use crate::env::{extract_feature, FeatureKind, RandomDimsSpec, Task};
use crate::error::{Error, Result};
use crate::repertoire::{cvt_centroids, BestTracker, GridRepertoire, Snapshot, UnstructuredRepertoire};
use crate::rng::RngStream;
use crate::types::{Genotype, Solution, StateTrajectory};
use crate::variation::{select_uniform, vary_batch};

const STREAM_INIT: u64 = 0;
const STREAM_MISC: u64 = 1;
const STREAM_FEATURES: u64 = 2;
const STREAM_ENCODER: u64 = 3;
const EVAL_REGION: u64 = 1 << 40;
const VAR_REGION: u64 = 1 << 41;

/// One metrics.csv row, sampled once per batch.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricsRow {
    pub evaluations: u64,
    pub max_fitness: f64,
    pub repertoire_size: usize,
    /// Final epoch loss when the encoder trained on this batch.
    pub encoder_loss: Option<f64>,
}

pub fn write_metrics_csv(path: &Path, rows: &[MetricsRow]) -> Result<()> {
    let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(f, "evaluations,max_fitness,repertoire_size,encoder_loss")?;
    for r in rows {
        let loss = r.encoder_loss.map(|l| l.to_string()).unwrap_or_default();
        writeln!(
            f,
            "{},{},{},{}",
            r.evaluations, r.max_fitness, r.repertoire_size, loss
        )?;
    }
    f.flush()?;
    Ok(())
}

pub fn read_metrics_csv(path: &Path) -> Result<Vec<MetricsRow>> {
    let text = std::fs::read_to_string(path)?;
    let mut lines = text.lines();
    match lines.next() {
        Some("evaluations,max_fitness,repertoire_size,encoder_loss") => {}
        _ => {
            return Err(Error::InvalidArgument(format!(
                "unrecognized metrics header in {}",
                path.display()
            )))
        }
    }
    let mut rows = Vec::new();
    for line in lines {
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 4 {
            return Err(Error::InvalidArgument(format!(
                "malformed metrics row: {line}"
            )));
        }
        let parse_err = |what: &str| Error::InvalidArgument(format!("bad {what} in row: {line}"));
        rows.push(MetricsRow {
            evaluations: fields[0].parse().map_err(|_| parse_err("evaluations"))?,
            max_fitness: fields[1].parse().map_err(|_| parse_err("max_fitness"))?,
            repertoire_size: fields[2].parse().map_err(|_| parse_err("repertoire_size"))?,
            encoder_loss: if fields[3].is_empty() {
                None
            } else {
                Some(fields[3].parse().map_err(|_| parse_err("encoder_loss"))?)
            },
        });
    }
    Ok(rows)
}

fn init_genotypes(dim: usize, count: usize, rng: &mut impl Rng) -> Vec<Genotype> {
    (0..count)
        .map(|_| {
            Genotype::new(
                (0..dim)
                    .map(|_| {
                        let z: f64 = rng.sample(StandardNormal);
                        0.1 * z
                    })
                    .collect(),
            )
        })
        .collect()
}

/// Evaluate a batch; episode i of batch t draws from its own stream so the
/// result is independent of evaluation order.
fn evaluate_batch(
    task: &dyn Task,
    genotypes: Vec<Genotype>,
    seed: u64,
    batch_index: u64,
    batch_size: usize,
) -> Result<Vec<(Genotype, EpisodeResult)>> {
    genotypes
        .into_iter()
        .enumerate()
        .map(|(i, g)| {
            let stream = EVAL_REGION + batch_index * batch_size as u64 + i as u64;
            let r = task.evaluate(&g, RngStream::new(seed, stream))?;
            Ok((g, r))
        })
        .collect()
}

fn offspring(
    pool: &[&Solution],
    cfg: &AlgorithmConfig,
    batch_index: u64,
    rng: &mut impl Rng,
) -> Result<Vec<Genotype>> {
    let pairs = select_uniform(pool, cfg.batch_size, rng)?;
    let geno_pairs: Vec<(&Genotype, &Genotype)> = pairs
        .iter()
        .map(|(a, b)| (&a.genotype, &b.genotype))
        .collect();
    vary_batch(
        &geno_pairs,
        &cfg.variation,
        RngStream::new(cfg.seed, VAR_REGION + batch_index * cfg.batch_size as u64),
    )
}

// ---------------------------------------------------------------------------
// GA

#[derive(Debug)]
pub struct GaRun {
    pub tracker: BestTracker,
    pub population: Vec<Solution>,
    pub metrics: Vec<MetricsRow>,
    pub evaluations: u64,
}

/// Vanilla GA: uniform selection, iso+line variation, truncation to the
/// top-N by fitness. Its container ignores features entirely.
pub fn run_ga(cfg: &AlgorithmConfig) -> Result<GaRun> {
    cfg.validate()?;
    let task = cfg.task.build()?;
    let mut misc = RngStream::new(cfg.seed, STREAM_MISC).rng();
    let mut tracker = BestTracker::new();
    let mut metrics = Vec::new();
    let mut population: Vec<Solution> = Vec::new();
    let mut evals: u64 = 0;
    let mut t: u64 = 0;

    let absorb = |population: &mut Vec<Solution>,
                      tracker: &mut BestTracker,
                      batch: Vec<(Genotype, EpisodeResult)>| {
        for (g, r) in batch {
            let s = Solution {
                genotype: g,
                fitness: r.fitness,
                feature: Vec::new(),
                trajectory: r.trajectory,
            };
            tracker.offer(&s);
            population.push(s);
        }
        population.sort_by(|a, b| b.fitness.partial_cmp(&a.fitness).unwrap());
        population.truncate(cfg.population_size);
    };

    let init = init_genotypes(
        task.genotype_dim(),
        cfg.batch_size,
        &mut RngStream::new(cfg.seed, STREAM_INIT).rng(),
    );
    let batch = evaluate_batch(&*task, init, cfg.seed, t, cfg.batch_size)?;
    evals += cfg.batch_size as u64;
    absorb(&mut population, &mut tracker, batch);
    tracker.record(evals);
    metrics.push(MetricsRow {
        evaluations: evals,
        max_fitness: tracker.max_fitness().unwrap(),
        repertoire_size: population.len(),
        encoder_loss: None,
    });

    while evals + cfg.batch_size as u64 <= cfg.total_evaluations {
        t += 1;
        let pool: Vec<&Solution> = population.iter().collect();
        let children = offspring(&pool, cfg, t, &mut misc)?;
        drop(pool);
        let batch = evaluate_batch(&*task, children, cfg.seed, t, cfg.batch_size)?;
        evals += cfg.batch_size as u64;
        absorb(&mut population, &mut tracker, batch);
        tracker.record(evals);
        metrics.push(MetricsRow {
            evaluations: evals,
            max_fitness: tracker.max_fitness().unwrap(),
            repertoire_size: population.len(),
            encoder_loss: None,
        });
    }
    Ok(GaRun {
        tracker,
        population,
        metrics,
        evaluations: evals,
    })
}

// ---------------------------------------------------------------------------
// MAP-Elites

#[derive(Debug)]
pub struct MapElitesRun {
    pub tracker: BestTracker,
    pub grid: GridRepertoire,
    pub feature_kind: FeatureKind,
    pub metrics: Vec<MetricsRow>,
    pub evaluations: u64,
}

/// CVT MAP-Elites over a hand-coded or random feature extractor.
pub fn run_map_elites(cfg: &AlgorithmConfig) -> Result<MapElitesRun> {
    cfg.validate()?;
    let task = cfg.task.build()?;
    let mut feat_rng = RngStream::new(cfg.seed, STREAM_FEATURES).rng();
    let kind = match cfg.feature {
        FeatureConfig::Xy => FeatureKind::Xy,
        FeatureConfig::Bumper => FeatureKind::Bumper,
        FeatureConfig::LaserMean => FeatureKind::LaserMean,
        FeatureConfig::RandomDims => {
            let (rows, cols) = task.trajectory_shape();
            FeatureKind::RandomDims {
                spec: RandomDimsSpec::sample(rows, cols, &mut feat_rng),
            }
        }
    };
    let bounds = kind.bounds();
    let centroids = cvt_centroids(cfg.num_centroids, kind.dim(), &bounds, &mut feat_rng);
    let mut grid = GridRepertoire::new(centroids, bounds);
    let mut misc = RngStream::new(cfg.seed, STREAM_MISC).rng();
    let mut tracker = BestTracker::new();
    let mut metrics = Vec::new();
    let mut evals: u64 = 0;
    let mut t: u64 = 0;

    let absorb = |grid: &mut GridRepertoire,
                      tracker: &mut BestTracker,
                      batch: Vec<(Genotype, EpisodeResult)>|
     -> Result<()> {
        for (g, r) in batch {
            let feature = extract_feature(&r, &kind)?;
            let s = Solution {
                genotype: g,
                fitness: r.fitness,
                feature,
                trajectory: r.trajectory,
            };
            tracker.offer(&s);
            grid.add(s)?;
        }
        Ok(())
    };

    let init = init_genotypes(
        task.genotype_dim(),
        cfg.batch_size,
        &mut RngStream::new(cfg.seed, STREAM_INIT).rng(),
    );
    let batch = evaluate_batch(&*task, init, cfg.seed, t, cfg.batch_size)?;
    evals += cfg.batch_size as u64;
    absorb(&mut grid, &mut tracker, batch)?;
    tracker.record(evals);
    metrics.push(MetricsRow {
        evaluations: evals,
        max_fitness: tracker.max_fitness().unwrap(),
        repertoire_size: grid.num_occupied(),
        encoder_loss: None,
    });

    while evals + cfg.batch_size as u64 <= cfg.total_evaluations {
        t += 1;
        let pool: Vec<&Solution> = grid.occupied().collect();
        let children = offspring(&pool, cfg, t, &mut misc)?;
        drop(pool);
        let batch = evaluate_batch(&*task, children, cfg.seed, t, cfg.batch_size)?;
        evals += cfg.batch_size as u64;
        absorb(&mut grid, &mut tracker, batch)?;
        tracker.record(evals);
        metrics.push(MetricsRow {
            evaluations: evals,
            max_fitness: tracker.max_fitness().unwrap(),
            repertoire_size: grid.num_occupied(),
            encoder_loss: None,
        });
    }
    Ok(MapElitesRun {
        tracker,
        grid,
        feature_kind: kind,
        metrics,
        evaluations: evals,
    })
}

// ---------------------------------------------------------------------------
// AURORA

#[derive(Debug)]
pub struct AuroraRun {
    pub tracker: BestTracker,
    pub repertoire: UnstructuredRepertoire,
    pub encoder: EncoderModel,
    pub metrics: Vec<MetricsRow>,
    pub evaluations: u64,
    /// Variant-gating counters: how often each optional mechanism fired.
    pub encoder_updates: u64,
    pub triplet_trainings: u64,
    pub mse_trainings: u64,
    pub extinctions: u64,
}

/// One encoder training pass on the current repertoire contents. Returns
/// the final epoch loss, or None if the repertoire is too small to mine.
fn train_on_repertoire(
    model: &mut EncoderModel,
    items: &[(StateTrajectory, f64)],
    cfg: &AlgorithmConfig,
    rng: &mut impl Rng,
) -> Result<Option<(f64, bool)>> {
    let data = if cfg.use_triplet {
        if items.len() < 3 {
            return Ok(None);
        }
        let features = items
            .iter()
            .map(|(t, _)| model.encode(t))
            .collect::<Result<Vec<_>>>()?;
        let margin = adaptive_margin(&features, model.latent_dim(), cfg.margin_mode)?;
        let triplets = mine_triplets(items, rng)?;
        TrainData::Contrastive { triplets, margin }
    } else {
        TrainData::Reconstruction(items.iter().map(|(t, _)| t.clone()).collect())
    };
    let history = train(model, &data, &cfg.train, rng)?;
    Ok(Some((*history.last().unwrap(), cfg.use_triplet)))
}

/// The AURORA loop: learned features from the trajectory auto-encoder,
/// unstructured replacement, scheduled encoder updates with re-encoding,
/// and optional extinction events.
pub fn run_aurora(cfg: &AlgorithmConfig) -> Result<AuroraRun> {
    cfg.validate()?;
    let task = cfg.task.build()?;
    let (rows, cols) = task.trajectory_shape();
    let arch = match cfg.encoder_arch {
        EncoderArch::Mlp => Architecture::Mlp {
            input_rows: rows,
            input_cols: cols,
            hidden: cfg.encoder_hidden,
            latent: cfg.latent_dim,
        },
        EncoderArch::Lstm => Architecture::Lstm {
            input_rows: rows,
            input_cols: cols,
            hidden: cfg.encoder_hidden,
            latent: cfg.latent_dim,
        },
    };
    let mut encoder = EncoderModel::init(arch, &mut RngStream::new(cfg.seed, STREAM_ENCODER).rng());
    let mut misc = RngStream::new(cfg.seed, STREAM_MISC).rng();
    let mut repertoire = UnstructuredRepertoire::new(cfg.repertoire_capacity);
    let mut tracker = BestTracker::new();
    let mut metrics = Vec::new();
    let mut evals: u64 = 0;
    let mut t: u64 = 0;
    let mut encoder_updates = 0;
    let mut triplet_trainings = 0;
    let mut mse_trainings = 0;
    let mut extinctions = 0;
    let mut schedule = update_schedule(cfg.train.base_interval).peekable();

    // Initial batch: evaluate, train the encoder once on it, then admit it.
    let init = init_genotypes(
        task.genotype_dim(),
        cfg.batch_size,
        &mut RngStream::new(cfg.seed, STREAM_INIT).rng(),
    );
    let batch = evaluate_batch(&*task, init, cfg.seed, t, cfg.batch_size)?;
    evals += cfg.batch_size as u64;
    let items: Vec<(StateTrajectory, f64)> = batch
        .iter()
        .map(|(_, r)| (r.trajectory.clone(), r.fitness))
        .collect();
    let init_loss = train_on_repertoire(&mut encoder, &items, cfg, &mut misc)?;
    if let Some((_, was_triplet)) = init_loss {
        if was_triplet {
            triplet_trainings += 1;
        } else {
            mse_trainings += 1;
        }
    }
    let admit = |repertoire: &mut UnstructuredRepertoire,
                     tracker: &mut BestTracker,
                     encoder: &EncoderModel,
                     batch: Vec<(Genotype, EpisodeResult)>|
     -> Result<()> {
        let mut candidates = Vec::with_capacity(batch.len());
        for (g, r) in batch {
            let feature = encoder.encode(&r.trajectory)?;
            let s = Solution {
                genotype: g,
                fitness: r.fitness,
                feature,
                trajectory: r.trajectory,
            };
            tracker.offer(&s);
            candidates.push(s);
        }
        repertoire.add_batch(candidates)
    };
    admit(&mut repertoire, &mut tracker, &encoder, batch)?;
    tracker.record(evals);
    metrics.push(MetricsRow {
        evaluations: evals,
        max_fitness: tracker.max_fitness().unwrap(),
        repertoire_size: repertoire.len(),
        encoder_loss: init_loss.map(|(l, _)| l),
    });

    while evals + cfg.batch_size as u64 <= cfg.total_evaluations {
        t += 1;
        let pool: Vec<&Solution> = repertoire.solutions().collect();
        let children = offspring(&pool, cfg, t, &mut misc)?;
        drop(pool);
        let batch = evaluate_batch(&*task, children, cfg.seed, t, cfg.batch_size)?;
        evals += cfg.batch_size as u64;
        admit(&mut repertoire, &mut tracker, &encoder, batch)?;

        // Scheduled encoder update: retrain, then re-encode the repertoire
        // so membership reflects the new feature space immediately.
        let mut loss = None;
        if schedule.peek() == Some(&t) {
            schedule.next();
            let items: Vec<(StateTrajectory, f64)> = repertoire
                .solutions()
                .map(|s| (s.trajectory.clone(), s.fitness))
                .collect();
            if let Some((l, was_triplet)) =
                train_on_repertoire(&mut encoder, &items, cfg, &mut misc)?
            {
                loss = Some(l);
                encoder_updates += 1;
                if was_triplet {
                    triplet_trainings += 1;
                } else {
                    mse_trainings += 1;
                }
                repertoire.reencode_all(|traj| encoder.encode(traj))?;
            }
        }
        if cfg.use_extinction && t % cfg.extinction_period == 0 {
            repertoire.extinction(cfg.extinction_proportion, &mut misc)?;
            extinctions += 1;
        }
        tracker.record(evals);
        metrics.push(MetricsRow {
            evaluations: evals,
            max_fitness: tracker.max_fitness().unwrap(),
            repertoire_size: repertoire.len(),
            encoder_loss: loss,
        });
    }
    Ok(AuroraRun {
        tracker,
        repertoire,
        encoder,
        metrics,
        evaluations: evals,
        encoder_updates,
        triplet_trainings,
        mse_trainings,
        extinctions,
    })
}

// ---------------------------------------------------------------------------
// Run directory emission

#[derive(Debug, Clone, Serialize)]
pub struct RunSummary {
    pub variant: String,
    pub seed: u64,
    pub evaluations: u64,
    pub max_fitness: f64,
    #[serde(skip)]
    pub history: Vec<(u64, f64)>,
}

#[derive(Serialize)]
struct Meta<'a> {
    seed: u64,
    variant: &'a str,
    wall_time_seconds: f64,
    evaluations: u64,
    max_fitness: f64,
}

/// Execute the configured run and write the standard run-directory layout:
/// config.json, metrics.csv, repertoire.snapshot, meta.json, and (for
/// AURORA) encoder.ckpt.
pub fn execute_run(cfg: &AlgorithmConfig, dir: &Path) -> Result<RunSummary> {
    cfg.validate()?;
    std::fs::create_dir_all(dir)?;
    std::fs::write(
        dir.join("config.json"),
        serde_json::to_string_pretty(cfg)?,
    )?;
    let started = Instant::now();
    let (metrics, snapshot, tracker, evaluations, encoder) = match cfg.algorithm {
        AlgorithmKind::Ga => {
            let run = run_ga(cfg)?;
            let snap = Snapshot {
                iteration: run.metrics.len() as u64 - 1,
                evaluations: run.evaluations,
                encoder_version: 0,
                solutions: run.population,
            };
            (run.metrics, snap, run.tracker, run.evaluations, None)
        }
        AlgorithmKind::MapElites => {
            let run = run_map_elites(cfg)?;
            let snap = Snapshot {
                iteration: run.metrics.len() as u64 - 1,
                evaluations: run.evaluations,
                encoder_version: 0,
                solutions: run.grid.occupied().cloned().collect(),
            };
            (run.metrics, snap, run.tracker, run.evaluations, None)
        }
        AlgorithmKind::Aurora => {
            let run = run_aurora(cfg)?;
            let snap = Snapshot {
                iteration: run.metrics.len() as u64 - 1,
                evaluations: run.evaluations,
                encoder_version: run.encoder.version,
                solutions: run.repertoire.solutions().cloned().collect(),
            };
            (
                run.metrics,
                snap,
                run.tracker,
                run.evaluations,
                Some(run.encoder),
            )
        }
    };
    write_metrics_csv(&dir.join("metrics.csv"), &metrics)?;
    snapshot.save(&dir.join("repertoire.snapshot"))?;
    if let Some(model) = &encoder {
        checkpoint::save(model, &dir.join("encoder.ckpt"))?;
    }
    let variant = cfg.variant_name();
    let max_fitness = tracker.max_fitness().unwrap_or(f64::NEG_INFINITY);
    let meta = Meta {
        seed: cfg.seed,
        variant: &variant,
        wall_time_seconds: started.elapsed().as_secs_f64(),
        evaluations,
        max_fitness,
    };
    std::fs::write(dir.join("meta.json"), serde_json::to_string_pretty(&meta)?)?;
    Ok(RunSummary {
        variant,
        seed: cfg.seed,
        evaluations,
        max_fitness,
        history: tracker.history,
    })
}
