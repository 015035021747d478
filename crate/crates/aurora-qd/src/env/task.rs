//! Task abstraction binding an environment, a policy architecture and the
//! trajectory subsample length into one evaluation function.

use serde::{Deserialize, Serialize};

use crate::env::maze::{run_episode, DriveParams, EpisodeResult, MazeWorld, OBS_DIM};
use crate::env::point_maze::{PointMaze, POINT_MAZE_OBS_DIM, POINT_MAZE_TRAJ_ROWS};
use crate::env::policy::PolicyNet;
use crate::error::Result;
use crate::rng::RngStream;
use crate::types::Genotype;

/// An evaluatable control task.
pub trait Task: Sync {
    fn genotype_dim(&self) -> usize;
    /// (rows, cols) of the subsampled state trajectory.
    fn trajectory_shape(&self) -> (usize, usize);
    fn evaluate(&self, genotype: &Genotype, rng: RngStream) -> Result<EpisodeResult>;
}

/// Differential-drive robot in a walled maze.
#[derive(Debug, Clone)]
pub struct MazeTask {
    pub world: MazeWorld,
    pub policy: PolicyNet,
    pub drive: DriveParams,
    pub traj_rows: usize,
    pub start_jitter: f64,
}

impl MazeTask {
    pub fn standard() -> Self {
        Self::new(MazeWorld::standard())
    }

    pub fn new(world: MazeWorld) -> Self {
        Self {
            world,
            policy: PolicyNet::new(vec![OBS_DIM, 5, 2]),
            drive: DriveParams::default(),
            traj_rows: 50,
            start_jitter: 0.0,
        }
    }
}

impl Task for MazeTask {
    fn genotype_dim(&self) -> usize {
        self.policy.param_count()
    }

    fn trajectory_shape(&self) -> (usize, usize) {
        (self.traj_rows, OBS_DIM)
    }

    fn evaluate(&self, genotype: &Genotype, rng: RngStream) -> Result<EpisodeResult> {
        run_episode(
            &self.policy,
            genotype,
            &self.world,
            &self.drive,
            self.traj_rows,
            rng,
            self.start_jitter,
        )
    }
}

/// Velocity-controlled point agent in the U maze.
#[derive(Debug, Clone, Default)]
pub struct PointMazeTask {
    pub maze: PointMaze,
}

impl Task for PointMazeTask {
    fn genotype_dim(&self) -> usize {
        PointMaze::policy().param_count()
    }

    fn trajectory_shape(&self) -> (usize, usize) {
        (POINT_MAZE_TRAJ_ROWS, POINT_MAZE_OBS_DIM)
    }

    fn evaluate(&self, genotype: &Genotype, _rng: RngStream) -> Result<EpisodeResult> {
        self.maze.episode(genotype, POINT_MAZE_TRAJ_ROWS)
    }
}

/// Task selector as it appears in config files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case", tag = "task")]
pub enum TaskSpec {
    /// Bundled standard deceptive maze.
    #[default]
    Maze,
    /// Maze loaded from a JSON file.
    MazeFile { path: String },
    /// Synthetic point maze.
    PointMaze,
}

impl TaskSpec {
    pub fn build(&self) -> Result<Box<dyn Task>> {
        Ok(match self {
            TaskSpec::Maze => Box::new(MazeTask::standard()),
            TaskSpec::MazeFile { path } => Box::new(MazeTask::new(MazeWorld::from_file(
                std::path::Path::new(path),
            )?)),
            TaskSpec::PointMaze => Box::new(PointMazeTask::default()),
        })
    }
}
