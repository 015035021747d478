//! Synthetic point-maze testbed: a velocity-controlled point agent in a
//! U-shaped wall map. Much faster than the robot maze, same deceptive
//! structure and the same fitness convention.

use crate::env::geometry::{segment_segment_intersection, Segment};
use crate::env::maze::{goal_fitness, EpisodeResult, MazeWorld};
use crate::env::policy::PolicyNet;
use crate::error::Result;
use crate::types::{subsample_trajectory, Genotype, StateTrajectory};

pub const POINT_MAZE_EPISODE_LEN: usize = 100;
pub const POINT_MAZE_TRAJ_ROWS: usize = 25;
pub const POINT_MAZE_OBS_DIM: usize = 2;

/// Point agent world and speed limit.
#[derive(Debug, Clone, PartialEq)]
pub struct PointMaze {
    pub world: MazeWorld,
    pub v_max: f64,
}

impl Default for PointMaze {
    fn default() -> Self {
        let world = MazeWorld {
            walls: vec![
                Segment::new((0.0, 0.0), (1.0, 0.0)),
                Segment::new((1.0, 0.0), (1.0, 1.0)),
                Segment::new((1.0, 1.0), (0.0, 1.0)),
                Segment::new((0.0, 1.0), (0.0, 0.0)),
                // U enclosure around the goal, opening upward.
                Segment::new((0.3, 0.5), (0.7, 0.5)),
                Segment::new((0.3, 0.5), (0.3, 0.8)),
                Segment::new((0.7, 0.5), (0.7, 0.8)),
            ],
            goal: (0.5, 0.65),
            goal_radius: 0.05,
            start: (0.5, 0.2, 0.0),
            episode_length: POINT_MAZE_EPISODE_LEN,
        };
        Self { world, v_max: 0.03 }
    }
}

impl PointMaze {
    /// Policy architecture evolved on this task.
    pub fn policy() -> PolicyNet {
        PolicyNet::new(vec![POINT_MAZE_OBS_DIM, 4, 2])
    }

    /// One velocity step with wall clamping.
    pub fn step(&self, pos: (f64, f64), action: [f64; 2]) -> (f64, f64) {
        let target = (
            pos.0 + action[0].clamp(-1.0, 1.0) * self.v_max,
            pos.1 + action[1].clamp(-1.0, 1.0) * self.v_max,
        );
        let mut first: Option<f64> = None;
        for wall in &self.world.walls {
            if let Some(t) = segment_segment_intersection(pos, target, wall) {
                if first.map(|bt| t < bt).unwrap_or(true) {
                    first = Some(t);
                }
            }
        }
        let t = match first {
            Some(t) => (t - 1e-6).max(0.0),
            None => 1.0,
        };
        (
            (pos.0 + t * (target.0 - pos.0)).clamp(0.0, 1.0),
            (pos.1 + t * (target.1 - pos.1)).clamp(0.0, 1.0),
        )
    }

    /// Roll out a fixed action sequence; used for scripted oracles.
    pub fn rollout_actions(&self, actions: &[[f64; 2]]) -> (f64, f64) {
        let mut pos = (self.world.start.0, self.world.start.1);
        for &a in actions {
            pos = self.step(pos, a);
        }
        pos
    }

    /// Deterministic policy rollout; trajectory rows are the agent's
    /// position after each step.
    pub fn episode(&self, genotype: &Genotype, t_s: usize) -> Result<EpisodeResult> {
        let policy = Self::policy();
        let steps = self.world.episode_length;
        let mut pos = (self.world.start.0, self.world.start.1);
        let mut full = Vec::with_capacity(steps * POINT_MAZE_OBS_DIM);
        for _ in 0..steps {
            let out = policy.forward(genotype, &[pos.0, pos.1])?;
            pos = self.step(pos, [out[0], out[1]]);
            full.push(pos.0);
            full.push(pos.1);
        }
        let trajectory: StateTrajectory =
            subsample_trajectory(&full, steps, POINT_MAZE_OBS_DIM, t_s)?;
        let fitness = goal_fitness(pos, &self.world);
        Ok(EpisodeResult {
            fitness,
            trajectory,
            final_position: pos,
            goal_reached: fitness == 0.0,
            bumper_means: (0.0, 0.0),
            laser_means: [0.0; 3],
        })
    }
}

/// Episode on the default point maze with the default subsample length.
pub fn point_maze_episode(genotype: &Genotype, t_s: usize) -> Result<EpisodeResult> {
    PointMaze::default().episode(genotype, t_s)
}
