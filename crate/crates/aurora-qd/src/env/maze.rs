//! Differential-drive robot in a 2D walled maze with laser and bumper
//! sensors. All coordinates live in the unit square.

use serde::{Deserialize, Serialize};

use crate::env::geometry::{ray_segment_intersection, segment_segment_intersection, Segment};
use crate::env::policy::PolicyNet;
use crate::error::{Error, Result};
use crate::rng::RngStream;
use crate::types::{subsample_trajectory, Genotype, StateTrajectory};

/// Walls, goal and start pose of a maze task.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MazeWorld {
    pub walls: Vec<Segment>,
    pub goal: (f64, f64),
    pub goal_radius: f64,
    pub start: (f64, f64, f64),
    pub episode_length: usize,
}

/// On-disk maze format: flat wall coordinates plus goal/start metadata.
#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MazeFile {
    walls: Vec<[f64; 4]>,
    goal: [f64; 2],
    goal_radius: f64,
    start: [f64; 3],
    episode_length: usize,
}

/// The bundled standard deceptive maze: the goal sits inside a walled
/// enclosure that opens away from the start, so the straight-line path is
/// always blocked.
pub const STANDARD_MAZE_JSON: &str = include_str!("../../assets/standard_maze.json");

impl MazeWorld {
    pub fn standard() -> Self {
        Self::from_json_str(STANDARD_MAZE_JSON).expect("bundled maze is valid")
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        let file: MazeFile =
            serde_json::from_str(s).map_err(|e| Error::MalformedMaze(e.to_string()))?;
        let in_unit = |v: f64| (0.0..=1.0).contains(&v);
        for w in &file.walls {
            if !w[..4].iter().all(|&v| in_unit(v)) {
                return Err(Error::MalformedMaze(format!(
                    "wall {w:?} outside unit square"
                )));
            }
        }
        if !in_unit(file.goal[0]) || !in_unit(file.goal[1]) {
            return Err(Error::MalformedMaze("goal outside unit square".into()));
        }
        if !in_unit(file.start[0]) || !in_unit(file.start[1]) {
            return Err(Error::MalformedMaze("start outside unit square".into()));
        }
        if file.goal_radius <= 0.0 {
            return Err(Error::MalformedMaze("goal_radius must be > 0".into()));
        }
        if file.episode_length == 0 {
            return Err(Error::MalformedMaze("episode_length must be > 0".into()));
        }
        Ok(Self {
            walls: file
                .walls
                .iter()
                .map(|w| Segment::new((w[0], w[1]), (w[2], w[3])))
                .collect(),
            goal: (file.goal[0], file.goal[1]),
            goal_radius: file.goal_radius,
            start: (file.start[0], file.start[1], file.start[2]),
            episode_length: file.episode_length,
        })
    }

    pub fn from_file(path: &std::path::Path) -> Result<Self> {
        Self::from_json_str(&std::fs::read_to_string(path)?)
    }

    /// True when the open segment from start to goal crosses no wall.
    pub fn straight_line_open(&self) -> bool {
        let from = (self.start.0, self.start.1);
        self.walls
            .iter()
            .all(|w| segment_segment_intersection(from, self.goal, w).is_none())
    }
}

/// Robot pose plus the bumper flags raised on the last step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RobotState {
    pub position: (f64, f64),
    pub heading: f64,
    pub bumper_left: bool,
    pub bumper_right: bool,
}

/// Differential-drive and sensor constants.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DriveParams {
    /// Max linear speed, units per step.
    pub v_max: f64,
    /// Wheel base.
    pub wheel_base: f64,
    /// Integration step.
    pub dt: f64,
    /// Laser max range; readings are normalized by this.
    pub laser_range: f64,
}

impl Default for DriveParams {
    fn default() -> Self {
        Self {
            v_max: 0.03,
            wheel_base: 0.05,
            dt: 1.0,
            laser_range: 0.25,
        }
    }
}

/// Laser beam offsets relative to the heading: -45, 0, +45 degrees.
pub const LASER_OFFSETS: [f64; 3] = [
    -std::f64::consts::FRAC_PI_4,
    0.0,
    std::f64::consts::FRAC_PI_4,
];

/// Observation dimension: three lasers plus two bumpers.
pub const OBS_DIM: usize = 5;

fn wrap_angle(theta: f64) -> f64 {
    let mut t = theta.rem_euclid(2.0 * std::f64::consts::PI);
    if t >= std::f64::consts::PI {
        t -= 2.0 * std::f64::consts::PI;
    }
    t
}

/// Normalized range reading of a laser mounted at `angle_offset` from the
/// robot heading: distance to the nearest wall along the ray, clamped to
/// `max_range` and divided by it.
pub fn laser_cast(state: &RobotState, world: &MazeWorld, angle_offset: f64, max_range: f64) -> f64 {
    assert!(max_range > 0.0);
    let angle = state.heading + angle_offset;
    let dir = (angle.cos(), angle.sin());
    let mut nearest = max_range;
    for wall in &world.walls {
        if let Some(t) = ray_segment_intersection(state.position, dir, wall) {
            if t < nearest {
                nearest = t;
            }
        }
    }
    nearest / max_range
}

pub fn observe(state: &RobotState, world: &MazeWorld, params: &DriveParams) -> [f64; OBS_DIM] {
    [
        laser_cast(state, world, LASER_OFFSETS[0], params.laser_range),
        laser_cast(state, world, LASER_OFFSETS[1], params.laser_range),
        laser_cast(state, world, LASER_OFFSETS[2], params.laser_range),
        state.bumper_left as u8 as f64,
        state.bumper_right as u8 as f64,
    ]
}

/// One differential-drive step. Wheel commands in [-1, 1] map to linear
/// speed `v = (a1 + a2)/2 * v_max` and angular speed
/// `w = (a2 - a1)/L * v_max`. Motion that would cross a wall is clamped to
/// the contact point and raises the corresponding bumper flag(s).
pub fn maze_step(
    state: &RobotState,
    action: [f64; 2],
    world: &MazeWorld,
    params: &DriveParams,
) -> (RobotState, [f64; OBS_DIM]) {
    debug_assert!(action.iter().all(|a| (-1.0..=1.0).contains(a)));
    let v = (action[0] + action[1]) / 2.0 * params.v_max;
    let omega = (action[1] - action[0]) / params.wheel_base * params.v_max;

    let (x, y) = state.position;
    let heading = state.heading;
    let step = v * params.dt;
    let target = (x + step * heading.cos(), y + step * heading.sin());

    let mut bumper_left = false;
    let mut bumper_right = false;
    let mut new_pos = target;

    if step.abs() > 0.0 {
        // First wall crossed along the motion segment, if any.
        let mut first: Option<(f64, &Segment)> = None;
        for wall in &world.walls {
            if let Some(t) = segment_segment_intersection(state.position, target, wall) {
                if first.map(|(bt, _)| t < bt).unwrap_or(true) {
                    first = Some((t, wall));
                }
            }
        }
        if let Some((t, wall)) = first {
            // Back off slightly from the contact point so the robot never
            // ends up on a wall.
            let back = (t - 1e-6 / step.abs().max(1e-9)).max(0.0);
            new_pos = (
                x + back * (target.0 - x),
                y + back * (target.1 - y),
            );
            // Impact direction relative to the heading decides the flags:
            // near head-on raises both, otherwise the facing side.
            let wall_dir = (wall.b.0 - wall.a.0, wall.b.1 - wall.a.1);
            let motion_sign = if step >= 0.0 { 1.0 } else { -1.0 };
            let h = (motion_sign * heading.cos(), motion_sign * heading.sin());
            let wall_len = (wall_dir.0 * wall_dir.0 + wall_dir.1 * wall_dir.1).sqrt();
            let along = (h.0 * wall_dir.0 + h.1 * wall_dir.1) / wall_len.max(1e-12);
            let cross = (h.0 * wall_dir.1 - h.1 * wall_dir.0) / wall_len.max(1e-12);
            if along.abs() < 0.2 {
                bumper_left = true;
                bumper_right = true;
            } else if along * cross > 0.0 {
                bumper_right = true;
            } else {
                bumper_left = true;
            }
        }
    }

    let next = RobotState {
        position: (new_pos.0.clamp(0.0, 1.0), new_pos.1.clamp(0.0, 1.0)),
        heading: wrap_angle(heading + omega * params.dt),
        bumper_left,
        bumper_right,
    };
    let obs = observe(&next, world, params);
    (next, obs)
}

/// Outcome of one episode.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeResult {
    pub fitness: f64,
    pub trajectory: StateTrajectory,
    pub final_position: (f64, f64),
    pub goal_reached: bool,
    /// Per-step bumper activations, kept for the bumper feature extractor.
    pub bumper_means: (f64, f64),
    /// Per-laser episode means, kept for the laser feature extractor.
    pub laser_means: [f64; 3],
}

/// Distance-to-goal fitness, clamped to exactly zero inside the goal radius.
pub fn goal_fitness(final_position: (f64, f64), world: &MazeWorld) -> f64 {
    let dx = final_position.0 - world.goal.0;
    let dy = final_position.1 - world.goal.1;
    let dist = (dx * dx + dy * dy).sqrt();
    if dist < world.goal_radius {
        0.0
    } else {
        -dist
    }
}

/// Deterministic rollout of a policy for the full episode length. The rng
/// drives optional start-pose jitter (`jitter` > 0); the policy itself is
/// deterministic.
pub fn run_episode(
    policy: &PolicyNet,
    genotype: &Genotype,
    world: &MazeWorld,
    params: &DriveParams,
    t_s: usize,
    rng: RngStream,
    jitter: f64,
) -> Result<EpisodeResult> {
    let mut state = RobotState {
        position: (world.start.0, world.start.1),
        heading: world.start.2,
        bumper_left: false,
        bumper_right: false,
    };
    if jitter > 0.0 {
        use rand::Rng;
        let mut r = rng.rng();
        state.position.0 = (state.position.0 + r.random_range(-jitter..=jitter)).clamp(0.0, 1.0);
        state.position.1 = (state.position.1 + r.random_range(-jitter..=jitter)).clamp(0.0, 1.0);
    }

    let steps = world.episode_length;
    let mut obs = observe(&state, world, params);
    let mut full = Vec::with_capacity(steps * OBS_DIM);
    let mut bump_acc = (0.0, 0.0);
    let mut laser_acc = [0.0; 3];
    for _ in 0..steps {
        let out = policy.forward(genotype, &obs)?;
        let action = [out[0].clamp(-1.0, 1.0), out[1].clamp(-1.0, 1.0)];
        let (next, next_obs) = maze_step(&state, action, world, params);
        state = next;
        obs = next_obs;
        full.extend_from_slice(&obs);
        bump_acc.0 += obs[3];
        bump_acc.1 += obs[4];
        for (acc, v) in laser_acc.iter_mut().zip(&obs[..3]) {
            *acc += v;
        }
    }

    let trajectory = subsample_trajectory(&full, steps, OBS_DIM, t_s)?;
    let fitness = goal_fitness(state.position, world);
    Ok(EpisodeResult {
        fitness,
        trajectory,
        final_position: state.position,
        goal_reached: fitness == 0.0,
        bumper_means: (bump_acc.0 / steps as f64, bump_acc.1 / steps as f64),
        laser_means: laser_acc.map(|v| v / steps as f64),
    })
}
