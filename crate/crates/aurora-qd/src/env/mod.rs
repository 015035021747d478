//! Deceptive environments, policies, rollouts and feature extractors.

pub mod features;
pub mod geometry;
pub mod maze;
pub mod point_maze;
pub mod policy;
pub mod task;

pub use features::{extract_feature, FeatureKind, RandomDimsSpec};
pub use maze::{laser_cast, maze_step, run_episode, DriveParams, EpisodeResult, MazeWorld, RobotState};
pub use point_maze::{point_maze_episode, PointMaze};
pub use policy::PolicyNet;
pub use task::{MazeTask, PointMazeTask, Task, TaskSpec};
