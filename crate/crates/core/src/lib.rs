//! Asymptotically optimal replanning among moving obstacles.
//!
//! A goal-rooted fast marching tree is grown once over a fixed sample set and
//! then repaired in place whenever the obstacle set changes: edges blocked by
//! new obstacles orphan their subtrees, edges freed by vanished obstacles
//! re-seed the open queue, and a cost-ordered expansion restores the tree only
//! as far as the robot's current node.
//!
//! Modules, bottom up:
//!
//! - [`statespace`]: geometric and kinodynamic spaces, steering, costs.
//! - [`spatial`]: sampling, the connection radius and cached neighbor sets.
//! - [`world`]: moving disk obstacles, snapshots, diffs, collision checks.
//! - [`planner`]: the replanning tree itself.
//! - [`oracle`]: independent reference solvers used for verification.
//! - [`sim`]: closed-loop trials and median-of-medians aggregation.
//! - [`scenario`] and [`trace`]: configuration files, presets and CSV output.
//! - [`verify`]: executable property suites over the planner and oracles.

pub mod error;
pub mod oracle;
pub mod planner;
pub mod scenario;
pub mod sim;
pub mod spatial;
pub mod statespace;
pub mod trace;
pub mod verify;
pub mod world;

pub use error::{Error, Result};
pub use planner::{NodeId, Planner, RepairMetrics};
pub use scenario::ScenarioConfig;
pub use spatial::{NeighborGraph, SampleSet};
pub use statespace::{SpaceParams, State, StateSpace, StateSpaceKind, Trajectory};
pub use world::{ObstacleSnapshot, World, WorldDiff};
