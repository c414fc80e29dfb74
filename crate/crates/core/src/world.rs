//! Moving disk obstacles, observation snapshots, snapshot diffs and the
//! collision predicates used by the planners.
//!
//! An observation turns each obstacle into a prediction: the position and
//! velocity seen at `t_now`, extrapolated at constant velocity. In the
//! geometric space the prediction is frozen at `t_now` (velocity zero), so
//! every motion produces a new prediction. In the timed spaces a prediction
//! only changes when the observed velocity does, which is when a diff fires.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::statespace::{Motion, Trajectory};

/// Quantization step of the prediction identity key.
const KEY_QUANTUM: f64 = 1e-6;

/// Constant-speed back-and-forth motion along a polyline. A single
/// waypoint, or zero speed, is a static obstacle.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MotionSpec {
    pub waypoints: Vec<[f64; 2]>,
    #[serde(default)]
    pub speed: f64,
}

impl MotionSpec {
    pub fn fixed(at: [f64; 2]) -> Self {
        Self { waypoints: vec![at], speed: 0.0 }
    }

    pub fn shuttle(a: [f64; 2], b: [f64; 2], speed: f64) -> Self {
        Self { waypoints: vec![a, b], speed }
    }

    fn length(&self) -> f64 {
        self.waypoints.windows(2).map(|w| dist(w[0], w[1])).sum()
    }

    /// Position and velocity at absolute time `t`.
    pub fn state_at(&self, t: f64) -> ([f64; 2], [f64; 2]) {
        let total = self.length();
        if self.waypoints.len() < 2 || self.speed == 0.0 || total == 0.0 {
            return (self.waypoints[0], [0.0, 0.0]);
        }
        // triangle wave in arc length with period 2L
        let mut s = (self.speed * t).rem_euclid(2.0 * total);
        let mut dir = 1.0;
        if s > total {
            s = 2.0 * total - s;
            dir = -1.0;
        }
        let mut acc = 0.0;
        let last = self.waypoints.len() - 2;
        for (i, w) in self.waypoints.windows(2).enumerate() {
            let len = dist(w[0], w[1]);
            if len == 0.0 && i < last {
                continue;
            }
            if s <= acc + len || i == last {
                let u = if len > 0.0 { ((s - acc) / len).clamp(0.0, 1.0) } else { 0.0 };
                let d = [w[1][0] - w[0][0], w[1][1] - w[0][1]];
                let pos = [w[0][0] + u * d[0], w[0][1] + u * d[1]];
                let k = if len > 0.0 { dir * self.speed / len } else { 0.0 };
                return (pos, [k * d[0], k * d[1]]);
            }
            acc += len;
        }
        unreachable!("polyline has at least one segment")
    }

    pub fn max_speed(&self) -> f64 {
        if self.waypoints.len() < 2 {
            0.0
        } else {
            self.speed
        }
    }
}

fn dist(a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - b[0]).hypot(a[1] - b[1])
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Obstacle {
    pub id: u32,
    pub radius: f64,
    #[serde(default)]
    pub inflation: f64,
    pub motion: MotionSpec,
}

impl Obstacle {
    pub fn effective_radius(&self) -> f64 {
        self.radius + self.inflation
    }

    pub fn validate(&self, field: &str) -> Result<()> {
        if !(self.radius > 0.0 && self.radius.is_finite()) {
            return Err(Error::config(format!("{field}.radius"), "must be positive and finite"));
        }
        if !(self.inflation >= 0.0 && self.inflation.is_finite()) {
            return Err(Error::config(format!("{field}.inflation"), "must be nonnegative and finite"));
        }
        if self.motion.waypoints.is_empty() {
            return Err(Error::config(format!("{field}.motion.waypoints"), "needs at least one waypoint"));
        }
        if self.motion.waypoints.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::config(format!("{field}.motion.waypoints"), "coordinates must be finite"));
        }
        if !(self.motion.speed >= 0.0 && self.motion.speed.is_finite()) {
            return Err(Error::config(format!("{field}.motion.speed"), "must be nonnegative and finite"));
        }
        Ok(())
    }
}

/// Identity of one prediction: equal keys mean the same obstacle moving
/// along the same predicted line.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ObstacleKey {
    pub id: u32,
    anchor: [i64; 2],
    velocity: [i64; 2],
    radius: i64,
}

fn quantize(v: f64) -> i64 {
    (v / KEY_QUANTUM).round() as i64
}

/// An obstacle as seen at one observation, extrapolated at constant
/// velocity.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ObstaclePrediction {
    pub id: u32,
    pub t_obs: f64,
    pub position: [f64; 2],
    pub velocity: [f64; 2],
    /// Radius including the inflation margin.
    pub radius: f64,
}

impl ObstaclePrediction {
    pub fn fixed(id: u32, position: [f64; 2], radius: f64) -> Self {
        Self { id, t_obs: 0.0, position, velocity: [0.0, 0.0], radius }
    }

    pub fn position_at(&self, t: f64) -> [f64; 2] {
        let dt = t - self.t_obs;
        [self.position[0] + self.velocity[0] * dt, self.position[1] + self.velocity[1] * dt]
    }

    pub fn speed(&self) -> f64 {
        self.velocity[0].hypot(self.velocity[1])
    }

    /// The key uses the position extrapolated back to `t = 0`, so two
    /// observations of the same straight-line motion share it.
    pub fn key(&self) -> ObstacleKey {
        let a = self.position_at(0.0);
        ObstacleKey {
            id: self.id,
            anchor: [quantize(a[0]), quantize(a[1])],
            velocity: [quantize(self.velocity[0]), quantize(self.velocity[1])],
            radius: quantize(self.radius),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct ObstacleSnapshot {
    pub t_now: f64,
    obstacles: BTreeMap<ObstacleKey, ObstaclePrediction>,
}

impl ObstacleSnapshot {
    pub fn new(t_now: f64, predictions: impl IntoIterator<Item = ObstaclePrediction>) -> Self {
        let obstacles = predictions.into_iter().map(|p| (p.key(), p)).collect();
        Self { t_now, obstacles }
    }

    pub fn empty() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.obstacles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.obstacles.is_empty()
    }

    pub fn predictions(&self) -> impl Iterator<Item = &ObstaclePrediction> {
        self.obstacles.values()
    }

    pub fn contains(&self, key: &ObstacleKey) -> bool {
        self.obstacles.contains_key(key)
    }

    pub fn get(&self, key: &ObstacleKey) -> Option<&ObstaclePrediction> {
        self.obstacles.get(key)
    }

    pub fn insert(&mut self, p: ObstaclePrediction) {
        self.obstacles.insert(p.key(), p);
    }

    pub fn remove(&mut self, key: &ObstacleKey) -> Option<ObstaclePrediction> {
        self.obstacles.remove(key)
    }

    pub fn keys(&self) -> impl Iterator<Item = &ObstacleKey> {
        self.obstacles.keys()
    }

    /// Apply a diff: drop `minus`, then add `plus`.
    pub fn apply(&mut self, d: &WorldDiff) {
        for p in &d.minus {
            self.obstacles.remove(&p.key());
        }
        for p in &d.plus {
            self.insert(*p);
        }
    }

    /// Same set under the identity key (observation times may differ).
    pub fn same_set(&self, other: &Self) -> bool {
        self.obstacles.keys().eq(other.obstacles.keys())
    }
}

/// Obstacle predictions that appeared and vanished between two snapshots.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct WorldDiff {
    pub plus: Vec<ObstaclePrediction>,
    pub minus: Vec<ObstaclePrediction>,
}

impl WorldDiff {
    pub fn is_empty(&self) -> bool {
        self.plus.is_empty() && self.minus.is_empty()
    }
}

pub fn diff(prev: &ObstacleSnapshot, new: &ObstacleSnapshot) -> WorldDiff {
    let plus = new.obstacles.iter().filter(|(k, _)| !prev.obstacles.contains_key(k)).map(|(_, p)| *p).collect();
    let minus = prev.obstacles.iter().filter(|(k, _)| !new.obstacles.contains_key(k)).map(|(_, p)| *p).collect();
    WorldDiff { plus, minus }
}

/// The obstacle set and its motion model.
#[derive(Clone, Debug, PartialEq)]
pub struct World {
    obstacles: Vec<Obstacle>,
    timed: bool,
    lookahead: f64,
}

impl World {
    /// `timed` selects state-time predictions; otherwise each observation is
    /// a static picture of the current positions.
    pub fn new(obstacles: Vec<Obstacle>, timed: bool) -> Self {
        Self { obstacles, timed, lookahead: 0.0 }
    }

    /// Grow each geometric prediction by the distance its obstacle can
    /// cover in `seconds`, so a plan made against one observation stays
    /// clear until the next. Timed predictions are unaffected.
    pub fn with_lookahead(mut self, seconds: f64) -> Self {
        assert!(seconds >= 0.0);
        self.lookahead = seconds;
        self
    }

    pub fn obstacles(&self) -> &[Obstacle] {
        &self.obstacles
    }

    pub fn is_timed(&self) -> bool {
        self.timed
    }

    pub fn observe(&self, t_now: f64) -> ObstacleSnapshot {
        let preds = self.obstacles.iter().map(|o| {
            let (position, velocity) = o.motion.state_at(t_now);
            let (velocity, radius) = if self.timed {
                (velocity, o.effective_radius())
            } else {
                ([0.0, 0.0], o.effective_radius() + o.motion.max_speed() * self.lookahead)
            };
            ObstaclePrediction { id: o.id, t_obs: t_now, position, velocity, radius }
        });
        ObstacleSnapshot::new(t_now, preds)
    }

    /// True positions and effective radii at time `t`.
    pub fn positions_at(&self, t: f64) -> Vec<(u32, [f64; 2], f64)> {
        self.obstacles.iter().map(|o| (o.id, o.motion.state_at(t).0, o.effective_radius())).collect()
    }

    /// Obstacles whose effective disk contains `p` at time `t`.
    pub fn occupied_by(&self, p: [f64; 2], t: f64) -> Vec<u32> {
        self.positions_at(t).into_iter().filter(|(_, c, r)| dist(*c, p) < *r).map(|(id, _, _)| id).collect()
    }
}

fn point_segment_distance(p: [f64; 2], a: [f64; 2], b: [f64; 2]) -> f64 {
    let d = [b[0] - a[0], b[1] - a[1]];
    let len_sq = d[0] * d[0] + d[1] * d[1];
    let u = if len_sq > 0.0 {
        (((p[0] - a[0]) * d[0] + (p[1] - a[1]) * d[1]) / len_sq).clamp(0.0, 1.0)
    } else {
        0.0
    };
    dist(p, [a[0] + u * d[0], a[1] + u * d[1]])
}

/// Whether `traj` comes within the effective radius of `obs`, comparing
/// each point of the trajectory with the obstacle's predicted position at
/// the same time.
///
/// Straight motions are resolved exactly, since the relative motion of a
/// line and a constant-velocity disk is itself linear. Curved motions are
/// sampled so consecutive samples of the relative motion are at most
/// `spacing` apart.
pub fn edge_blocked(traj: &Trajectory, obs: &ObstaclePrediction, spacing: f64) -> bool {
    let a = &traj.start;
    let b = &traj.end;
    let r = obs.radius;
    let duration = traj.duration();
    let reach = traj.spatial_length_bound();
    // cheap rejection: the trajectory stays within `reach` of its start while
    // the obstacle sweeps a segment over the same time span
    let o0 = obs.position_at(a.t);
    let o1 = obs.position_at(a.t + duration);
    if point_segment_distance(a.position(), o0, o1) > reach + r {
        return false;
    }
    match &traj.motion {
        Motion::Stationary => dist(a.position(), o0) <= r,
        Motion::Line => {
            let d0 = [a.x - o0[0], a.y - o0[1]];
            let w = [(b.x - a.x) - obs.velocity[0] * duration, (b.y - a.y) - obs.velocity[1] * duration];
            let ww = w[0] * w[0] + w[1] * w[1];
            let u = if ww > 0.0 { (-(d0[0] * w[0] + d0[1] * w[1]) / ww).clamp(0.0, 1.0) } else { 0.0 };
            (d0[0] + u * w[0]).hypot(d0[1] + u * w[1]) <= r
        }
        _ => {
            assert!(spacing > 0.0, "sample spacing must be positive");
            let relative = reach + obs.speed() * duration;
            let pieces = (relative / spacing).ceil().max(1.0) as usize;
            (0..=pieces).any(|i| {
                let s = traj.state_at_fraction(i as f64 / pieces as f64);
                dist(s.position(), obs.position_at(s.t)) <= r
            })
        }
    }
}

/// First obstacle (in key order) blocking `traj`, if any. Adds one to
/// `checks`.
pub fn first_blocker(traj: &Trajectory, snapshot: &ObstacleSnapshot, spacing: f64, checks: &mut u64) -> Option<ObstacleKey> {
    *checks += 1;
    snapshot.obstacles.iter().find(|(_, o)| edge_blocked(traj, o, spacing)).map(|(k, _)| *k)
}

/// Whether `traj` avoids every obstacle of the snapshot. Adds one to
/// `checks`.
pub fn collision_free(traj: &Trajectory, snapshot: &ObstacleSnapshot, spacing: f64, checks: &mut u64) -> bool {
    first_blocker(traj, snapshot, spacing, checks).is_none()
}

/// Whether the distance between `traj` and `obs` never decreases.
fn recedes_from(traj: &Trajectory, obs: &ObstaclePrediction, spacing: f64) -> bool {
    let a = &traj.start;
    let o0 = obs.position_at(a.t);
    match &traj.motion {
        Motion::Stationary => true,
        Motion::Line => {
            // squared distance is a convex quadratic along the edge
            let duration = traj.duration();
            let b = &traj.end;
            let d0 = [a.x - o0[0], a.y - o0[1]];
            let w = [(b.x - a.x) - obs.velocity[0] * duration, (b.y - a.y) - obs.velocity[1] * duration];
            d0[0] * w[0] + d0[1] * w[1] >= 0.0
        }
        _ => {
            let relative = traj.spatial_length_bound() + obs.speed() * traj.duration();
            let pieces = (relative / spacing).ceil().max(1.0) as usize;
            let mut last = dist(a.position(), o0);
            (1..=pieces).all(|i| {
                let s = traj.state_at_fraction(i as f64 / pieces as f64);
                let d = dist(s.position(), obs.position_at(s.t));
                let ok = d >= last - 1e-12;
                last = d;
                ok
            })
        }
    }
}

/// Collision test for a connection that starts at the robot's actual state.
/// An obstacle that already covers the start does not block the connection
/// as long as the connection only moves away from it. Adds one to `checks`.
pub fn escape_free(traj: &Trajectory, snapshot: &ObstacleSnapshot, spacing: f64, checks: &mut u64) -> bool {
    *checks += 1;
    let a = &traj.start;
    snapshot.obstacles.values().all(|o| {
        if dist(a.position(), o.position_at(a.t)) <= o.radius {
            recedes_from(traj, o, spacing)
        } else {
            !edge_blocked(traj, o, spacing)
        }
    })
}
