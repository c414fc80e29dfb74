//! State spaces, steering and trajectory interpolation.
//!
//! Four spaces are supported. [`StateSpaceKind::Euclid2D`] is purely
//! geometric and its cost is arc length. The three timed spaces carry an
//! absolute time coordinate and their cost is trajectory duration, which
//! makes every connection directional: a trajectory can only run forward in
//! time.
//!
//! A state whose time is `f64::INFINITY` is a *free-time* target. Steering to
//! it picks the earliest feasible arrival. The goal of a timed problem is
//! stored this way, so the tree root does not pin an arrival time.

pub mod dubins;
pub mod thruster;

use std::f64::consts::{PI, TAU};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use dubins::DubinsPath;
use thruster::AxisProfile;

/// Default spacing (m) between collision-check samples along a trajectory.
pub const DEFAULT_CHECK_SPACING: f64 = 0.25;

const ENDPOINT_EPS: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum StateSpaceKind {
    /// Planar points `(x, y)`.
    #[serde(rename = "euclid2d")]
    Euclid2D,
    /// Planar points with time `(x, y, t)`.
    #[serde(rename = "holonomic")]
    HolonomicTime,
    /// Pose with heading and time `(x, y, θ, t)`.
    #[serde(rename = "dubins")]
    DubinsTime,
    /// Position, velocity and time `(x, y, vx, vy, t)`.
    #[serde(rename = "thruster")]
    ThrusterTime,
}

impl StateSpaceKind {
    pub fn dimension(self) -> usize {
        match self {
            Self::Euclid2D => 2,
            Self::HolonomicTime => 3,
            Self::DubinsTime => 4,
            Self::ThrusterTime => 5,
        }
    }

    pub fn is_timed(self) -> bool {
        !matches!(self, Self::Euclid2D)
    }

    pub fn label(self) -> &'static str {
        match self {
            Self::Euclid2D => "euclid2d",
            Self::HolonomicTime => "holonomic",
            Self::DubinsTime => "dubins",
            Self::ThrusterTime => "thruster",
        }
    }
}

/// A point in any of the supported spaces.
///
/// Unused coordinates are zero: `heading` is only meaningful for the Dubins
/// space and `vx`/`vy` only for the thruster space. `t` is zero for
/// [`StateSpaceKind::Euclid2D`].
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct State {
    pub x: f64,
    pub y: f64,
    #[serde(default)]
    pub heading: f64,
    #[serde(default)]
    pub vx: f64,
    #[serde(default)]
    pub vy: f64,
    #[serde(default)]
    pub t: f64,
}

impl State {
    pub fn xy(x: f64, y: f64) -> Self {
        Self { x, y, ..Self::default() }
    }

    pub fn xyt(x: f64, y: f64, t: f64) -> Self {
        Self { x, y, t, ..Self::default() }
    }

    pub fn pose(x: f64, y: f64, heading: f64, t: f64) -> Self {
        Self { x, y, heading: normalize_angle(heading), t, ..Self::default() }
    }

    pub fn thruster(x: f64, y: f64, vx: f64, vy: f64, t: f64) -> Self {
        Self { x, y, vx, vy, t, ..Self::default() }
    }

    pub fn position(&self) -> [f64; 2] {
        [self.x, self.y]
    }

    pub fn distance_to(&self, other: &State) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    pub fn is_free_time(&self) -> bool {
        self.t == f64::INFINITY
    }

    /// Copy of this state with a free (unpinned) arrival time.
    pub fn with_free_time(mut self) -> Self {
        self.t = f64::INFINITY;
        self
    }
}

/// Map an angle onto `[0, 2π)`.
pub fn normalize_angle(a: f64) -> f64 {
    let r = a.rem_euclid(TAU);
    if r >= TAU {
        0.0
    } else {
        r
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpaceParams {
    /// Arena extent along x (m).
    pub x: [f64; 2],
    /// Arena extent along y (m).
    pub y: [f64; 2],
    /// Per-axis velocity bounds for the thruster space (m/s).
    #[serde(default = "default_velocity_bounds")]
    pub velocity: [f64; 2],
    /// Planning horizon (s). Sampled times lie in `[0, t_max]`.
    #[serde(default = "default_t_max")]
    pub t_max: f64,
    #[serde(default = "default_v_max")]
    pub v_max: f64,
    #[serde(default = "default_v_min")]
    pub v_min: f64,
    /// Minimum turning radius of the Dubins vehicle (m).
    #[serde(default = "default_rho_min")]
    pub rho_min: f64,
    #[serde(default = "default_a_max")]
    pub a_max: f64,
}

fn default_velocity_bounds() -> [f64; 2] {
    [-10.0, 10.0]
}
fn default_t_max() -> f64 {
    60.0
}
fn default_v_max() -> f64 {
    10.0
}
fn default_v_min() -> f64 {
    0.0
}
fn default_rho_min() -> f64 {
    2.0
}
fn default_a_max() -> f64 {
    5.0
}

impl Default for SpaceParams {
    fn default() -> Self {
        Self {
            x: [-50.0, 50.0],
            y: [-50.0, 50.0],
            velocity: default_velocity_bounds(),
            t_max: default_t_max(),
            v_max: default_v_max(),
            v_min: default_v_min(),
            rho_min: default_rho_min(),
            a_max: default_a_max(),
        }
    }
}

impl SpaceParams {
    pub fn arena(x: [f64; 2], y: [f64; 2]) -> Self {
        Self { x, y, ..Self::default() }
    }

    /// Check the parameter invariants. Field paths in errors are relative to
    /// the parameter block, prefixed with `prefix`.
    pub fn validate(&self, prefix: &str) -> Result<()> {
        let range = |name: &str, r: [f64; 2]| -> Result<()> {
            if !(r[0].is_finite() && r[1].is_finite()) {
                return Err(Error::config(format!("{prefix}.{name}"), "bounds must be finite"));
            }
            if r[0] >= r[1] {
                return Err(Error::config(format!("{prefix}.{name}"), "lower bound must be below upper bound"));
            }
            Ok(())
        };
        range("x", self.x)?;
        range("y", self.y)?;
        range("velocity", self.velocity)?;
        let positive = |name: &str, v: f64| -> Result<()> {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::config(format!("{prefix}.{name}"), "must be positive and finite"))
            }
        };
        positive("t_max", self.t_max)?;
        positive("v_max", self.v_max)?;
        positive("rho_min", self.rho_min)?;
        positive("a_max", self.a_max)?;
        if !(self.v_min >= 0.0 && self.v_min <= self.v_max) {
            return Err(Error::config(format!("{prefix}.v_min"), "must satisfy 0 <= v_min <= v_max"));
        }
        Ok(())
    }
}

/// A space kind together with its parameters. Pure and freely shareable.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StateSpace {
    pub kind: StateSpaceKind,
    pub params: SpaceParams,
}

impl StateSpace {
    pub fn new(kind: StateSpaceKind, params: SpaceParams) -> Result<Self> {
        params.validate("params")?;
        Ok(Self { kind, params })
    }

    pub fn dimension(&self) -> usize {
        self.kind.dimension()
    }

    pub fn is_timed(&self) -> bool {
        self.kind.is_timed()
    }

    /// Whether `s` lies inside the sampling bounds. Free-time states pass the
    /// time check.
    pub fn contains(&self, s: &State) -> bool {
        let p = &self.params;
        let inside = |v: f64, r: [f64; 2]| v >= r[0] && v <= r[1];
        if !(inside(s.x, p.x) && inside(s.y, p.y)) {
            return false;
        }
        match self.kind {
            StateSpaceKind::Euclid2D => true,
            StateSpaceKind::HolonomicTime | StateSpaceKind::DubinsTime => {
                s.is_free_time() || (s.t >= 0.0 && s.t <= p.t_max)
            }
            StateSpaceKind::ThrusterTime => {
                inside(s.vx, p.velocity)
                    && inside(s.vy, p.velocity)
                    && (s.is_free_time() || (s.t >= 0.0 && s.t <= p.t_max))
            }
        }
    }

    /// Draw one state uniformly from the bounded space.
    pub fn sample_uniform<R: Rng + ?Sized>(&self, rng: &mut R) -> State {
        let p = &self.params;
        let x = rng.gen_range(p.x[0]..p.x[1]);
        let y = rng.gen_range(p.y[0]..p.y[1]);
        match self.kind {
            StateSpaceKind::Euclid2D => State::xy(x, y),
            StateSpaceKind::HolonomicTime => State::xyt(x, y, rng.gen_range(0.0..p.t_max)),
            StateSpaceKind::DubinsTime => {
                let th = rng.gen_range(0.0..TAU);
                State::pose(x, y, th, rng.gen_range(0.0..p.t_max))
            }
            StateSpaceKind::ThrusterTime => {
                let vx = rng.gen_range(p.velocity[0]..p.velocity[1]);
                let vy = rng.gen_range(p.velocity[0]..p.velocity[1]);
                State::thruster(x, y, vx, vy, rng.gen_range(0.0..p.t_max))
            }
        }
    }

    /// Lebesgue measure of the sampling domain, with every non-spatial
    /// coordinate converted to metres so the radius rule sees a homogeneous
    /// space: time by `v_max`, heading by `rho_min` and velocity by the time
    /// needed to change it at `a_max`.
    pub fn measure(&self) -> f64 {
        let p = &self.params;
        let area = (p.x[1] - p.x[0]) * (p.y[1] - p.y[0]);
        match self.kind {
            StateSpaceKind::Euclid2D => area,
            StateSpaceKind::HolonomicTime => area * p.t_max * p.v_max,
            StateSpaceKind::DubinsTime => area * TAU * p.rho_min * p.t_max * p.v_max,
            StateSpaceKind::ThrusterTime => {
                let span = (p.velocity[1] - p.velocity[0]) * p.v_max / p.a_max;
                area * span * span * p.t_max * p.v_max
            }
        }
    }

    /// Factor converting a radius expressed in metres of the measure above
    /// into a connection-cost threshold.
    pub fn cost_per_metre(&self) -> f64 {
        if self.is_timed() {
            1.0 / self.params.v_max
        } else {
            1.0
        }
    }

    /// Upper bound on the planar displacement of any feasible trajectory of
    /// cost at most `r`.
    pub fn reach_extent(&self, r: f64) -> f64 {
        let p = &self.params;
        match self.kind {
            StateSpaceKind::Euclid2D => r,
            StateSpaceKind::HolonomicTime | StateSpaceKind::DubinsTime => p.v_max * r,
            StateSpaceKind::ThrusterTime => {
                let v = p.velocity[0].abs().max(p.velocity[1].abs());
                (v + 0.5 * p.a_max * r) * r * std::f64::consts::SQRT_2
            }
        }
    }

    /// Cheap screen run before full steering. Never exceeds the cost of the
    /// trajectory [`Self::steer`] would return; `None` means no connection
    /// can exist.
    pub fn cost_estimate(&self, from: &State, to: &State) -> Option<f64> {
        let p = &self.params;
        let dist = from.distance_to(to);
        match self.kind {
            StateSpaceKind::Euclid2D => Some(dist),
            _ if from.is_free_time() => None,
            _ if to.is_free_time() => match self.kind {
                StateSpaceKind::ThrusterTime => {
                    let tx = thruster::min_time_1d(from.x, from.vx, to.x, to.vx, p.a_max)?;
                    let ty = thruster::min_time_1d(from.y, from.vy, to.y, to.vy, p.a_max)?;
                    Some(tx.max(ty))
                }
                _ => Some(dist / p.v_max),
            },
            _ => {
                let dt = to.t - from.t;
                if from == to {
                    return Some(0.0);
                }
                if !(dt > 0.0) {
                    return None;
                }
                if self.kind == StateSpaceKind::ThrusterTime {
                    let tx = thruster::min_time_1d(from.x, from.vx, to.x, to.vx, p.a_max)?;
                    let ty = thruster::min_time_1d(from.y, from.vy, to.y, to.vy, p.a_max)?;
                    if tx.max(ty) > dt * (1.0 + 1e-12) + 1e-12 {
                        return None;
                    }
                } else if dist > p.v_max * dt * (1.0 + 1e-12) {
                    return None;
                }
                Some(dt)
            }
        }
    }

    /// Connect `from` to `to` exactly, respecting the space's constraints.
    /// Returns `None` when no feasible connection exists.
    pub fn steer(&self, from: &State, to: &State) -> Option<Trajectory> {
        if from == to {
            return Some(Trajectory::stationary(*from));
        }
        let p = &self.params;
        match self.kind {
            StateSpaceKind::Euclid2D => {
                Some(Trajectory::new(Motion::Line, from.distance_to(to), *from, *to))
            }
            _ if from.is_free_time() => None,
            StateSpaceKind::HolonomicTime => {
                let dist = from.distance_to(to);
                let (dt, end) = if to.is_free_time() {
                    let dt = dist / p.v_max;
                    (dt, State { t: from.t + dt, ..*to })
                } else {
                    (to.t - from.t, *to)
                };
                let free = to.is_free_time();
                if !(dt > 0.0 || free) || dist > p.v_max * dt * (1.0 + 1e-12) {
                    return None;
                }
                Some(Trajectory::new(Motion::Line, dt, *from, end))
            }
            StateSpaceKind::DubinsTime => {
                let path = DubinsPath::shortest(from, to, p.rho_min)?;
                let len = path.length();
                let dt = if to.is_free_time() { len / p.v_max } else { to.t - from.t };
                if !(dt > 0.0) {
                    if to.is_free_time() && len == 0.0 {
                        return Some(Trajectory::stationary(State { t: from.t, ..*to }));
                    }
                    return None;
                }
                let speed = len / dt;
                let tol = 1e-12 * p.v_max.max(1.0);
                if speed > p.v_max + tol || speed < p.v_min - tol {
                    return None;
                }
                let end = State { t: from.t + dt, heading: normalize_angle(to.heading), ..*to };
                Some(Trajectory::new(Motion::Dubins(path), dt, *from, end))
            }
            StateSpaceKind::ThrusterTime => {
                let (dt, ax, ay) = if to.is_free_time() {
                    thruster::steer_free_time(from, to, p.a_max, p.t_max)?
                } else {
                    let dt = to.t - from.t;
                    if !(dt > 0.0) {
                        return None;
                    }
                    let ax = AxisProfile::solve(from.x, from.vx, to.x, to.vx, dt, p.a_max)?;
                    let ay = AxisProfile::solve(from.y, from.vy, to.y, to.vy, dt, p.a_max)?;
                    (dt, ax, ay)
                };
                let end = State { t: from.t + dt, ..*to };
                Some(Trajectory::new(Motion::Thruster { x: ax, y: ay }, dt, *from, end))
            }
        }
    }

    /// Cost of [`Self::steer`] without allocating the trajectory.
    pub fn steer_cost(&self, from: &State, to: &State) -> Option<f64> {
        self.cost_estimate(from, to)?;
        self.steer(from, to).map(|t| t.cost)
    }
}

/// Shape of a steering result between its two endpoint states.
#[derive(Clone, Debug, PartialEq)]
pub enum Motion {
    /// Zero-length connection of a state to itself.
    Stationary,
    /// Straight segment, constant speed when timed.
    Line,
    /// Dubins curve traversed at constant speed.
    Dubins(DubinsPath),
    /// Independent bang-bang style profiles on each axis.
    Thruster { x: AxisProfile, y: AxisProfile },
}

/// Result of steering: an analytic motion, its cost and exact endpoints.
///
/// Samples are produced on demand by [`Trajectory::interpolate`], which keeps
/// steering cheap when only the cost is needed.
#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    pub motion: Motion,
    pub cost: f64,
    pub start: State,
    pub end: State,
}

impl Trajectory {
    fn new(motion: Motion, cost: f64, start: State, end: State) -> Self {
        Self { motion, cost, start, end }
    }

    fn stationary(s: State) -> Self {
        Self::new(Motion::Stationary, 0.0, s, s)
    }

    /// Time span of the motion (zero for geometric trajectories).
    pub fn duration(&self) -> f64 {
        match self.motion {
            Motion::Stationary => 0.0,
            _ => self.end.t - self.start.t,
        }
    }

    /// Planar path length, or an upper bound on it for thruster profiles.
    pub fn spatial_length_bound(&self) -> f64 {
        match &self.motion {
            Motion::Stationary => 0.0,
            Motion::Line => self.start.distance_to(&self.end),
            Motion::Dubins(p) => p.length(),
            Motion::Thruster { x, y } => x.max_speed().hypot(y.max_speed()) * self.duration(),
        }
    }

    /// State at parameter `u ∈ [0, 1]`, uniform in arc length for lines and
    /// Dubins curves and uniform in time for thruster profiles.
    pub fn state_at_fraction(&self, u: f64) -> State {
        if u <= 0.0 {
            return self.start;
        }
        if u >= 1.0 {
            return self.end;
        }
        let a = &self.start;
        let b = &self.end;
        let t = a.t + u * (b.t - a.t);
        match &self.motion {
            Motion::Stationary => *a,
            Motion::Line => {
                let mut s = State { x: a.x + u * (b.x - a.x), y: a.y + u * (b.y - a.y), ..*a };
                s.t = t;
                s
            }
            Motion::Dubins(path) => {
                let (x, y, h) = path.sample(u * path.length());
                State::pose(x, y, h, t)
            }
            Motion::Thruster { x, y } => {
                let tau = u * self.duration();
                let (px, vx) = x.eval(tau);
                let (py, vy) = y.eval(tau);
                State::thruster(px, py, vx, vy, t)
            }
        }
    }

    /// State at absolute time `t`, clamped to the trajectory's time span.
    pub fn state_at_time(&self, t: f64) -> State {
        let d = self.duration();
        if d <= 0.0 {
            return self.end;
        }
        self.state_at_fraction((t - self.start.t) / d)
    }

    /// Visit the collision-check samples, stopping early when `f` returns
    /// `false`. Returns whether every visit returned `true`.
    pub fn for_each_sample(&self, max_spacing: f64, mut f: impl FnMut(&State) -> bool) -> bool {
        let pieces = self.piece_count(max_spacing);
        if pieces == 0 {
            return f(&self.start);
        }
        for i in 0..=pieces {
            let s = if i == pieces { self.end } else { self.state_at_fraction(i as f64 / pieces as f64) };
            if !f(&s) {
                return false;
            }
        }
        true
    }

    fn piece_count(&self, max_spacing: f64) -> usize {
        let len = self.spatial_length_bound();
        if len <= ENDPOINT_EPS {
            return 0;
        }
        (len / max_spacing).ceil().max(1.0) as usize
    }

    /// Ordered samples no more than `max_spacing` apart in the plane,
    /// including both endpoints.
    pub fn interpolate(&self, max_spacing: f64) -> Vec<State> {
        assert!(max_spacing > 0.0, "sample spacing must be positive");
        let mut out = Vec::with_capacity(self.piece_count(max_spacing) + 1);
        self.for_each_sample(max_spacing, |s| {
            out.push(*s);
            true
        });
        out
    }
}

/// Shortest signed angular difference `b - a` in `(-π, π]`.
pub fn angle_diff(a: f64, b: f64) -> f64 {
    let d = (b - a).rem_euclid(TAU);
    if d > PI {
        d - TAU
    } else {
        d
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn space(kind: StateSpaceKind) -> StateSpace {
        StateSpace::new(kind, SpaceParams::default()).unwrap()
    }

    #[test]
    fn dimensions() {
        assert_eq!(StateSpaceKind::Euclid2D.dimension(), 2);
        assert_eq!(StateSpaceKind::HolonomicTime.dimension(), 3);
        assert_eq!(StateSpaceKind::DubinsTime.dimension(), 4);
        assert_eq!(StateSpaceKind::ThrusterTime.dimension(), 5);
    }

    #[test]
    fn heading_is_normalized() {
        let s = State::pose(0.0, 0.0, -0.5, 0.0);
        assert!(s.heading >= 0.0 && s.heading < TAU);
        assert_abs_diff_eq!(s.heading, TAU - 0.5, epsilon = 1e-12);
        assert_eq!(normalize_angle(TAU), 0.0);
        assert_eq!(normalize_angle(-1e-18), 0.0);
    }

    #[test]
    fn holonomic_feasible_and_infeasible() {
        let sp = space(StateSpaceKind::HolonomicTime);
        let tr = sp.steer(&State::xyt(0.0, 0.0, 0.0), &State::xyt(3.0, 4.0, 1.0)).unwrap();
        assert_abs_diff_eq!(tr.cost, 1.0, epsilon = 1e-12);
        let mid = tr.state_at_fraction(0.5);
        assert_abs_diff_eq!(mid.x, 1.5, epsilon = 1e-12);
        assert_abs_diff_eq!(mid.t, 0.5, epsilon = 1e-12);
        // 5 m in 0.4 s needs 12.5 m/s
        assert!(sp.steer(&State::xyt(0.0, 0.0, 0.0), &State::xyt(3.0, 4.0, 0.4)).is_none());
        assert!(sp.cost_estimate(&State::xyt(0.0, 0.0, 1.0), &State::xyt(0.0, 0.0, 0.5)).is_none());
    }

    #[test]
    fn euclid_estimate_is_norm() {
        let sp = space(StateSpaceKind::Euclid2D);
        assert_eq!(sp.cost_estimate(&State::xy(0.0, 0.0), &State::xy(3.0, 4.0)), Some(5.0));
    }

    #[test]
    fn self_connection_costs_nothing() {
        for kind in [
            StateSpaceKind::Euclid2D,
            StateSpaceKind::HolonomicTime,
            StateSpaceKind::DubinsTime,
            StateSpaceKind::ThrusterTime,
        ] {
            let sp = space(kind);
            let s = State::thruster(1.0, 2.0, 0.5, 0.0, 3.0);
            assert_eq!(sp.steer(&s, &s).unwrap().cost, 0.0, "{kind:?}");
        }
    }

    #[test]
    fn dubins_straight_example() {
        let params = SpaceParams { rho_min: 1.0, v_min: 1.0, v_max: 20.0, ..SpaceParams::default() };
        let sp = StateSpace::new(StateSpaceKind::DubinsTime, params).unwrap();
        let tr = sp.steer(&State::pose(0.0, 0.0, 0.0, 0.0), &State::pose(10.0, 0.0, 0.0, 1.0)).unwrap();
        assert_abs_diff_eq!(tr.spatial_length_bound(), 10.0, epsilon = 1e-9);
        assert_abs_diff_eq!(tr.cost, 1.0, epsilon = 1e-12);
        // too slow for v_min = 1 m/s
        assert!(sp.steer(&State::pose(0.0, 0.0, 0.0, 0.0), &State::pose(10.0, 0.0, 0.0, 11.0)).is_none());
    }

    #[test]
    fn thruster_rest_to_rest_one_metre() {
        let params = SpaceParams { a_max: 1.0, ..SpaceParams::default() };
        let sp = StateSpace::new(StateSpaceKind::ThrusterTime, params).unwrap();
        let from = State::thruster(0.0, 0.0, 0.0, 0.0, 0.0);
        let goal = State::thruster(1.0, 0.0, 0.0, 0.0, 0.0).with_free_time();
        let tr = sp.steer(&from, &goal).unwrap();
        assert_abs_diff_eq!(tr.cost, 2.0, epsilon = 1e-6);
        assert!(sp.steer(&from, &State::thruster(1.0, 0.0, 0.0, 0.0, 1.9)).is_none());
        assert!(sp.steer(&from, &State::thruster(1.0, 0.0, 0.0, 0.0, 2.0 + 1e-9)).is_some());
    }

    #[test]
    fn line_interpolation_counts() {
        let sp = space(StateSpaceKind::Euclid2D);
        let tr = sp.steer(&State::xy(0.0, 0.0), &State::xy(10.0, 0.0)).unwrap();
        let pts = tr.interpolate(1.0);
        assert_eq!(pts.len(), 11);
        assert_eq!(pts[0], tr.start);
        assert_eq!(*pts.last().unwrap(), tr.end);
        let zero = sp.steer(&State::xy(1.0, 1.0), &State::xy(1.0, 1.0)).unwrap();
        assert_eq!(zero.interpolate(0.25).len(), 1);
    }

    #[test]
    fn dubins_samples_lie_on_the_arc() {
        // quarter turn left around the centre (0, 1)
        let params = SpaceParams { rho_min: 1.0, v_max: 10.0, ..SpaceParams::default() };
        let sp = StateSpace::new(StateSpaceKind::DubinsTime, params).unwrap();
        let tr = sp
            .steer(&State::pose(0.0, 0.0, 0.0, 0.0), &State::pose(1.0, 1.0, PI / 2.0, 1.0))
            .unwrap();
        assert_abs_diff_eq!(tr.spatial_length_bound(), PI / 2.0, epsilon = 1e-9);
        for s in tr.interpolate(0.01) {
            assert_abs_diff_eq!(s.x.hypot(s.y - 1.0), 1.0, epsilon = 1e-6);
        }
    }

    #[test]
    fn timed_samples_increase_in_time() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for kind in [StateSpaceKind::HolonomicTime, StateSpaceKind::DubinsTime, StateSpaceKind::ThrusterTime] {
            let sp = space(kind);
            let mut found = 0;
            while found < 20 {
                let a = sp.sample_uniform(&mut rng);
                let b = sp.sample_uniform(&mut rng);
                if let Some(tr) = sp.steer(&a, &b) {
                    found += 1;
                    let pts = tr.interpolate(DEFAULT_CHECK_SPACING);
                    for w in pts.windows(2) {
                        assert!(w[1].t > w[0].t, "{kind:?}");
                        assert!(w[0].distance_to(&w[1]) <= DEFAULT_CHECK_SPACING + 1e-9, "{kind:?}");
                    }
                    let first = pts.first().unwrap();
                    let last = pts.last().unwrap();
                    assert!(first.distance_to(&a) < 1e-9 && (first.t - a.t).abs() < 1e-9);
                    assert!(last.distance_to(&b) < 1e-9 && (last.t - b.t).abs() < 1e-9);
                }
            }
        }
    }

    #[test]
    fn validation_names_the_field() {
        let bad = SpaceParams { v_min: 20.0, ..SpaceParams::default() };
        let err = bad.validate("space").unwrap_err().to_string();
        assert!(err.contains("space.v_min"), "{err}");
        let flat = SpaceParams { x: [1.0, 1.0], ..SpaceParams::default() };
        assert!(flat.validate("p").unwrap_err().to_string().contains("p.x"));
    }
}
