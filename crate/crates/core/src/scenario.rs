//! Scenario files and built-in presets.
//!
//! A scenario is one JSON document. Unknown fields are rejected and parse
//! errors carry the dotted path of the offending field.

use std::collections::HashSet;
use std::fs;
use std::path::{Path, PathBuf};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spatial::{stream_rng, SCENARIO_STREAM};
use crate::statespace::{SpaceParams, State, StateSpace, StateSpaceKind};
use crate::world::{MotionSpec, Obstacle};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpaceConfig {
    pub kind: StateSpaceKind,
    #[serde(default)]
    pub params: SpaceParams,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub space: SpaceConfig,
    /// Number of free samples; start and goal are added on top.
    pub n: usize,
    pub c_mult: f64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub obstacles: Vec<Obstacle>,
    pub start: State,
    /// In the timed spaces the goal's `t` is ignored: arrival time is free.
    pub goal: State,
    #[serde(default = "default_dt")]
    pub dt: f64,
    /// Cruise speed of the geometric robot (m/s).
    #[serde(default = "default_robot_speed")]
    pub robot_speed: f64,
    /// Geometric observations grow each disk by the distance its obstacle
    /// covers in this many seconds.
    #[serde(default = "default_lookahead")]
    pub lookahead: f64,
    /// Simulated time budget (s). Timed spaces are further capped at `t_max`.
    #[serde(default = "default_horizon")]
    pub horizon: f64,
    /// Consecutive ticks without a finite plan before a trial gives up.
    #[serde(default = "default_max_stuck")]
    pub max_stuck: usize,
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
}

fn default_dt() -> f64 {
    0.1
}
fn default_robot_speed() -> f64 {
    10.0
}
fn default_lookahead() -> f64 {
    0.5
}
fn default_horizon() -> f64 {
    120.0
}
fn default_max_stuck() -> usize {
    300
}
fn default_trials() -> usize {
    30
}

impl ScenarioConfig {
    /// Minimal obstacle-free scenario with default timing. Used by presets and
    /// tests as a starting point.
    pub fn new(kind: StateSpaceKind, params: SpaceParams, n: usize, c_mult: f64, start: State, goal: State) -> Self {
        Self {
            name: None,
            space: SpaceConfig { kind, params },
            n,
            c_mult,
            seed: 0,
            obstacles: Vec::new(),
            start,
            goal,
            dt: default_dt(),
            robot_speed: default_robot_speed(),
            lookahead: default_lookahead(),
            horizon: default_horizon(),
            max_stuck: default_max_stuck(),
            trials: default_trials(),
            output: None,
        }
    }

    pub fn state_space(&self) -> Result<StateSpace> {
        self.space.params.validate("space.params")?;
        Ok(StateSpace { kind: self.space.kind, params: self.space.params })
    }

    /// Start and goal as the planner sees them: the start at `t = 0` and, for
    /// timed spaces, a goal with free arrival time.
    pub fn endpoints(&self) -> (State, State) {
        let mut start = self.start;
        let mut goal = self.goal;
        start.t = 0.0;
        if self.space.kind.is_timed() {
            goal = goal.with_free_time();
        } else {
            goal.t = 0.0;
        }
        (start, goal)
    }

    /// Simulated time limit of one trial.
    pub fn time_limit(&self) -> f64 {
        if self.space.kind.is_timed() {
            self.horizon.min(self.space.params.t_max)
        } else {
            self.horizon
        }
    }

    pub fn validate(&self) -> Result<()> {
        let space = self.state_space()?;
        if self.n < 2 {
            return Err(Error::config("n", "at least two samples are required"));
        }
        let positive = |field: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::config(field, "must be positive and finite"))
            }
        };
        positive("c_mult", self.c_mult)?;
        positive("dt", self.dt)?;
        positive("robot_speed", self.robot_speed)?;
        positive("horizon", self.horizon)?;
        if !(self.lookahead >= 0.0 && self.lookahead.is_finite()) {
            return Err(Error::config("lookahead", "must be nonnegative and finite"));
        }
        if self.trials < 1 {
            return Err(Error::config("trials", "must be at least 1"));
        }
        if self.max_stuck < 1 {
            return Err(Error::config("max_stuck", "must be at least 1"));
        }
        let (start, goal) = self.endpoints();
        if !space.contains(&start) {
            return Err(Error::config("start", "outside the state-space bounds"));
        }
        if !space.contains(&goal) {
            return Err(Error::config("goal", "outside the state-space bounds"));
        }
        let mut ids = HashSet::new();
        for (i, o) in self.obstacles.iter().enumerate() {
            let field = format!("obstacles[{i}]");
            o.validate(&field)?;
            if !ids.insert(o.id) {
                return Err(Error::config(format!("{field}.id"), format!("duplicate obstacle id {}", o.id)));
            }
        }
        Ok(())
    }

    pub fn from_json(text: &str, origin: &Path) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let cfg: Self = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            let message = if path == "." { e.inner().to_string() } else { format!("at `{path}`: {}", e.inner()) };
            Error::Parse { path: origin.to_path_buf(), message }
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }
}

pub fn load_scenario(path: &Path) -> Result<ScenarioConfig> {
    let text = fs::read_to_string(path)?;
    ScenarioConfig::from_json(&text, path)
}

pub fn save_scenario(cfg: &ScenarioConfig, path: &Path) -> Result<()> {
    fs::write(path, cfg.to_json() + "\n")?;
    Ok(())
}

/// Sample counts and scaling factors of the geometric grid.
pub const GEO_SAMPLES: [usize; 4] = [2500, 5000, 10000, 20000];
pub const GEO_OBSTACLES: [usize; 3] = [10, 20, 30];
pub const GEO_C: [f64; 3] = [1.0, 1.5, 2.0];

const GEO_START: [f64; 2] = [-40.0, -40.0];
const GEO_GOAL: [f64; 2] = [40.0, 40.0];
/// Geometric obstacle speed range (m/s).
pub const GEO_SPEED: [f64; 2] = [1.0, 3.0];
/// Kinodynamic obstacle speed range (m/s).
pub const KINO_SPEED: [f64; 2] = [20.0, 30.0];

/// Preset name of a geometric condition, e.g. `geo-30obs-20k-c2`.
pub fn geo_name(obstacles: usize, n: usize, c_mult: f64) -> String {
    format!("geo-{obstacles}obs-{}k-c{c_mult}", n as f64 / 1000.0)
}

fn kino_models() -> [(&'static str, StateSpaceKind, usize); 3] {
    [
        ("holonomic", StateSpaceKind::HolonomicTime, 5000),
        ("dubins", StateSpaceKind::DubinsTime, 2500),
        ("thruster", StateSpaceKind::ThrusterTime, 1000),
    ]
}

fn seg_point_distance(p: [f64; 2], a: [f64; 2], b: [f64; 2]) -> f64 {
    let d = [b[0] - a[0], b[1] - a[1]];
    let len_sq = d[0] * d[0] + d[1] * d[1];
    let u = if len_sq > 0.0 { (((p[0] - a[0]) * d[0] + (p[1] - a[1]) * d[1]) / len_sq).clamp(0.0, 1.0) } else { 0.0 };
    (p[0] - a[0] - u * d[0]).hypot(p[1] - a[1] - u * d[1])
}

/// Shuttling disks whose sweep stays clear of the start and goal.
fn shuttle_obstacles(count: usize, seed: u64, speed: [f64; 2], radius: [f64; 2], inflation: f64) -> Vec<Obstacle> {
    let mut rng = stream_rng(seed, SCENARIO_STREAM);
    let mut out = Vec::with_capacity(count);
    let lim = 45.0;
    while out.len() < count {
        let r = rng.gen_range(radius[0]..radius[1]);
        let a = [rng.gen_range(-lim..lim), rng.gen_range(-lim..lim)];
        let len = rng.gen_range(20.0..60.0);
        let ang = rng.gen_range(0.0..std::f64::consts::TAU);
        let b = [a[0] + len * ang.cos(), a[1] + len * ang.sin()];
        let v = rng.gen_range(speed[0]..speed[1]);
        if b.iter().any(|c| c.abs() > lim) {
            continue;
        }
        let keep_out = r + inflation + 5.0;
        if seg_point_distance(GEO_START, a, b) < keep_out || seg_point_distance(GEO_GOAL, a, b) < keep_out {
            continue;
        }
        out.push(Obstacle { id: out.len() as u32, radius: r, inflation, motion: MotionSpec::shuttle(a, b, v) });
    }
    out
}

fn geo(obstacles: usize, n: usize, c_mult: f64, seed: u64) -> ScenarioConfig {
    let mut cfg = ScenarioConfig::new(
        StateSpaceKind::Euclid2D,
        SpaceParams::default(),
        n,
        c_mult,
        State::xy(GEO_START[0], GEO_START[1]),
        State::xy(GEO_GOAL[0], GEO_GOAL[1]),
    );
    cfg.name = Some(geo_name(obstacles, n, c_mult));
    cfg.seed = seed;
    cfg.obstacles = shuttle_obstacles(obstacles, seed.wrapping_add(obstacles as u64), GEO_SPEED, [2.0, 4.0], 2.0);
    cfg
}

fn kino(model: &str, kind: StateSpaceKind, n: usize, obstacles: usize, seed: u64) -> ScenarioConfig {
    let (start, goal) = match kind {
        StateSpaceKind::DubinsTime => (
            State::pose(GEO_START[0], GEO_START[1], std::f64::consts::FRAC_PI_4, 0.0),
            State::pose(GEO_GOAL[0], GEO_GOAL[1], std::f64::consts::FRAC_PI_4, 0.0),
        ),
        _ => (State::xy(GEO_START[0], GEO_START[1]), State::xy(GEO_GOAL[0], GEO_GOAL[1])),
    };
    let mut cfg = ScenarioConfig::new(kind, SpaceParams::default(), n, 2.0, start, goal);
    cfg.name = Some(format!("kino-{model}-{obstacles}obs"));
    cfg.seed = seed;
    cfg.obstacles = shuttle_obstacles(obstacles, seed.wrapping_add(1000 + obstacles as u64), KINO_SPEED, [1.5, 2.5], 1.0);
    cfg
}

/// Single static disk between start and goal, used for convergence checks.
fn ao_disk(seed: u64) -> ScenarioConfig {
    let mut cfg = ScenarioConfig::new(
        StateSpaceKind::Euclid2D,
        SpaceParams::arena([-15.0, 15.0], [-15.0, 15.0]),
        1000,
        1.5,
        State::xy(-10.0, 0.0),
        State::xy(10.0, 0.0),
    );
    cfg.name = Some("ao-disk".into());
    cfg.seed = seed;
    cfg.obstacles = vec![Obstacle { id: 0, radius: 2.0, inflation: 2.0, motion: MotionSpec::fixed([0.0, 0.0]) }];
    cfg
}

/// Every single-condition preset name.
pub fn preset_names() -> Vec<String> {
    let mut names = Vec::new();
    for &o in &GEO_OBSTACLES {
        for &n in &GEO_SAMPLES {
            for &c in &GEO_C {
                names.push(geo_name(o, n, c));
            }
        }
    }
    for (model, _, _) in kino_models() {
        for o in [10, 20] {
            names.push(format!("kino-{model}-{o}obs"));
        }
    }
    names.push("ao-disk".into());
    names
}

/// Grid preset names with the number of conditions they expand to.
pub fn grid_names() -> [(&'static str, usize); 2] {
    [("geo-grid", 36), ("kino-grid", 6)]
}

/// Look up a single-condition preset.
pub fn preset(name: &str, seed: u64) -> Result<ScenarioConfig> {
    if name == "ao-disk" {
        return Ok(ao_disk(seed));
    }
    for &o in &GEO_OBSTACLES {
        for &n in &GEO_SAMPLES {
            for &c in &GEO_C {
                if geo_name(o, n, c) == name {
                    return Ok(geo(o, n, c, seed));
                }
            }
        }
    }
    for (model, kind, n) in kino_models() {
        for o in [10, 20] {
            if format!("kino-{model}-{o}obs") == name {
                return Ok(kino(model, kind, n, o, seed));
            }
        }
    }
    Err(Error::UnknownPreset(name.to_string()))
}

/// Resolve a preset or grid name into the list of conditions it names.
pub fn resolve(name: &str, seed: u64) -> Result<Vec<ScenarioConfig>> {
    match name {
        "geo-grid" => {
            let mut out = Vec::new();
            for &o in &GEO_OBSTACLES {
                for &n in &GEO_SAMPLES {
                    for &c in &GEO_C {
                        out.push(geo(o, n, c, seed));
                    }
                }
            }
            Ok(out)
        }
        "kino-grid" => {
            let mut out = Vec::new();
            for (model, kind, n) in kino_models() {
                for o in [10, 20] {
                    out.push(kino(model, kind, n, o, seed));
                }
            }
            Ok(out)
        }
        _ => preset(name, seed).map(|c| vec![c]),
    }
}
