//! Closed-loop trials: the robot moves, obstacles move, the planner repairs.

use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::planner::{Planner, RepairMetrics, StepReport};
use crate::scenario::ScenarioConfig;
use crate::spatial::{NeighborGraph, NodeId, RadiusRule, SampleSet};
use crate::statespace::{State, StateSpace, StateSpaceKind, Trajectory};
use crate::world::World;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Outcome {
    Reached,
    Timeout,
    Stuck,
}

impl Outcome {
    pub fn as_str(self) -> &'static str {
        match self {
            Outcome::Reached => "reached",
            Outcome::Timeout => "timeout",
            Outcome::Stuck => "stuck",
        }
    }
}

impl std::fmt::Display for Outcome {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Outcome {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "reached" => Ok(Outcome::Reached),
            "timeout" => Ok(Outcome::Timeout),
            "stuck" => Ok(Outcome::Stuck),
            _ => Err(format!("unknown outcome `{s}`")),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct IterationRecord {
    pub iter: usize,
    pub t_now: f64,
    pub metrics: RepairMetrics,
    pub c_robot: f64,
    /// Nodes on the extracted path, zero when the robot is orphaned.
    pub path_len: usize,
    pub v_robot: Option<NodeId>,
    pub added: usize,
    pub removed: usize,
}

impl IterationRecord {
    pub fn replan_s(&self) -> f64 {
        self.metrics.wall_s
    }
}

/// Robot inside an effective obstacle disk at a tick.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SafetyViolation {
    pub t: f64,
    pub obstacle: u32,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrialResult {
    pub trial: usize,
    pub seed: u64,
    pub records: Vec<IterationRecord>,
    pub outcome: Outcome,
    pub violations: Vec<SafetyViolation>,
    /// Robot state at each tick, starting with the start state.
    pub robot_track: Vec<State>,
}

impl TrialResult {
    pub fn median_replan_s(&self) -> f64 {
        median(self.records.iter().map(|r| r.replan_s()).collect())
    }
}

pub fn median(mut xs: Vec<f64>) -> f64 {
    if xs.is_empty() {
        return f64::NAN;
    }
    xs.sort_by(f64::total_cmp);
    let m = xs.len() / 2;
    if xs.len() % 2 == 1 {
        xs[m]
    } else {
        0.5 * (xs[m - 1] + xs[m])
    }
}

/// Sample standard deviation; zero for fewer than two values.
pub fn sample_std(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    let mean = xs.iter().sum::<f64>() / xs.len() as f64;
    let ss: f64 = xs.iter().map(|x| (x - mean) * (x - mean)).sum();
    (ss / (xs.len() - 1) as f64).sqrt()
}

/// Per-condition statistics over the per-trial median replanning times.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SummaryStats {
    pub space: StateSpaceKind,
    pub n: usize,
    pub c_mult: f64,
    pub obstacles: usize,
    pub trials: usize,
    pub median_ms: f64,
    pub std_ms: f64,
    pub success_rate: f64,
}

impl SummaryStats {
    /// `trial_medians_ms` holds one median per trial.
    pub fn from_trial_medians(cfg: &ScenarioConfig, trial_medians_ms: &[f64], reached: usize) -> Self {
        let trials = trial_medians_ms.len();
        Self {
            space: cfg.space.kind,
            n: cfg.n,
            c_mult: cfg.c_mult,
            obstacles: cfg.obstacles.len(),
            trials,
            median_ms: median(trial_medians_ms.to_vec()),
            std_ms: sample_std(trial_medians_ms),
            success_rate: if trials > 0 { reached as f64 / trials as f64 } else { 0.0 },
        }
    }

    pub fn from_trials(cfg: &ScenarioConfig, results: &[TrialResult]) -> Self {
        let medians: Vec<f64> = results.iter().map(|r| r.median_replan_s() * 1e3).collect();
        let reached = results.iter().filter(|r| r.outcome == Outcome::Reached).count();
        Self::from_trial_medians(cfg, &medians, reached)
    }
}

/// Everything a trial needs before the first tick.
pub struct TrialSetup {
    pub space: StateSpace,
    pub graph: Arc<NeighborGraph>,
    pub world: World,
    pub rule: RadiusRule,
}

pub fn prepare(cfg: &ScenarioConfig, seed: u64) -> Result<TrialSetup> {
    cfg.validate()?;
    let space = cfg.state_space()?;
    let (start, goal) = cfg.endpoints();
    let world = World::new(cfg.obstacles.clone(), space.is_timed()).with_lookahead(cfg.lookahead);
    if !world.occupied_by(start.position(), 0.0).is_empty() {
        return Err(Error::InfeasibleStart);
    }
    let samples = SampleSet::generate(&space, cfg.n, seed, start, goal)?;
    let rule = RadiusRule::for_space(&space, samples.len(), cfg.c_mult);
    let graph = Arc::new(NeighborGraph::new(space, samples, rule.radius));
    Ok(TrialSetup { space, graph, world, rule })
}

/// What an observer sees after each planning step.
pub struct TickView<'a> {
    pub iter: usize,
    pub robot: &'a State,
    pub planner: &'a Planner,
    pub report: &'a StepReport,
    pub world: &'a World,
}

/// Trajectories the robot follows: robot to its node, then the tree edges.
fn plan_trajectories(planner: &Planner, report: &StepReport) -> Option<Vec<Trajectory>> {
    let link = report.link.as_ref()?;
    let path = planner.extract_path(link.node).ok()??;
    let mut out = vec![link.trajectory.clone()];
    for w in path.nodes.windows(2) {
        out.push(planner.edge_trajectory(w[0], w[1])?);
    }
    Some(out)
}

/// Advance `dist` metres along the polyline through `pts`. Returns the new
/// position and whether the end was reached.
fn pursue(pts: &[[f64; 2]], mut dist: f64) -> ([f64; 2], bool) {
    for w in pts.windows(2) {
        let seg = (w[1][0] - w[0][0]).hypot(w[1][1] - w[0][1]);
        if dist < seg {
            let u = dist / seg;
            return ([w[0][0] + u * (w[1][0] - w[0][0]), w[0][1] + u * (w[1][1] - w[0][1])], false);
        }
        dist -= seg;
    }
    (*pts.last().expect("nonempty polyline"), true)
}

/// State along a committed timed plan at absolute time `t`, or `None` once
/// the plan has ended (flag) or does not cover `t`.
fn follow_timed(plan: &[Trajectory], t: f64) -> Option<(State, bool)> {
    let last = plan.last()?;
    let end_t = last.start.t + last.duration();
    if t >= end_t {
        let mut s = last.end;
        s.t = end_t;
        return Some((s, true));
    }
    let piece = plan.iter().find(|tr| t < tr.start.t + tr.duration())?;
    if t < piece.start.t {
        return None;
    }
    Some((piece.state_at_time(t), false))
}

/// Stay put; the thruster sheds velocity at full braking.
fn hold(space: &StateSpace, s: &State, dt: f64) -> State {
    let mut out = *s;
    out.t = s.t + dt;
    if space.kind == StateSpaceKind::ThrusterTime {
        let a = space.params.a_max;
        let brake = |x: f64, v: f64| {
            let stop = (v.abs() / a).min(dt);
            let dv = -v.signum() * a * stop;
            (x + v * stop + 0.5 * dv * stop, v + dv)
        };
        (out.x, out.vx) = brake(s.x, s.vx);
        (out.y, out.vy) = brake(s.y, s.vy);
    }
    out
}

pub fn run_trial(cfg: &ScenarioConfig, seed: u64) -> Result<TrialResult> {
    run_trial_observed(cfg, seed, &mut |_| {})
}

pub fn run_trial_observed(cfg: &ScenarioConfig, seed: u64, observer: &mut dyn FnMut(&TickView)) -> Result<TrialResult> {
    let setup = prepare(cfg, seed)?;
    run_prepared(cfg, seed, &setup, observer)
}

pub fn run_prepared(
    cfg: &ScenarioConfig,
    seed: u64,
    setup: &TrialSetup,
    observer: &mut dyn FnMut(&TickView),
) -> Result<TrialResult> {
    let space = setup.space;
    let world = &setup.world;
    let mut planner = Planner::new(Arc::clone(&setup.graph))?;
    let (start, goal) = cfg.endpoints();
    let timed = space.is_timed();
    let limit = cfg.time_limit();
    let mut robot = start;
    let mut records = Vec::new();
    let mut violations = Vec::new();
    let mut track = vec![robot];
    let mut committed: Vec<Trajectory> = Vec::new();
    let mut stuck = 0;
    let mut outcome = Outcome::Timeout;
    for iter in 0.. {
        let t = iter as f64 * cfg.dt;
        robot.t = if timed { t } else { 0.0 };
        let report = planner.plan_step(&robot, world.observe(t));
        let plan = if report.c_robot < f64::INFINITY { plan_trajectories(&planner, &report) } else { None };
        let path_len = match report.v_robot() {
            Some(v) => planner.extract_path(v)?.map_or(0, |p| p.nodes.len()),
            None => 0,
        };
        records.push(IterationRecord {
            iter,
            t_now: t,
            metrics: report.metrics,
            c_robot: report.c_robot,
            path_len,
            v_robot: report.v_robot(),
            added: report.added,
            removed: report.removed,
        });
        observer(&TickView { iter, robot: &robot, planner: &planner, report: &report, world });

        stuck = if plan.is_some() { 0 } else { stuck + 1 };
        let t_next = (iter + 1) as f64 * cfg.dt;
        let mut arrived = false;
        if timed {
            if let Some(p) = plan {
                committed = p;
            }
            match follow_timed(&committed, t_next) {
                Some((s, done)) => {
                    robot = s;
                    arrived = done && robot.distance_to(&goal) < 1e-6;
                }
                None => {
                    committed.clear();
                    robot = hold(&space, &robot, cfg.dt);
                }
            }
            robot.t = t_next;
        } else if let Some(p) = plan {
            let mut pts = vec![robot.position()];
            pts.extend(p.iter().map(|tr| tr.end.position()));
            let (pos, done) = pursue(&pts, cfg.robot_speed * cfg.dt);
            robot.x = pos[0];
            robot.y = pos[1];
            arrived = done;
        }
        for id in world.occupied_by(robot.position(), t_next) {
            violations.push(SafetyViolation { t: t_next, obstacle: id });
        }
        track.push(robot);
        if arrived {
            outcome = Outcome::Reached;
            break;
        }
        if t_next >= limit - 1e-9 {
            outcome = Outcome::Timeout;
            break;
        }
        if stuck >= cfg.max_stuck {
            outcome = Outcome::Stuck;
            break;
        }
    }
    Ok(TrialResult { trial: 0, seed, records, outcome, violations, robot_track: track })
}

/// Run trials `0..trials` with seeds `cfg.seed + i` on the rayon pool and
/// return them in trial order.
pub fn run_trials(cfg: &ScenarioConfig, trials: usize) -> Result<Vec<TrialResult>> {
    (0..trials)
        .into_par_iter()
        .map(|i| {
            let seed = cfg.seed.wrapping_add(i as u64);
            run_trial(cfg, seed).map(|mut r| {
                r.trial = i;
                r
            })
        })
        .collect()
}

pub fn run_condition(cfg: &ScenarioConfig, trials: usize) -> Result<(SummaryStats, Vec<TrialResult>)> {
    if trials < 1 {
        return Err(Error::config("trials", "must be at least 1"));
    }
    let results = run_trials(cfg, trials)?;
    Ok((SummaryStats::from_trials(cfg, &results), results))
}
