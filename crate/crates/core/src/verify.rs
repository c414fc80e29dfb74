//! Executable property suites. Each suite runs a batch of randomized cases
//! against the planner and the reference solvers and collects failures
//! instead of panicking, so the same code backs the CLI and the tests.

use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::oracle::{dijkstra_disk_graph, fmt_star};
use crate::planner::Planner;
use crate::spatial::{stream_rng, NeighborGraph, NodeId, RadiusRule, SampleSet, SCENARIO_STREAM};
use crate::statespace::{SpaceParams, State, StateSpace, StateSpaceKind, DEFAULT_CHECK_SPACING};
use crate::world::{ObstaclePrediction, ObstacleSnapshot, WorldDiff};

#[derive(Clone, Debug)]
pub struct SuiteReport {
    pub name: String,
    pub cases: usize,
    pub failures: Vec<String>,
}

impl SuiteReport {
    fn new(name: impl Into<String>) -> Self {
        Self { name: name.into(), cases: 0, failures: Vec::new() }
    }

    pub fn passed(&self) -> bool {
        self.failures.is_empty() && self.cases > 0
    }

    fn fail(&mut self, msg: String) {
        // keep reports readable when everything breaks at once
        if self.failures.len() < 20 {
            self.failures.push(msg);
        }
    }
}

impl std::fmt::Display for SuiteReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let status = if self.passed() { "PASS" } else { "FAIL" };
        write!(f, "{status} {} ({} cases)", self.name, self.cases)?;
        for m in &self.failures {
            write!(f, "\n    {m}")?;
        }
        Ok(())
    }
}

fn arena() -> StateSpace {
    StateSpace::new(StateSpaceKind::Euclid2D, SpaceParams::arena([-10.0, 10.0], [-10.0, 10.0])).expect("valid arena")
}

/// Random geometric instance: `n` samples plus start and goal.
pub fn random_graph(n: usize, c_mult: f64, seed: u64) -> Arc<NeighborGraph> {
    let space = arena();
    let mut rng = stream_rng(seed, SCENARIO_STREAM);
    let mut corner = || State::xy(rng.gen_range(-9.0..-5.0), rng.gen_range(-9.0..-5.0));
    let start = corner();
    let g = corner();
    let goal = State::xy(-g.x, -g.y);
    let samples = SampleSet::generate(&space, n, seed, start, goal).expect("valid instance");
    let rule = RadiusRule::for_space(&space, samples.len(), c_mult);
    Arc::new(NeighborGraph::new(space, samples, rule.radius))
}

/// Obstacle-free expansion, checked at every extraction: the nodes the cost
/// rule would update are exactly the never-reached neighbors, and extracted
/// costs never decrease.
pub fn lemma1_suite(sizes: &[usize], seeds: u64) -> SuiteReport {
    let mut rep = SuiteReport::new("cost rule equals the unvisited set");
    for &n in sizes {
        for seed in 0..seeds {
            rep.cases += 1;
            let graph = random_graph(n, 1.5, seed);
            let mut planner = Planner::new(Arc::clone(&graph)).expect("valid instance");
            let mut visited = vec![false; graph.len()];
            let mut last_cost = 0.0;
            let mut errors = Vec::new();
            planner.expand_observed(None, &mut |z, p| {
                visited[z as usize] = true;
                for (_, id) in p.open_queue().iter() {
                    visited[id as usize] = true;
                }
                let cz = p.cost(z);
                if cz < last_cost {
                    errors.push(format!("n={n} seed={seed}: extraction cost fell from {last_cost} to {cz}"));
                }
                last_cost = cz;
                let by_cost: Vec<NodeId> =
                    graph.near_backward(z).iter().filter(|x| p.cost(x.id) > cz + x.cost).map(|x| x.id).collect();
                let unvisited: Vec<NodeId> =
                    graph.near_backward(z).iter().filter(|x| !visited[x.id as usize]).map(|x| x.id).collect();
                if by_cost != unvisited {
                    errors.push(format!("n={n} seed={seed} z={z}: cost rule {by_cost:?} vs unvisited {unvisited:?}"));
                }
            });
            for e in errors {
                rep.fail(e);
            }
        }
    }
    rep
}

/// Obstacle-free robot cost agrees with single-pass FMT* and with Dijkstra.
pub fn static_equivalence_suite(instances: usize, max_n: usize) -> SuiteReport {
    let mut rep = SuiteReport::new("static equivalence with FMT* and Dijkstra");
    let mut rng = stream_rng(11, SCENARIO_STREAM);
    let empty = ObstacleSnapshot::empty();
    for i in 0..instances {
        rep.cases += 1;
        let n = rng.gen_range(20..=max_n);
        let c = [1.0, 1.5, 2.0][i % 3];
        let graph = random_graph(n, c, 1000 + i as u64);
        let robot = graph.samples().init();
        let mut planner = Planner::new(Arc::clone(&graph)).expect("valid instance");
        planner.expand(Some(robot));
        let ours = planner.cost(robot);
        let fm = fmt_star(&graph, &empty, robot, DEFAULT_CHECK_SPACING).robot_cost;
        let dj = dijkstra_disk_graph(graph.space(), graph.samples(), graph.radius(), &empty, robot, DEFAULT_CHECK_SPACING)
            .robot_cost;
        let close = |a: f64, b: f64| (a.is_infinite() && b.is_infinite()) || (a - b).abs() <= 1e-9;
        if !close(ours, fm) || !close(ours, dj) {
            rep.fail(format!("instance {i} (n={n}, C={c}): ours {ours}, fmt* {fm}, dijkstra {dj}"));
        }
        if let Ok(Some(path)) = planner.extract_path(robot) {
            let hops: f64 = path.nodes.windows(2).map(|w| graph.state(w[0]).distance_to(graph.state(w[1]))).sum();
            if (hops - path.cost).abs() > 1e-9 {
                rep.fail(format!("instance {i}: path hops sum to {hops}, cost says {}", path.cost));
            }
        }
    }
    rep
}

fn random_disk(rng: &mut impl Rng, id: u32) -> ObstaclePrediction {
    let r = rng.gen_range(0.3..2.0);
    ObstaclePrediction::fixed(id, [rng.gen_range(-7.0..7.0), rng.gen_range(-7.0..7.0)], r)
}

/// After random add/remove scripts and a settling expansion, the robot's
/// cost is never worse than a fresh FMT* run on the same snapshot.
pub fn dominance_suite(scripts: usize, max_n: usize) -> SuiteReport {
    let mut rep = SuiteReport::new("repaired cost dominates fresh FMT*");
    let mut rng = stream_rng(23, SCENARIO_STREAM);
    for s in 0..scripts {
        rep.cases += 1;
        let n = rng.gen_range(100..=max_n);
        let graph = random_graph(n, 1.5, 5000 + s as u64);
        let robot = graph.samples().init();
        let mut planner = Planner::new(Arc::clone(&graph)).expect("valid instance");
        planner.expand(Some(robot));
        let mut live: Vec<ObstaclePrediction> = Vec::new();
        let mut next_id = 0;
        for step in 0..rng.gen_range(3..10) {
            let mut d = WorldDiff::default();
            for _ in 0..rng.gen_range(1..4) {
                d.plus.push(random_disk(&mut rng, next_id));
                next_id += 1;
            }
            if !live.is_empty() && rng.gen_bool(0.6) {
                live.shuffle(&mut rng);
                let k = rng.gen_range(1..=live.len().min(3));
                d.minus.extend(live.drain(..k));
            }
            live.extend(d.plus.iter().copied());
            planner.update_obstacles(&d);
            planner.expand(Some(robot));
            let ours = planner.cost(robot);
            let fresh = fmt_star(&graph, planner.obstacles(), robot, DEFAULT_CHECK_SPACING).robot_cost;
            if ours > fresh + 1e-9 {
                rep.fail(format!("script {s} step {step} (n={n}): repaired {ours} > fresh {fresh}"));
            }
            if let Err(e) = planner.check_invariants() {
                rep.fail(format!("script {s} step {step}: {e}"));
            }
        }
    }
    rep
}

/// `v ∈ Near⁺(u)` exactly when `u ∈ Near⁻(v)`, with matching costs.
pub fn duality_suite(kind: StateSpaceKind, n: usize, pairs: usize) -> SuiteReport {
    let mut rep = SuiteReport::new(format!("forward/backward duality ({})", kind.label()));
    let space = StateSpace::new(kind, SpaceParams::default()).expect("default params");
    let (start, goal) = endpoints(kind);
    let samples = SampleSet::generate(&space, n, 77, start, goal).expect("valid instance");
    let rule = RadiusRule::for_space(&space, samples.len(), 2.0);
    let graph = NeighborGraph::new(space, samples, rule.radius);
    let mut rng = stream_rng(31, SCENARIO_STREAM);
    let len = graph.len() as NodeId;
    for i in 0..pairs {
        rep.cases += 1;
        let u = rng.gen_range(0..len);
        // half the pairs come from actual neighborhoods so both sides get exercised
        let v = if i % 2 == 0 && !graph.near_forward(u).is_empty() {
            graph.near_forward(u).choose(&mut rng).expect("nonempty").id
        } else {
            rng.gen_range(0..len)
        };
        let fwd = graph.near_forward(u).iter().find(|x| x.id == v).map(|x| x.cost);
        let bwd = graph.near_backward(v).iter().find(|x| x.id == u).map(|x| x.cost);
        let steer = space.steer_cost(graph.state(u), graph.state(v)).filter(|&c| c <= graph.radius() && u != v);
        if fwd != bwd || fwd != steer {
            rep.fail(format!("pair ({u}, {v}): forward {fwd:?}, backward {bwd:?}, steer {steer:?}"));
        }
    }
    rep
}

pub const ALL_KINDS: [StateSpaceKind; 4] =
    [StateSpaceKind::Euclid2D, StateSpaceKind::HolonomicTime, StateSpaceKind::DubinsTime, StateSpaceKind::ThrusterTime];

fn endpoints(kind: StateSpaceKind) -> (State, State) {
    let (a, b) = match kind {
        StateSpaceKind::DubinsTime => (State::pose(-40.0, -40.0, 0.0, 0.0), State::pose(40.0, 40.0, 0.0, 0.0)),
        _ => (State::xy(-40.0, -40.0), State::xy(40.0, 40.0)),
    };
    if kind.is_timed() {
        (a, b.with_free_time())
    } else {
        (a, b)
    }
}

/// Suites run by `fmtx verify`. `quick` shrinks the case counts.
pub fn default_suites(quick: bool) -> Vec<SuiteReport> {
    let scale = |full: usize, small: usize| if quick { small } else { full };
    let mut out = vec![
        lemma1_suite(&[50, 100, 300], scale(100, 10) as u64),
        static_equivalence_suite(scale(100, 10), 500),
        dominance_suite(scale(200, 20), 1000),
    ];
    for kind in ALL_KINDS {
        out.push(duality_suite(kind, scale(1000, 300), scale(10_000, 1000)));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quick_suites_pass() {
        for rep in default_suites(true) {
            assert!(rep.passed(), "{rep}");
        }
    }

    #[test]
    fn report_formatting() {
        let mut r = SuiteReport::new("x");
        assert!(!r.passed(), "no cases is not a pass");
        r.cases = 2;
        assert!(r.passed());
        r.fail("boom".into());
        assert_eq!(r.to_string(), "FAIL x (2 cases)\n    boom");
    }
}
