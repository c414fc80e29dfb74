//! Sampling, the connection radius, and neighbor queries over a fixed
//! sample set.
//!
//! The sample set never changes after construction, so a static kd-tree over
//! the planar position (plus time for timed spaces) serves as the candidate
//! prefilter and each node's neighbor lists are computed at most once.

use std::f64::consts::PI;
use std::sync::OnceLock;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::statespace::{State, StateSpace, StateSpaceKind};

pub type NodeId = u32;

/// Stream id for sample generation.
pub const SAMPLING_STREAM: u64 = 1;
/// Stream id for randomized scenario content (obstacle layouts).
pub const SCENARIO_STREAM: u64 = 2;

/// Deterministic generator for one named stream of a seed. Streams are
/// independent, so adding one never perturbs the others.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Node states: the random samples first, then the start and the goal.
#[derive(Clone, Debug)]
pub struct SampleSet {
    states: Vec<State>,
    seed: u64,
    init: NodeId,
    goal: NodeId,
}

impl SampleSet {
    /// Draw `n` uniform samples and append `start` and `goal`.
    pub fn generate(space: &StateSpace, n: usize, seed: u64, start: State, goal: State) -> Result<Self> {
        if n < 2 {
            return Err(Error::config("n", "at least two samples are required"));
        }
        if space.measure() <= 0.0 || !space.measure().is_finite() {
            return Err(Error::config("space", "sampling domain has zero volume"));
        }
        if !space.contains(&start) {
            return Err(Error::config("start", "outside the state-space bounds"));
        }
        if !space.contains(&goal) {
            return Err(Error::config("goal", "outside the state-space bounds"));
        }
        let mut rng = stream_rng(seed, SAMPLING_STREAM);
        let mut states: Vec<State> = (0..n).map(|_| space.sample_uniform(&mut rng)).collect();
        states.push(start);
        states.push(goal);
        Ok(Self { states, seed, init: n as NodeId, goal: n as NodeId + 1 })
    }

    /// Explicit node set, mostly for constructed test instances.
    pub fn from_states(states: Vec<State>, init: NodeId, goal: NodeId) -> Self {
        assert!((init as usize) < states.len() && (goal as usize) < states.len());
        Self { states, seed: 0, init, goal }
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn state(&self, id: NodeId) -> &State {
        &self.states[id as usize]
    }

    pub fn states(&self) -> &[State] {
        &self.states
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn init(&self) -> NodeId {
        self.init
    }

    pub fn goal(&self) -> NodeId {
        self.goal
    }
}

/// Volume of the unit ball in `d` dimensions.
pub fn unit_ball_volume(d: usize) -> f64 {
    match d {
        1 => 2.0,
        2 => PI,
        3 => 4.0 * PI / 3.0,
        4 => PI * PI / 2.0,
        5 => 8.0 * PI * PI / 15.0,
        _ => {
            // V_d = 2π/d · V_{d-2}
            2.0 * PI / d as f64 * unit_ball_volume(d - 2)
        }
    }
}

/// `C · γ* · (ln n / n)^{1/d}` with the RRT*-style constant
/// `γ* = (2(1 + 1/d))^{1/d} (μ_free / ζ_d)^{1/d}`.
pub fn compute_radius(n: usize, d: usize, c_mult: f64, mu_free: f64) -> f64 {
    assert!(n >= 2, "radius rule needs n >= 2");
    assert!(c_mult > 0.0, "radius multiplier must be positive");
    let df = d as f64;
    let gamma = (2.0 * (1.0 + 1.0 / df)).powf(1.0 / df) * (mu_free / unit_ball_volume(d)).powf(1.0 / df);
    let nf = n as f64;
    c_mult * gamma * (nf.ln() / nf).powf(1.0 / df)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RadiusRule {
    pub c_mult: f64,
    pub gamma: f64,
    pub d: usize,
    pub n: usize,
    /// Connection threshold in cost units.
    pub radius: f64,
}

impl RadiusRule {
    /// Radius for a space with `n` nodes, using the full arena as the free
    /// measure.
    pub fn for_space(space: &StateSpace, n: usize, c_mult: f64) -> Self {
        let d = space.dimension();
        let mu = space.measure();
        let df = d as f64;
        let gamma = (2.0 * (1.0 + 1.0 / df)).powf(1.0 / df) * (mu / unit_ball_volume(d)).powf(1.0 / df);
        let radius = compute_radius(n, d, c_mult, mu) * space.cost_per_metre();
        Self { c_mult, gamma, d, n, radius }
    }
}

/// Static kd-tree over up to three coordinates, queried by axis-aligned box.
#[derive(Clone, Debug)]
pub struct KdTree {
    k: usize,
    points: Vec<[f64; 3]>,
    order: Vec<NodeId>,
}

impl KdTree {
    pub fn build(points: Vec<[f64; 3]>, k: usize) -> Self {
        assert!((1..=3).contains(&k));
        let mut order: Vec<NodeId> = (0..points.len() as NodeId).collect();
        Self::split(&mut order, &points, 0, k);
        Self { k, points, order }
    }

    fn split(order: &mut [NodeId], points: &[[f64; 3]], depth: usize, k: usize) {
        if order.len() <= 1 {
            return;
        }
        let axis = depth % k;
        let mid = order.len() / 2;
        order.select_nth_unstable_by(mid, |&a, &b| {
            points[a as usize][axis].total_cmp(&points[b as usize][axis]).then(a.cmp(&b))
        });
        let (left, right) = order.split_at_mut(mid);
        Self::split(left, points, depth + 1, k);
        Self::split(&mut right[1..], points, depth + 1, k);
    }

    /// Push every point inside the closed box `[lo, hi]` onto `out`.
    pub fn query_box(&self, lo: &[f64; 3], hi: &[f64; 3], out: &mut Vec<NodeId>) {
        self.query_range(0, self.order.len(), 0, lo, hi, out);
    }

    fn query_range(&self, start: usize, end: usize, depth: usize, lo: &[f64; 3], hi: &[f64; 3], out: &mut Vec<NodeId>) {
        if start >= end {
            return;
        }
        let axis = depth % self.k;
        let mid = start + (end - start) / 2;
        let id = self.order[mid];
        let p = &self.points[id as usize];
        if (0..self.k).all(|i| p[i] >= lo[i] && p[i] <= hi[i]) {
            out.push(id);
        }
        if lo[axis] <= p[axis] {
            self.query_range(start, mid, depth + 1, lo, hi, out);
        }
        if hi[axis] >= p[axis] {
            self.query_range(mid + 1, end, depth + 1, lo, hi, out);
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Neighbor {
    pub id: NodeId,
    /// Cost of the connecting trajectory in its direction of travel.
    pub cost: f64,
}

/// Which way a neighbor query runs in a timed space.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    /// Nodes that can reach the query node.
    Backward,
    /// Nodes the query node can reach.
    Forward,
}

/// The implicit `r`-graph over a sample set with lazily cached neighbor
/// lists. Safe to share between threads once built.
#[derive(Debug)]
pub struct NeighborGraph {
    space: StateSpace,
    samples: SampleSet,
    radius: f64,
    index: KdTree,
    backward: Vec<OnceLock<Box<[Neighbor]>>>,
    forward: Vec<OnceLock<Box<[Neighbor]>>>,
}

impl NeighborGraph {
    pub fn new(space: StateSpace, samples: SampleSet, radius: f64) -> Self {
        let timed = space.is_timed();
        let points = samples
            .states()
            .iter()
            .map(|s| [s.x, s.y, if timed { s.t } else { 0.0 }])
            .collect();
        let index = KdTree::build(points, if timed { 3 } else { 2 });
        let n = samples.len();
        let cells = |count: usize| (0..count).map(|_| OnceLock::new()).collect::<Vec<_>>();
        let forward = if timed { cells(n) } else { Vec::new() };
        Self { space, samples, radius, index, backward: cells(n), forward }
    }

    pub fn space(&self) -> &StateSpace {
        &self.space
    }

    pub fn samples(&self) -> &SampleSet {
        &self.samples
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn state(&self, id: NodeId) -> &State {
        self.samples.state(id)
    }

    /// Cached nodes that can reach `v` within the graph radius. For the
    /// geometric space this is the symmetric neighborhood.
    pub fn near_backward(&self, v: NodeId) -> &[Neighbor] {
        self.backward[v as usize].get_or_init(|| self.query(self.state(v), Some(v), self.radius, Direction::Backward).into())
    }

    /// Cached nodes reachable from `v` within the graph radius.
    pub fn near_forward(&self, v: NodeId) -> &[Neighbor] {
        if !self.space.is_timed() {
            return self.near_backward(v);
        }
        self.forward[v as usize].get_or_init(|| self.query(self.state(v), Some(v), self.radius, Direction::Forward).into())
    }

    /// Symmetric neighborhood. Timed spaces have none, so there it is the
    /// union of both directions.
    pub fn near(&self, v: NodeId) -> Vec<Neighbor> {
        if !self.space.is_timed() {
            return self.near_backward(v).to_vec();
        }
        let mut all: Vec<Neighbor> = self.near_backward(v).iter().chain(self.near_forward(v)).copied().collect();
        all.sort_by_key(|n| n.id);
        all.dedup_by_key(|n| n.id);
        all
    }

    /// Nodes whose planar position lies in the box `[lo, hi]`, any time,
    /// in ascending id order.
    pub fn nodes_in_box(&self, lo: [f64; 2], hi: [f64; 2]) -> Vec<NodeId> {
        let mut out = Vec::new();
        self.index.query_box(&[lo[0], lo[1], f64::NEG_INFINITY], &[hi[0], hi[1], f64::INFINITY], &mut out);
        out.sort_unstable();
        out
    }

    /// Uncached query around node `v` with an arbitrary threshold.
    pub fn near_within(&self, v: NodeId, r: f64, dir: Direction) -> Vec<Neighbor> {
        self.query(self.state(v), Some(v), r, dir)
    }

    /// Nodes reachable from an arbitrary state (not necessarily a node).
    pub fn reachable_from(&self, s: &State, r: f64) -> Vec<Neighbor> {
        self.query(s, None, r, Direction::Forward)
    }

    fn query(&self, s: &State, exclude: Option<NodeId>, r: f64, dir: Direction) -> Vec<Neighbor> {
        if !(r > 0.0) {
            return Vec::new();
        }
        let e = self.space.reach_extent(r);
        let mut lo = [s.x - e, s.y - e, f64::NEG_INFINITY];
        let mut hi = [s.x + e, s.y + e, f64::INFINITY];
        let timed = self.space.is_timed();
        if timed && !s.is_free_time() {
            match dir {
                Direction::Backward => {
                    lo[2] = s.t - r;
                    hi[2] = s.t;
                }
                Direction::Forward => {
                    lo[2] = s.t;
                    hi[2] = s.t + r;
                }
            }
        }
        let mut candidates = Vec::new();
        if !(timed && s.is_free_time() && dir == Direction::Forward) {
            self.index.query_box(&lo, &hi, &mut candidates);
        }
        // the free-time goal sits at t = ∞, outside every finite time window
        let goal = self.samples.goal();
        if timed && dir == Direction::Forward && self.state(goal).is_free_time() && !candidates.contains(&goal) {
            let g = self.state(goal);
            if (g.x - s.x).abs() <= e && (g.y - s.y).abs() <= e {
                candidates.push(goal);
            }
        }
        candidates.sort_unstable();
        let mut out = Vec::new();
        for id in candidates {
            if Some(id) == exclude {
                continue;
            }
            let other = self.state(id);
            let (a, b) = match dir {
                Direction::Backward => (other, s),
                Direction::Forward => (s, other),
            };
            if self.space.kind == StateSpaceKind::Euclid2D {
                let d = a.distance_to(b);
                if d <= r {
                    out.push(Neighbor { id, cost: d });
                }
                continue;
            }
            match self.space.cost_estimate(a, b) {
                Some(est) if est <= r => {}
                _ => continue,
            }
            if let Some(c) = self.space.steer_cost(a, b) {
                if c <= r {
                    out.push(Neighbor { id, cost: c });
                }
            }
        }
        out
    }
}
