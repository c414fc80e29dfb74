//! The replanning tree.
//!
//! The tree is rooted at the goal and `c(x)` is the cost of the best known
//! trajectory from `x` to the goal. For the timed spaces a tree edge from
//! child `x` to parent `y` is the trajectory `steer(x, y)`, so the robot
//! follows parent pointers forward in time. Expansion therefore looks for
//! children among the nodes that can reach the expanded node (`Near⁻`) and
//! for parents among the nodes a child can reach (`Near⁺`).
//!
//! Obstacle changes never trigger a rebuild. New obstacles orphan the
//! subtrees hanging below the tree edges they block; vanished obstacles put
//! the endpoints of the edges they alone blocked back in play. Either way the
//! finite-cost neighbors of the touched nodes are queued and the cost-ordered
//! expansion repairs the tree only as far as the robot needs.

mod metrics;
mod queue;

use rustc_hash::FxHashMap as HashMap;
use std::sync::Arc;
use std::time::{Duration, Instant};

pub use metrics::RepairMetrics;
pub use queue::OpenQueue;
pub use crate::spatial::NodeId;

use crate::error::{Error, Result};
use crate::spatial::NeighborGraph;
use crate::statespace::{State, Trajectory, DEFAULT_CHECK_SPACING};
use crate::world::{diff, edge_blocked, escape_free, first_blocker, ObstacleKey, ObstaclePrediction, ObstacleSnapshot, WorldDiff};

const NO_NODE: NodeId = NodeId::MAX;

/// `(child, parent)` for timed spaces; sorted endpoints for the symmetric
/// geometric space.
type EdgeKey = (NodeId, NodeId);

/// Node sequence from a start node to the goal.
#[derive(Clone, Debug, PartialEq)]
pub struct PlanPath {
    pub nodes: Vec<NodeId>,
    pub cost: f64,
}

/// Connection from the robot's actual state to the node it plans from.
#[derive(Clone, Debug, PartialEq)]
pub struct RobotLink {
    pub node: NodeId,
    pub trajectory: Trajectory,
}

impl RobotLink {
    pub fn cost(&self) -> f64 {
        self.trajectory.cost
    }
}

#[derive(Clone, Debug)]
pub struct StepReport {
    pub link: Option<RobotLink>,
    /// Cost of the robot's plan: link cost plus the node's cost-to-goal.
    pub c_robot: f64,
    pub metrics: RepairMetrics,
    pub added: usize,
    pub removed: usize,
}

impl StepReport {
    pub fn v_robot(&self) -> Option<NodeId> {
        self.link.as_ref().map(|l| l.node)
    }
}

#[derive(Clone, Debug)]
pub struct Planner {
    graph: Arc<NeighborGraph>,
    cost: Vec<f64>,
    parent: Vec<NodeId>,
    edge_cost: Vec<f64>,
    children: Vec<Vec<NodeId>>,
    open: OpenQueue,
    obstacles: ObstacleSnapshot,
    blocked: HashMap<EdgeKey, ObstacleKey>,
    blocked_by: HashMap<ObstacleKey, Vec<EdgeKey>>,
    t_now: f64,
    spacing: f64,
    timed: bool,
    metrics: RepairMetrics,
    snap_checks: u64,
}

impl Planner {
    /// Empty tree: only the goal has a cost, and it is the only open node.
    pub fn new(graph: Arc<NeighborGraph>) -> Result<Self> {
        let n = graph.len();
        let samples = graph.samples();
        let space = graph.space();
        if !space.contains(samples.state(samples.init())) {
            return Err(Error::config("start", "outside the state-space bounds"));
        }
        if !space.contains(samples.state(samples.goal())) {
            return Err(Error::config("goal", "outside the state-space bounds"));
        }
        let goal = samples.goal();
        let mut cost = vec![f64::INFINITY; n];
        cost[goal as usize] = 0.0;
        let mut open = OpenQueue::new(n);
        open.push(goal, 0.0);
        let timed = space.is_timed();
        Ok(Self {
            graph,
            cost,
            parent: vec![NO_NODE; n],
            edge_cost: vec![f64::INFINITY; n],
            children: vec![Vec::new(); n],
            open,
            obstacles: ObstacleSnapshot::empty(),
            blocked: HashMap::default(),
            blocked_by: HashMap::default(),
            t_now: 0.0,
            spacing: DEFAULT_CHECK_SPACING,
            timed,
            metrics: RepairMetrics::default(),
            snap_checks: 0,
        })
    }

    pub fn with_spacing(mut self, spacing: f64) -> Self {
        assert!(spacing > 0.0);
        self.spacing = spacing;
        self
    }

    pub fn graph(&self) -> &Arc<NeighborGraph> {
        &self.graph
    }

    pub fn len(&self) -> usize {
        self.cost.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cost.is_empty()
    }

    pub fn goal(&self) -> NodeId {
        self.graph.samples().goal()
    }

    pub fn init(&self) -> NodeId {
        self.graph.samples().init()
    }

    pub fn cost(&self, v: NodeId) -> f64 {
        self.cost[v as usize]
    }

    pub fn parent(&self, v: NodeId) -> Option<NodeId> {
        let p = self.parent[v as usize];
        (p != NO_NODE).then_some(p)
    }

    pub fn children(&self, v: NodeId) -> &[NodeId] {
        &self.children[v as usize]
    }

    pub fn is_open(&self, v: NodeId) -> bool {
        self.open.contains(v)
    }

    pub fn open_queue(&self) -> &OpenQueue {
        &self.open
    }

    /// The obstacle set `O` the tree is currently consistent with.
    pub fn obstacles(&self) -> &ObstacleSnapshot {
        &self.obstacles
    }

    pub fn t_now(&self) -> f64 {
        self.t_now
    }

    pub fn set_time(&mut self, t_now: f64) {
        self.t_now = t_now;
        self.obstacles.t_now = t_now;
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn metrics(&self) -> &RepairMetrics {
        &self.metrics
    }

    pub fn take_metrics(&mut self) -> RepairMetrics {
        std::mem::take(&mut self.metrics)
    }

    /// Collision checks spent choosing the robot's node, kept apart from the
    /// repair counters.
    pub fn snap_checks(&self) -> u64 {
        self.snap_checks
    }

    /// Number of memoized blocked edges.
    pub fn blocked_edge_count(&self) -> usize {
        self.blocked.len()
    }

    /// Trajectory of the tree edge from `child` to `parent`.
    pub fn edge_trajectory(&self, child: NodeId, parent: NodeId) -> Option<Trajectory> {
        self.graph.space().steer(self.graph.state(child), self.graph.state(parent))
    }

    fn edge_key(&self, child: NodeId, parent: NodeId) -> EdgeKey {
        if self.timed || child < parent {
            (child, parent)
        } else {
            (parent, child)
        }
    }

    fn is_stale(&self, x: NodeId) -> bool {
        self.timed && self.graph.state(x).t < self.t_now
    }

    fn memoize(&mut self, edge: EdgeKey, by: ObstacleKey) {
        if let std::collections::hash_map::Entry::Vacant(slot) = self.blocked.entry(edge) {
            slot.insert(by);
            self.blocked_by.entry(by).or_default().push(edge);
        }
    }

    /// Lazy collision check of a candidate connection, served from the
    /// blocked-edge memo when possible.
    fn connection_free(&mut self, child: NodeId, parent: NodeId) -> bool {
        let key = self.edge_key(child, parent);
        if self.blocked.contains_key(&key) {
            return false;
        }
        let traj = self.edge_trajectory(child, parent).expect("neighbor connections are steerable");
        match first_blocker(&traj, &self.obstacles, self.spacing, &mut self.metrics.coll_checks) {
            None => true,
            Some(by) => {
                self.memoize(key, by);
                false
            }
        }
    }

    /// Apply an observation diff: additions first, then removals.
    pub fn update_obstacles(&mut self, d: &WorldDiff) {
        if !d.plus.is_empty() {
            self.add_obstacles(&d.plus);
        }
        if !d.minus.is_empty() {
            self.remove_obstacles(&d.minus);
        }
    }

    pub fn add_obstacles(&mut self, plus: &[ObstaclePrediction]) {
        let graph = Arc::clone(&self.graph);
        let space = *graph.space();
        for o in plus {
            self.obstacles.insert(*o);
            let okey = o.key();
            let speed = o.speed();
            let mut orphans = Vec::new();
            // geometric snapshots are static, so only children within one edge
            // length of the disk can have a blocked tree edge
            let candidates: Vec<NodeId> = if self.timed {
                (0..self.len() as NodeId).collect()
            } else {
                let e = space.reach_extent(graph.radius()) + o.radius;
                let c = o.position;
                graph.nodes_in_box([c[0] - e, c[1] - e], [c[0] + e, c[1] + e])
            };
            for x in candidates {
                let p = self.parent[x as usize];
                if p == NO_NODE {
                    continue;
                }
                // displacement bound of the edge plus the obstacle's own sweep
                let ec = self.edge_cost[x as usize];
                let sx = graph.state(x);
                let c = o.position_at(sx.t);
                let reach = space.reach_extent(ec) + if self.timed { speed * ec } else { 0.0 };
                if (sx.x - c[0]).hypot(sx.y - c[1]) > reach + o.radius {
                    continue;
                }
                let traj = self.edge_trajectory(x, p).expect("tree edges are steerable");
                self.metrics.coll_checks += 1;
                if edge_blocked(&traj, o, self.spacing) {
                    let key = self.edge_key(x, p);
                    self.memoize(key, okey);
                    orphans.push(x);
                }
            }
            if orphans.is_empty() {
                continue;
            }
            let mut pruned = orphans.clone();
            pruned.extend(self.get_descendants(&orphans));
            pruned.sort_unstable();
            pruned.dedup();
            for &x in &pruned {
                self.open.remove(x);
                self.update_parent(x, None);
                self.cost[x as usize] = f64::INFINITY;
                self.edge_cost[x as usize] = f64::INFINITY;
            }
            self.metrics.n_aff += pruned.len() as u64;
            self.queue_neighbors(&pruned);
        }
    }

    pub fn remove_obstacles(&mut self, minus: &[ObstaclePrediction]) {
        let graph = Arc::clone(&self.graph);
        let space = graph.space();
        for o in minus {
            let okey = o.key();
            self.obstacles.remove(&okey);
            let edges = self.blocked_by.remove(&okey).unwrap_or_default();
            // a moved obstacle usually still covers most of what it blocked
            let successor = self.obstacles.predictions().find(|p| p.id == o.id).copied();
            let mut kept = Vec::new();
            let mut freed = Vec::new();
            for e in edges {
                let Some(slot) = self.blocked.get_mut(&e).filter(|k| **k == okey) else { continue };
                let traj = space.steer(graph.state(e.0), graph.state(e.1)).expect("memoized edges are steerable");
                if let Some(s) = successor.filter(|s| edge_blocked(&traj, s, self.spacing)) {
                    self.metrics.coll_checks += 1;
                    *slot = s.key();
                    kept.push(e);
                    continue;
                }
                match first_blocker(&traj, &self.obstacles, self.spacing, &mut self.metrics.coll_checks) {
                    Some(other) => {
                        *slot = other;
                        self.blocked_by.entry(other).or_default().push(e);
                    }
                    None => {
                        self.blocked.remove(&e);
                        freed.extend([e.0, e.1]);
                    }
                }
            }
            if let (Some(s), false) = (successor, kept.is_empty()) {
                self.blocked_by.entry(s.key()).or_default().extend(kept);
            }
            self.queue_neighbors(&freed);
        }
    }

    /// Queue the finite-cost neighbors of `nodes` that are not already open.
    /// Candidate parents of `u` are the nodes `u` can reach, so the forward
    /// neighborhood is used.
    pub fn queue_neighbors(&mut self, nodes: &[NodeId]) {
        let graph = Arc::clone(&self.graph);
        for &u in nodes {
            for y in graph.near_forward(u) {
                let c = self.cost[y.id as usize];
                if c < f64::INFINITY && !self.open.contains(y.id) {
                    self.open.push(y.id, c);
                    self.metrics.n_c += 1;
                }
            }
        }
    }

    /// Re-link `x` below `y_new`, keeping child lists in sync.
    pub fn update_parent(&mut self, x: NodeId, y_new: Option<NodeId>) {
        let new = y_new.unwrap_or(NO_NODE);
        let old = self.parent[x as usize];
        if old == new {
            return;
        }
        if old != NO_NODE {
            let kids = &mut self.children[old as usize];
            if let Some(i) = kids.iter().position(|&c| c == x) {
                kids.swap_remove(i);
            }
        }
        if new != NO_NODE {
            self.children[new as usize].push(x);
        }
        self.parent[x as usize] = new;
    }

    /// Cost-ordered expansion until the robot's node is settled.
    pub fn expand(&mut self, v_robot: Option<NodeId>) {
        self.expand_observed(v_robot, &mut |_, _| {});
    }

    /// [`Self::expand`] with a hook called after each extraction, before the
    /// extracted node is processed.
    pub fn expand_observed(&mut self, v_robot: Option<NodeId>, observer: &mut dyn FnMut(NodeId, &Planner)) {
        let graph = Arc::clone(&self.graph);
        loop {
            let Some((top, _)) = self.open.peek() else { break };
            let (c_robot, robot_open) = match v_robot {
                Some(v) => (self.cost[v as usize], self.open.contains(v)),
                None => (f64::INFINITY, false),
            };
            if !(top < c_robot || robot_open) {
                break;
            }
            let (_, z) = self.open.pop().expect("peeked");
            self.metrics.k += 1;
            observer(z, self);
            let cz = self.cost[z as usize];
            for near in graph.near_backward(z) {
                let x = near.id;
                let through_z = cz + near.cost;
                if !(self.cost[x as usize] > through_z) || self.is_stale(x) {
                    continue;
                }
                // best parent among open neighbors; z counts as open
                let mut best = (z, through_z, near.cost);
                for y in graph.near_forward(x) {
                    if y.id == z || !self.open.contains(y.id) {
                        continue;
                    }
                    let via = self.cost[y.id as usize] + y.cost;
                    if via < best.1 || (via == best.1 && y.id < best.0) {
                        best = (y.id, via, y.cost);
                    }
                }
                let already_tree_edge = self.parent[x as usize] == best.0;
                let (y_min, c_new, step) = if already_tree_edge || self.connection_free(x, best.0) {
                    best
                } else if self.parent[x as usize] == z {
                    // x already hangs below z: its tree edge is valid, only its
                    // cost is stale
                    (z, through_z, near.cost)
                } else {
                    continue;
                };
                if self.cost[x as usize] < f64::INFINITY {
                    self.metrics.rewires += 1;
                }
                self.cost[x as usize] = c_new;
                self.edge_cost[x as usize] = step;
                self.update_parent(x, Some(y_min));
                self.open.push(x, c_new);
            }
        }
    }

    /// All nodes below `roots` in the tree, excluding the roots.
    pub fn get_descendants(&self, roots: &[NodeId]) -> Vec<NodeId> {
        let mut seen = vec![false; self.len()];
        for &r in roots {
            seen[r as usize] = true;
        }
        let mut stack: Vec<NodeId> = roots.to_vec();
        let mut out = Vec::new();
        while let Some(v) = stack.pop() {
            for &c in &self.children[v as usize] {
                if !seen[c as usize] {
                    seen[c as usize] = true;
                    out.push(c);
                    stack.push(c);
                }
            }
        }
        out
    }

    /// Follow parent links from `v` to the goal. `None` for an orphan.
    pub fn extract_path(&self, v: NodeId) -> Result<Option<PlanPath>> {
        if !(self.cost[v as usize] < f64::INFINITY) {
            return Ok(None);
        }
        let goal = self.goal();
        let mut nodes = vec![v];
        let mut cur = v;
        while cur != goal {
            let p = self.parent[cur as usize];
            if p == NO_NODE {
                return Err(Error::Invariant(format!("node {cur} has finite cost but no parent")));
            }
            cur = p;
            nodes.push(cur);
            if nodes.len() > self.len() {
                return Err(Error::Invariant(format!("parent cycle through node {v}")));
            }
        }
        Ok(Some(PlanPath { nodes, cost: self.cost[v as usize] }))
    }

    /// Pick the node the robot plans from: the cheapest collision-free
    /// connection into the tree within the graph radius, or, when nothing
    /// nearby is connected, the nearest node it can reach. A connection may
    /// start inside an obstacle it is moving directly away from.
    pub fn snap_robot(&mut self, robot: &State) -> Option<RobotLink> {
        let graph = Arc::clone(&self.graph);
        let space = graph.space();
        let mut cands: Vec<(f64, f64, NodeId)> = graph
            .reachable_from(robot, graph.radius())
            .into_iter()
            .map(|n| (n.cost + self.cost[n.id as usize], n.cost, n.id))
            .collect();
        cands.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)).then(a.2.cmp(&b.2)));
        let split = cands.partition_point(|c| c.0 < f64::INFINITY);
        let (connected, rest) = cands.split_at_mut(split);
        rest.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.2.cmp(&b.2)));
        for &(_, _, id) in connected.iter().chain(rest.iter()) {
            let Some(traj) = space.steer(robot, graph.state(id)) else { continue };
            let mut checks = 0;
            let free = escape_free(&traj, &self.obstacles, self.spacing, &mut checks);
            self.snap_checks += checks;
            if free {
                return Some(RobotLink { node: id, trajectory: traj });
            }
        }
        None
    }

    /// One pass of the main loop: diff against the previous observation,
    /// repair, place the robot, expand. The reported wall time covers the
    /// repair and the expansion only.
    pub fn plan_step(&mut self, robot: &State, snapshot: ObstacleSnapshot) -> StepReport {
        self.metrics = RepairMetrics::default();
        self.set_time(snapshot.t_now);
        let d = diff(&self.obstacles, &snapshot);
        let clock = Instant::now();
        self.update_obstacles(&d);
        let mut busy: Duration = clock.elapsed();
        let mut link = self.snap_robot(robot);
        let clock = Instant::now();
        self.expand(link.as_ref().map(|l| l.node));
        busy += clock.elapsed();
        if link.as_ref().map_or(true, |l| !(self.cost(l.node) < f64::INFINITY)) {
            link = self.snap_robot(robot).or(link);
        }
        self.obstacles = snapshot;
        self.metrics.wall_s = busy.as_secs_f64();
        let c_robot = link.as_ref().map_or(f64::INFINITY, |l| l.cost() + self.cost(l.node));
        StepReport { link, c_robot, metrics: self.metrics, added: d.plus.len(), removed: d.minus.len() }
    }

    /// Check the structural invariants of the tree and queue.
    pub fn check_invariants(&self) -> std::result::Result<(), String> {
        let goal = self.goal();
        if self.cost[goal as usize] != 0.0 {
            return Err("goal cost is not zero".into());
        }
        if !self.open.is_consistent() {
            return Err("open queue index is corrupt".into());
        }
        for (key, id) in self.open.iter() {
            if !(key < f64::INFINITY) {
                return Err(format!("open node {id} has infinite key"));
            }
        }
        for x in 0..self.len() as NodeId {
            let c = self.cost[x as usize];
            match self.parent(x) {
                None if x != goal && c < f64::INFINITY => return Err(format!("node {x} has finite cost but no parent")),
                Some(_) if !(c < f64::INFINITY) => return Err(format!("node {x} has infinite cost but a parent")),
                Some(p) => {
                    if !self.children[p as usize].contains(&x) {
                        return Err(format!("parent {p} does not list child {x}"));
                    }
                    let step = self.edge_cost[x as usize];
                    if c + 1e-9 < self.cost[p as usize] + step {
                        return Err(format!("node {x} is cheaper than its parent {p} allows"));
                    }
                }
                None => {}
            }
            for &ch in &self.children[x as usize] {
                if self.parent[ch as usize] != x {
                    return Err(format!("child {ch} of {x} points elsewhere"));
                }
            }
            if c < f64::INFINITY {
                let mut cur = x;
                let mut steps = 0;
                while cur != goal {
                    cur = self.parent[cur as usize];
                    if cur == NO_NODE {
                        return Err(format!("node {x} does not reach the goal"));
                    }
                    steps += 1;
                    if steps > self.len() {
                        return Err(format!("cycle above node {x}"));
                    }
                }
            }
        }
        Ok(())
    }
}
