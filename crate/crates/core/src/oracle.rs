//! Reference solvers for verification. Nothing here touches the replanning
//! tree; the point is to get the same answers by independent means.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::f64::consts::PI;

use crate::spatial::{NeighborGraph, NodeId, SampleSet};
use crate::statespace::{StateSpace, Trajectory};
use crate::world::{collision_free, ObstaclePrediction, ObstacleSnapshot};

#[derive(Clone, Debug, PartialEq)]
pub struct OracleResult {
    /// Cost-to-goal per node, infinite where unreached.
    pub cost: Vec<f64>,
    pub parent: Vec<Option<NodeId>>,
    pub robot_cost: f64,
    pub collision_checks: u64,
}

#[derive(Clone, Copy, PartialEq)]
struct Entry(f64, NodeId);

impl Eq for Entry {}

impl Ord for Entry {
    // reversed: BinaryHeap is a max-heap
    fn cmp(&self, other: &Self) -> Ordering {
        other.0.total_cmp(&self.0).then(other.1.cmp(&self.1))
    }
}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Status {
    Unvisited,
    Open,
    Closed,
}

/// Single-pass fast marching tree from the goal, with explicit unvisited,
/// open and closed sets and lazy collision checking. Stops once `v_robot`
/// is extracted or nothing is left open.
pub fn fmt_star(graph: &NeighborGraph, snapshot: &ObstacleSnapshot, v_robot: NodeId, spacing: f64) -> OracleResult {
    let n = graph.len();
    let space = graph.space();
    let goal = graph.samples().goal();
    let mut cost = vec![f64::INFINITY; n];
    let mut parent = vec![None; n];
    let mut status = vec![Status::Unvisited; n];
    let mut checks = 0;
    let mut heap = BinaryHeap::new();
    cost[goal as usize] = 0.0;
    status[goal as usize] = Status::Open;
    heap.push(Entry(0.0, goal));
    while let Some(Entry(_, z)) = heap.pop() {
        if status[z as usize] != Status::Open {
            continue;
        }
        if z == v_robot {
            break;
        }
        let mut fresh = Vec::new();
        for near in graph.near_backward(z) {
            let x = near.id;
            if status[x as usize] != Status::Unvisited {
                continue;
            }
            let mut best: Option<(NodeId, f64)> = None;
            for y in graph.near_forward(x) {
                if status[y.id as usize] != Status::Open {
                    continue;
                }
                let via = cost[y.id as usize] + y.cost;
                if best.map_or(true, |(b, c)| via < c || (via == c && y.id < b)) {
                    best = Some((y.id, via));
                }
            }
            let Some((y, via)) = best else { continue };
            let traj = space.steer(graph.state(x), graph.state(y)).expect("neighbors are steerable");
            if collision_free(&traj, snapshot, spacing, &mut checks) {
                cost[x as usize] = via;
                parent[x as usize] = Some(y);
                fresh.push(x);
            }
        }
        for x in fresh {
            status[x as usize] = Status::Open;
            heap.push(Entry(cost[x as usize], x));
        }
        status[z as usize] = Status::Closed;
    }
    let robot_cost = cost[v_robot as usize];
    OracleResult { cost, parent, robot_cost, collision_checks: checks }
}

/// Exact shortest paths to the goal over every collision-free connection of
/// cost at most `radius`. Quadratic in the number of nodes.
pub fn dijkstra_disk_graph(
    space: &StateSpace,
    samples: &SampleSet,
    radius: f64,
    snapshot: &ObstacleSnapshot,
    v_robot: NodeId,
    spacing: f64,
) -> OracleResult {
    let n = samples.len();
    let mut incoming: Vec<Vec<(NodeId, f64)>> = vec![Vec::new(); n];
    let mut checks = 0;
    for u in 0..n {
        for v in 0..n {
            if u == v {
                continue;
            }
            let Some(traj) = space.steer(samples.state(u as NodeId), samples.state(v as NodeId)) else { continue };
            if traj.cost <= radius && collision_free(&traj, snapshot, spacing, &mut checks) {
                incoming[v].push((u as NodeId, traj.cost));
            }
        }
    }
    let goal = samples.goal();
    let mut cost = vec![f64::INFINITY; n];
    let mut parent = vec![None; n];
    let mut done = vec![false; n];
    let mut heap = BinaryHeap::new();
    cost[goal as usize] = 0.0;
    heap.push(Entry(0.0, goal));
    while let Some(Entry(c, v)) = heap.pop() {
        if done[v as usize] {
            continue;
        }
        done[v as usize] = true;
        for &(u, w) in &incoming[v as usize] {
            let via = c + w;
            if via < cost[u as usize] {
                cost[u as usize] = via;
                parent[u as usize] = Some(v);
                heap.push(Entry(via, u));
            }
        }
    }
    let robot_cost = cost[v_robot as usize];
    OracleResult { cost, parent, robot_cost, collision_checks: checks }
}

fn dist(a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - b[0]).hypot(a[1] - b[1])
}

/// Length of the shortest planar path from `start` to `goal` around one
/// disk: two tangent segments and the shorter connecting arc, or the
/// straight line when the segment misses the disk.
pub fn analytic_circle_detour(start: [f64; 2], goal: [f64; 2], center: [f64; 2], radius: f64) -> f64 {
    let straight = dist(start, goal);
    let d = [goal[0] - start[0], goal[1] - start[1]];
    let len_sq = d[0] * d[0] + d[1] * d[1];
    let u = if len_sq > 0.0 {
        (((center[0] - start[0]) * d[0] + (center[1] - start[1]) * d[1]) / len_sq).clamp(0.0, 1.0)
    } else {
        0.0
    };
    let closest = [start[0] + u * d[0], start[1] + u * d[1]];
    if dist(closest, center) >= radius {
        return straight;
    }
    let ds = dist(start, center);
    let dg = dist(goal, center);
    let a = [start[0] - center[0], start[1] - center[1]];
    let b = [goal[0] - center[0], goal[1] - center[1]];
    let phi = ((a[0] * b[0] + a[1] * b[1]) / (ds * dg)).clamp(-1.0, 1.0).acos();
    let arc = phi - (radius / ds).acos() - (radius / dg).acos();
    (ds * ds - radius * radius).sqrt() + (dg * dg - radius * radius).sqrt() + radius * arc.max(0.0)
}

/// Minimum clearance (distance minus radius) between a trajectory and a
/// predicted obstacle, sampled every `step` seconds (or metres for the
/// untimed space).
pub fn dense_clearance(traj: &Trajectory, obs: &ObstaclePrediction, step: f64) -> f64 {
    let span = if traj.duration() > 0.0 { traj.duration() } else { traj.spatial_length_bound() };
    let pieces = (span / step).ceil().max(1.0) as usize;
    (0..=pieces)
        .map(|i| {
            let s = traj.state_at_fraction(i as f64 / pieces as f64);
            dist(s.position(), obs.position_at(s.t)) - obs.radius
        })
        .fold(f64::INFINITY, f64::min)
}

/// Dense-sweep verdict at the default oracle resolution of 1e-3.
pub fn dense_sweep_free(traj: &Trajectory, snapshot: &ObstacleSnapshot) -> bool {
    snapshot.predictions().all(|o| dense_clearance(traj, o, 1e-3) > 0.0)
}

/// Shortest path around a disk through a circumscribed regular polygon with
/// `sides` vertices. Converges to the true optimum from above.
pub fn polygon_detour(start: [f64; 2], goal: [f64; 2], center: [f64; 2], radius: f64, sides: usize) -> f64 {
    let vr = radius / (PI / sides as f64).cos();
    let mut pts = vec![start, goal];
    pts.extend((0..sides).map(|i| {
        let a = 2.0 * PI * i as f64 / sides as f64;
        [center[0] + vr * a.cos(), center[1] + vr * a.sin()]
    }));
    let clear = |p: [f64; 2], q: [f64; 2]| {
        let d = [q[0] - p[0], q[1] - p[1]];
        let len_sq = d[0] * d[0] + d[1] * d[1];
        let u = if len_sq > 0.0 { (((center[0] - p[0]) * d[0] + (center[1] - p[1]) * d[1]) / len_sq).clamp(0.0, 1.0) } else { 0.0 };
        dist([p[0] + u * d[0], p[1] + u * d[1]], center) >= radius * (1.0 - 1e-12)
    };
    let n = pts.len();
    let mut cost = vec![f64::INFINITY; n];
    let mut done = vec![false; n];
    cost[0] = 0.0;
    for _ in 0..n {
        let Some(v) = (0..n).filter(|&i| !done[i]).min_by(|&a, &b| cost[a].total_cmp(&cost[b])) else { break };
        done[v] = true;
        for w in 0..n {
            if !done[w] && clear(pts[v], pts[w]) {
                cost[w] = cost[w].min(cost[v] + dist(pts[v], pts[w]));
            }
        }
    }
    cost[1]
}
