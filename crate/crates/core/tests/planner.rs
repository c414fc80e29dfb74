use std::sync::Arc;

use fmtx::oracle::{dijkstra_disk_graph, fmt_star};
use fmtx::planner::Planner;
use fmtx::scenario::ScenarioConfig;
use fmtx::sim::prepare;
use fmtx::spatial::{stream_rng, NeighborGraph, NodeId, SCENARIO_STREAM};
use fmtx::statespace::{SpaceParams, State, StateSpaceKind, DEFAULT_CHECK_SPACING};
use fmtx::verify::random_graph;
use fmtx::world::{collision_free, ObstaclePrediction, ObstacleSnapshot, WorldDiff};
use proptest::prelude::*;
use rand::Rng;

fn optimum(graph: &NeighborGraph, snap: &ObstacleSnapshot, v: NodeId) -> f64 {
    dijkstra_disk_graph(graph.space(), graph.samples(), graph.radius(), snap, v, DEFAULT_CHECK_SPACING).robot_cost
}

fn disks(seed: u64, count: usize) -> Vec<ObstaclePrediction> {
    let mut rng = stream_rng(seed, SCENARIO_STREAM);
    (0..count as u32)
        .map(|id| ObstaclePrediction::fixed(id, [rng.gen_range(-6.0..6.0), rng.gen_range(-6.0..6.0)], rng.gen_range(0.5..2.0)))
        .collect()
}

fn path_is_free(p: &Planner, v: NodeId) -> bool {
    let Some(path) = p.extract_path(v).unwrap() else { return true };
    let mut checks = 0;
    path.nodes.windows(2).all(|w| collision_free(&p.edge_trajectory(w[0], w[1]).unwrap(), p.obstacles(), p.spacing(), &mut checks))
}

#[test]
fn removal_rewires_finite_costs() {
    // frozen seed: removing the disk shortens paths that were already finite
    let g = random_graph(300, 1.5, 0);
    let mut p = Planner::new(Arc::clone(&g)).unwrap();
    let init = g.samples().init();
    let o = ObstaclePrediction::fixed(0, [0.0, 0.0], 2.5);
    p.update_obstacles(&WorldDiff { plus: vec![o], minus: vec![] });
    p.expand(None);
    let blocked = p.cost(init);
    assert!(blocked.is_finite());
    p.take_metrics();
    p.update_obstacles(&WorldDiff { plus: vec![], minus: vec![o] });
    p.expand(None);
    let m = p.take_metrics();
    assert!(m.rewires > 0, "{m:?}");
    assert!(p.cost(init) < blocked);
    assert!((p.cost(init) - optimum(&g, &ObstacleSnapshot::empty(), init)).abs() < 1e-9);
    p.check_invariants().unwrap();
}

#[test]
fn full_expansion_matches_dijkstra_everywhere() {
    let g = random_graph(400, 1.5, 3);
    let mut p = Planner::new(Arc::clone(&g)).unwrap();
    p.expand(None);
    let r = dijkstra_disk_graph(g.space(), g.samples(), g.radius(), &ObstacleSnapshot::empty(), g.samples().init(), DEFAULT_CHECK_SPACING);
    for v in 0..g.len() as NodeId {
        let (a, b) = (p.cost(v), r.cost[v as usize]);
        assert!((a.is_infinite() && b.is_infinite()) || (a - b).abs() < 1e-9, "node {v}: {a} vs {b}");
    }
}

#[test]
fn timed_paths_run_forward_in_time() {
    let mut cfg = ScenarioConfig::new(
        StateSpaceKind::HolonomicTime,
        SpaceParams::arena([-20.0, 20.0], [-20.0, 20.0]),
        800,
        2.0,
        State::xy(-15.0, -15.0),
        State::xy(15.0, 15.0),
    );
    cfg.seed = 4;
    let setup = prepare(&cfg, cfg.seed).unwrap();
    let mut p = Planner::new(Arc::clone(&setup.graph)).unwrap();
    let init = setup.graph.samples().init();
    p.expand(Some(init));
    let path = p.extract_path(init).unwrap().expect("reachable");
    let times: Vec<f64> = path.nodes.iter().map(|&v| setup.graph.state(v).t).collect();
    assert!(times.windows(2).all(|w| w[0] < w[1]), "{times:?}");
    let dur: f64 = path.nodes.windows(2).map(|w| p.edge_trajectory(w[0], w[1]).unwrap().cost).sum();
    assert!((dur - p.cost(init)).abs() < 1e-9);
}

#[test]
fn same_inputs_same_tree() {
    let run = || {
        let g = random_graph(500, 1.5, 9);
        let mut p = Planner::new(g).unwrap();
        p.update_obstacles(&WorldDiff { plus: disks(9, 4), minus: vec![] });
        p.expand(None);
        (0..p.len() as NodeId).map(|v| (p.cost(v).to_bits(), p.parent(v))).collect::<Vec<_>>()
    };
    assert_eq!(run(), run());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    /// Random add/remove scripts keep the tree well formed, the robot's path
    /// collision-free and its cost between the graph optimum and fresh FMT*.
    #[test]
    fn scripts_keep_the_tree_sound(seed in 0u64..1000, n in 100usize..600, steps in 2usize..7) {
        let g = random_graph(n, 1.5, seed);
        let init = g.samples().init();
        let mut p = Planner::new(Arc::clone(&g)).unwrap();
        p.expand(Some(init));
        let pool = disks(seed, 12);
        let mut rng = stream_rng(seed, 99);
        let mut live: Vec<ObstaclePrediction> = Vec::new();
        for _ in 0..steps {
            let mut d = WorldDiff::default();
            for o in &pool {
                let here = live.iter().any(|l| l.id == o.id);
                if rng.gen_bool(0.3) {
                    if here { d.minus.push(*o) } else { d.plus.push(*o) }
                }
            }
            live.retain(|l| !d.minus.iter().any(|m| m.id == l.id));
            live.extend(d.plus.iter().copied());
            let before: Vec<f64> = (0..g.len() as NodeId).map(|v| p.cost(v)).collect();
            p.update_obstacles(&d);
            let after_update: Vec<f64> = (0..g.len() as NodeId).map(|v| p.cost(v)).collect();
            p.expand(Some(init));
            p.check_invariants().map_err(TestCaseError::fail)?;
            // expansion only lowers costs that survived the update
            for v in 0..g.len() {
                if after_update[v].is_finite() {
                    prop_assert!(p.cost(v as NodeId) <= after_update[v]);
                }
            }
            // an update without additions orphans nothing
            if d.plus.is_empty() {
                prop_assert!(before.iter().zip(&after_update).all(|(a, b)| a == b));
            }
            let ours = p.cost(init);
            let best = optimum(&g, p.obstacles(), init);
            let fresh = fmt_star(&g, p.obstacles(), init, DEFAULT_CHECK_SPACING).robot_cost;
            prop_assert!(ours >= best - 1e-9, "{ours} below optimum {best}");
            prop_assert!(ours <= fresh + 1e-9, "{ours} above fresh FMT* {fresh}");
            prop_assert_eq!(ours.is_finite(), best.is_finite());
            prop_assert!(path_is_free(&p, init));
        }
    }

    /// Removing everything that was added restores the obstacle-free optimum.
    #[test]
    fn clearing_restores_the_free_optimum(seed in 0u64..1000, count in 1usize..8) {
        let g = random_graph(300, 1.5, seed);
        let init = g.samples().init();
        let mut p = Planner::new(Arc::clone(&g)).unwrap();
        let obs = disks(seed, count);
        p.update_obstacles(&WorldDiff { plus: obs.clone(), minus: vec![] });
        p.expand(Some(init));
        p.update_obstacles(&WorldDiff { plus: vec![], minus: obs });
        p.expand(Some(init));
        prop_assert_eq!(p.blocked_edge_count(), 0);
        let free = optimum(&g, &ObstacleSnapshot::empty(), init);
        prop_assert!((p.cost(init) - free).abs() < 1e-9, "{} vs {free}", p.cost(init));
    }
}
