/// Work done by one planner update (obstacle repair plus expansion).
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct RepairMetrics {
    /// Nodes invalidated by new obstacles.
    pub n_aff: u64,
    /// Open-queue insertions made while queueing neighbors of changed nodes.
    pub n_c: u64,
    /// Nodes extracted from the open queue.
    pub k: u64,
    /// Collision checks of candidate connections and tree edges.
    pub coll_checks: u64,
    /// Cost decreases of nodes that already had a finite cost.
    pub rewires: u64,
    /// Wall time of the update, seconds.
    pub wall_s: f64,
}

impl RepairMetrics {
    pub fn wall_ms(&self) -> f64 {
        self.wall_s * 1e3
    }
}
