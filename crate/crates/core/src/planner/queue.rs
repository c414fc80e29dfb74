//! Indexed binary min-heap over node ids.

use crate::spatial::NodeId;

const ABSENT: u32 = u32::MAX;

/// Min-heap keyed by `(cost, id)` with a position map, so membership tests,
/// removal and priority changes are `O(1)` / `O(log n)`.
#[derive(Clone, Debug)]
pub struct OpenQueue {
    heap: Vec<(f64, NodeId)>,
    pos: Vec<u32>,
}

fn before(a: (f64, NodeId), b: (f64, NodeId)) -> bool {
    a.0 < b.0 || (a.0 == b.0 && a.1 < b.1)
}

impl OpenQueue {
    pub fn new(capacity: usize) -> Self {
        Self { heap: Vec::new(), pos: vec![ABSENT; capacity] }
    }

    pub fn len(&self) -> usize {
        self.heap.len()
    }

    pub fn is_empty(&self) -> bool {
        self.heap.is_empty()
    }

    pub fn contains(&self, id: NodeId) -> bool {
        self.pos[id as usize] != ABSENT
    }

    pub fn peek(&self) -> Option<(f64, NodeId)> {
        self.heap.first().copied()
    }

    pub fn key_of(&self, id: NodeId) -> Option<f64> {
        let p = self.pos[id as usize];
        (p != ABSENT).then(|| self.heap[p as usize].0)
    }

    /// Insert `id`, or move it to `key` if already queued.
    pub fn push(&mut self, id: NodeId, key: f64) {
        debug_assert!(key.is_finite(), "queued keys must be finite");
        let p = self.pos[id as usize];
        if p != ABSENT {
            self.update(id, key);
            return;
        }
        self.heap.push((key, id));
        let i = self.heap.len() - 1;
        self.pos[id as usize] = i as u32;
        self.sift_up(i);
    }

    pub fn update(&mut self, id: NodeId, key: f64) {
        let i = self.pos[id as usize];
        assert!(i != ABSENT, "node {id} is not queued");
        let i = i as usize;
        let old = self.heap[i].0;
        self.heap[i].0 = key;
        if key < old {
            self.sift_up(i);
        } else {
            self.sift_down(i);
        }
    }

    pub fn pop(&mut self) -> Option<(f64, NodeId)> {
        if self.heap.is_empty() {
            return None;
        }
        let top = self.heap.swap_remove(0);
        self.pos[top.1 as usize] = ABSENT;
        if !self.heap.is_empty() {
            self.pos[self.heap[0].1 as usize] = 0;
            self.sift_down(0);
        }
        Some(top)
    }

    pub fn remove(&mut self, id: NodeId) -> bool {
        let i = self.pos[id as usize];
        if i == ABSENT {
            return false;
        }
        let i = i as usize;
        self.pos[id as usize] = ABSENT;
        let last = self.heap.pop().unwrap();
        if i < self.heap.len() {
            let moved = self.heap[i];
            self.heap[i] = last;
            self.pos[last.1 as usize] = i as u32;
            if before(last, moved) {
                self.sift_up(i);
            } else {
                self.sift_down(i);
            }
        }
        true
    }

    pub fn clear(&mut self) {
        for &(_, id) in &self.heap {
            self.pos[id as usize] = ABSENT;
        }
        self.heap.clear();
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, NodeId)> + '_ {
        self.heap.iter().copied()
    }

    fn sift_up(&mut self, mut i: usize) {
        while i > 0 {
            let parent = (i - 1) / 2;
            if !before(self.heap[i], self.heap[parent]) {
                break;
            }
            self.swap(i, parent);
            i = parent;
        }
    }

    fn sift_down(&mut self, mut i: usize) {
        let n = self.heap.len();
        loop {
            let l = 2 * i + 1;
            let r = l + 1;
            let mut m = i;
            if l < n && before(self.heap[l], self.heap[m]) {
                m = l;
            }
            if r < n && before(self.heap[r], self.heap[m]) {
                m = r;
            }
            if m == i {
                break;
            }
            self.swap(i, m);
            i = m;
        }
    }

    fn swap(&mut self, a: usize, b: usize) {
        self.heap.swap(a, b);
        self.pos[self.heap[a].1 as usize] = a as u32;
        self.pos[self.heap[b].1 as usize] = b as u32;
    }

    /// Heap order and position map agree. Used by invariant checks.
    pub fn is_consistent(&self) -> bool {
        let order = (1..self.heap.len()).all(|i| !before(self.heap[i], self.heap[(i - 1) / 2]));
        let index = self.heap.iter().enumerate().all(|(i, &(_, id))| self.pos[id as usize] == i as u32);
        let members = self.pos.iter().filter(|&&p| p != ABSENT).count() == self.heap.len();
        order && index && members
    }
}
