//! Priority queue entries with lazy deletion.
//!
//! Both heaps may hold stale entries. An entry is live only if its
//! generation equals the generation currently stored for its edge.

use std::cmp::Ordering;

use crate::mesh::EdgeKey;

/// Ordered by ascending cost, then ascending edge key.
#[derive(Debug, Clone, Copy)]
pub struct QemEntry {
    pub cost: f64,
    pub edge: EdgeKey,
    pub generation: u64,
}

impl PartialEq for QemEntry {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for QemEntry {}

impl PartialOrd for QemEntry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for QemEntry {
    // `BinaryHeap` is a max-heap, so "greater" means "pops first".
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .cost
            .total_cmp(&self.cost)
            .then_with(|| other.edge.cmp(&self.edge))
            .then_with(|| other.generation.cmp(&self.generation))
    }
}

/// Ordered by descending recency, then ascending cost, then ascending key.
#[derive(Debug, Clone, Copy)]
pub struct EdgeQueueEntry {
    pub edge: EdgeKey,
    pub cost: f64,
    pub recency: u64,
    pub generation: u64,
}

impl PartialEq for EdgeQueueEntry {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for EdgeQueueEntry {}

impl PartialOrd for EdgeQueueEntry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for EdgeQueueEntry {
    fn cmp(&self, other: &Self) -> Ordering {
        self.recency
            .cmp(&other.recency)
            .then_with(|| other.cost.total_cmp(&self.cost))
            .then_with(|| other.edge.cmp(&self.edge))
            .then_with(|| other.generation.cmp(&self.generation))
    }
}
