use std::collections::VecDeque;

use serde::Serialize;

use crate::plan::Plan;
use crate::world::{FailureKind, StepOutcome};

pub const MEMORY_CAPACITY: usize = 5;

/// One planning cycle: the plan, what happened when it ran, and the scene
/// text it was planned against.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MemoryEntry {
    pub cycle: u32,
    pub plan: Plan,
    /// Executed prefix only.
    pub outcomes: Vec<StepOutcome>,
    pub failure: Option<(FailureKind, u32)>,
    pub scene_digest: String,
}

/// Rolling FIFO of the most recent planning cycles.
#[derive(Debug, Clone, PartialEq)]
pub struct MemoryBuffer {
    entries: VecDeque<MemoryEntry>,
    capacity: usize,
}

impl Default for MemoryBuffer {
    fn default() -> Self {
        Self::new()
    }
}

impl MemoryBuffer {
    pub fn new() -> Self {
        Self::with_capacity(MEMORY_CAPACITY)
    }

    pub fn with_capacity(capacity: usize) -> Self {
        Self {
            entries: VecDeque::with_capacity(capacity + 1),
            capacity,
        }
    }

    /// Appends `entry`, evicting the oldest once full.
    pub fn push(&mut self, entry: MemoryEntry) {
        if self.capacity == 0 {
            return;
        }
        if self.entries.len() == self.capacity {
            self.entries.pop_front();
        }
        self.entries.push_back(entry);
    }

    /// Oldest first.
    pub fn iter(&self) -> impl Iterator<Item = &MemoryEntry> {
        self.entries.iter()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }
}
