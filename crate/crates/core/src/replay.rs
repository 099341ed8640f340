//! Fixed-capacity experience pool with uniform sampling.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::env_model::{EdgeFlow, OffloadDecision, Task};
use crate::error::{Error, Result};
use crate::rng::RandomStream;

/// Raw inputs of the local objective at one step, kept so the reward can be
/// re-derived under a different environment at replay time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepInputs {
    pub prev: OffloadDecision,
    pub inbound: Option<EdgeFlow>,
    pub task: Task,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Transition {
    pub state: Vec<f64>,
    pub action: usize,
    pub reward: f64,
    pub next_state: Vec<f64>,
    /// Last task of its workflow; no bootstrap.
    pub terminal: bool,
    pub inputs: StepInputs,
}

#[derive(Debug, Clone)]
pub struct ReplayMemory {
    items: VecDeque<(u64, Transition)>,
    capacity: usize,
    next_seq: u64,
}

impl ReplayMemory {
    pub fn new(capacity: usize) -> Self {
        assert!(capacity > 0, "replay capacity must be positive");
        Self { items: VecDeque::with_capacity(capacity.min(1 << 16)), capacity, next_seq: 0 }
    }

    /// Stores `t`, evicting the oldest entry when full.
    pub fn push(&mut self, t: Transition) {
        if self.items.len() == self.capacity {
            self.items.pop_front();
        }
        self.items.push_back((self.next_seq, t));
        self.next_seq += 1;
    }

    /// `batch_size` indices drawn uniformly with replacement.
    pub fn sample_indices(&self, batch_size: usize, rng: &mut RandomStream) -> Result<Vec<usize>> {
        if self.items.is_empty() {
            return Err(Error::EmptyMemory);
        }
        Ok((0..batch_size).map(|_| rng.index(self.items.len())).collect())
    }

    pub fn sample(&self, batch_size: usize, rng: &mut RandomStream) -> Result<Vec<&Transition>> {
        Ok(self.sample_indices(batch_size, rng)?.into_iter().map(|i| &self.items[i].1).collect())
    }

    pub fn get(&self, i: usize) -> Option<&Transition> {
        self.items.get(i).map(|(_, t)| t)
    }

    /// Insertion sequence numbers, oldest first.
    pub fn sequence_numbers(&self) -> impl Iterator<Item = u64> + '_ {
        self.items.iter().map(|(s, _)| *s)
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn total_pushed(&self) -> u64 {
        self.next_seq
    }

    pub fn clear(&mut self) {
        self.items.clear();
    }
}
