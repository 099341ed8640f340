//! Fixed-width state encoding.
//!
//! Slot map for a state at task `i` of an engine sized for `max_tasks` tasks:
//!
//! ```text
//! [0]            previous tier index (0 for the first task)
//! [1]            inbound flow MB / 100 (0 for the first task)
//! [2], [3]       task i compute / 1e5, task i data MB / 100
//! [4 + 3k ..]    for each later task j = i+1+k: flow into j, compute of j, data of j
//! ```
//!
//! Unused trailing slots are zero. The width is `3 * max_tasks + 1`.

use crate::env_model::{OffloadDecision, Workflow};
use crate::error::{Error, Result};

pub const COMPUTE_SCALE: f64 = 1e5;
pub const MB_SCALE: f64 = 100.0;

pub fn state_dim(max_tasks: usize) -> usize {
    3 * max_tasks + 1
}

#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    pub values: Vec<f64>,
}

/// Encodes the state at zero-based task `i`. The previous tier is ignored for
/// the first task, which always starts from slot value 0.
pub fn build_state(w: &Workflow, i: usize, prev: OffloadDecision, max_tasks: usize) -> Result<StateVector> {
    let n = w.len();
    if i >= n {
        return Err(Error::TaskIndex { index: i, len: n });
    }
    if n > max_tasks {
        return Err(Error::InvalidWorkflow(format!("{n} tasks exceed the engine's max_tasks of {max_tasks}")));
    }
    let mut values = vec![0.0; state_dim(max_tasks)];
    if i > 0 {
        values[0] = prev.index() as f64;
        values[1] = w.flows[i - 1].transfer_mb / MB_SCALE;
    }
    values[2] = w.tasks[i].compute_demand / COMPUTE_SCALE;
    values[3] = w.tasks[i].data_size / MB_SCALE;
    for (k, j) in (i + 1..n).enumerate() {
        let base = 4 + 3 * k;
        values[base] = w.flows[j - 1].transfer_mb / MB_SCALE;
        values[base + 1] = w.tasks[j].compute_demand / COMPUTE_SCALE;
        values[base + 2] = w.tasks[j].data_size / MB_SCALE;
    }
    Ok(StateVector { values })
}
