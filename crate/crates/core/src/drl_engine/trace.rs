use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::Result;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    /// 1-based training step.
    pub step: u64,
    pub unit: usize,
    /// Loss before the step's update.
    pub loss: f64,
    pub epsilon: f64,
    /// The unit's target network was synced after this step.
    pub freeze: bool,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TrainingTrace {
    pub records: Vec<TraceRecord>,
}

impl TrainingTrace {
    pub fn extend(&mut self, other: TrainingTrace) {
        self.records.extend(other.records);
    }

    pub fn unit_losses(&self, unit: usize) -> Vec<f64> {
        self.records.iter().filter(|r| r.unit == unit).map(|r| r.loss).collect()
    }

    /// Steps after which `unit` synced its target network.
    pub fn freeze_steps(&self, unit: usize) -> Vec<u64> {
        self.records.iter().filter(|r| r.unit == unit && r.freeze).map(|r| r.step).collect()
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["step", "unit", "loss", "epsilon", "freeze_flag"])?;
        for r in &self.records {
            w.write_record([
                r.step.to_string(),
                r.unit.to_string(),
                r.loss.to_string(),
                r.epsilon.to_string(),
                u8::from(r.freeze).to_string(),
            ])
            ?;
        }
        w.flush()?;
        Ok(())
    }
}
