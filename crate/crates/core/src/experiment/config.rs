use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::env_model::EnvironmentSpec;
use crate::error::{Error, Result};
use crate::meta::EnvRanges;
use crate::neuralnet::TrainConfig;
use crate::presets;
use crate::rng::derive_seed;
use crate::workflow_gen::GenConfig;

pub const CONFIG_VERSION: u32 = 1;

/// Salts separating the seed families derived from the master seed.
mod salt {
    pub const CELL: u64 = 0x5EED_0000;
    pub const META: u64 = 0x3E7A_0000;
}

/// One experiment document: every runner reads the sections it needs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub version: u32,
    pub master_seed: u64,
    /// Independent repetitions per setting.
    pub seeds: usize,
    pub environment: EnvironmentSpec,
    pub generator: GenConfig,
    pub training: TrainConfig,
    /// Training steps per engine run outside the convergence sweep.
    pub train_steps: u64,
    pub convergence: ConvergenceConfig,
    pub comparison: ComparisonConfig,
    pub meta: MetaStudyConfig,
    pub output_dir: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConvergenceConfig {
    pub learning_rates: Vec<f64>,
    pub batch_sizes: Vec<usize>,
    pub train_steps: u64,
    /// Units per run; only unit 0's loss is reported.
    pub units: usize,
    /// Threshold as a fraction of the initial loss.
    pub threshold_fraction: f64,
    /// Steps averaged for the initial loss and the trailing mean.
    pub smoothing_window: usize,
    pub std_window: usize,
    /// Batch size whose runs are scanned for freeze alignment.
    pub freeze_batch_size: usize,
    pub freeze_tolerance: u64,
}

impl Default for ConvergenceConfig {
    fn default() -> Self {
        Self {
            learning_rates: vec![0.1, 0.01, 0.001, 0.0001],
            batch_sizes: vec![128, 256, 512, 1024],
            train_steps: 2000,
            units: 1,
            threshold_fraction: 0.05,
            smoothing_window: 10,
            std_window: 50,
            freeze_batch_size: 1024,
            freeze_tolerance: 5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ComparisonConfig {
    pub deltas: Vec<f64>,
    pub dqn_units: usize,
    pub parallel_units: usize,
}

impl Default for ComparisonConfig {
    fn default() -> Self {
        Self { deltas: vec![0.0, 0.25, 0.5, 1.0, 2.0], dqn_units: 1, parallel_units: 4 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MetaStudyConfig {
    pub train_ranges: EnvRanges,
    pub test_environment: EnvironmentSpec,
    /// Interaction steps of the meta-initialization run.
    pub interaction_steps: u64,
    /// Training rounds (one replay step each) in the test environment.
    pub rounds: u64,
    pub eval_rounds: Vec<u64>,
}

impl Default for MetaStudyConfig {
    fn default() -> Self {
        Self {
            train_ranges: presets::meta_train_ranges(),
            test_environment: presets::meta_test(),
            interaction_steps: 10_000,
            rounds: 1000,
            eval_rounds: vec![20, 40, 80],
        }
    }
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            version: CONFIG_VERSION,
            master_seed: 2024,
            seeds: 5,
            environment: presets::reference(),
            generator: GenConfig::default(),
            training: TrainConfig::default(),
            train_steps: 2000,
            convergence: ConvergenceConfig::default(),
            comparison: ComparisonConfig::default(),
            meta: MetaStudyConfig::default(),
            output_dir: PathBuf::from("results"),
        }
    }
}

impl ExperimentConfig {
    pub fn from_json(s: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(s).map_err(|e| Error::InvalidConfig(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidConfig(m.into()));
        if self.version != CONFIG_VERSION {
            return bad(&format!("unsupported config version {}", self.version));
        }
        if self.seeds == 0 {
            return bad("seeds must be positive");
        }
        self.environment.validate()?;
        self.generator.validate()?;
        self.training.validate()?;
        if self.generator.tasks_per_workflow > self.training.max_tasks {
            return bad("generator.tasks_per_workflow exceeds training.max_tasks");
        }
        if self.generator.users * self.generator.workflows_per_user == 0 {
            return bad("generator must produce at least one workflow");
        }
        let c = &self.convergence;
        if c.learning_rates.iter().any(|&lr| !(lr > 0.0 && lr <= 1.0)) {
            return bad("convergence.learning_rates must lie in (0, 1]");
        }
        if c.batch_sizes.contains(&0) || c.freeze_batch_size == 0 || c.units == 0 {
            return bad("convergence batch sizes and units must be positive");
        }
        if !(c.threshold_fraction > 0.0) || c.smoothing_window == 0 || c.std_window < 2 {
            return bad("convergence threshold and windows must be positive (std_window >= 2)");
        }
        let k = &self.comparison;
        if k.deltas.iter().any(|&d| !(d >= 0.0 && d.is_finite())) {
            return bad("comparison.deltas must be finite and non-negative");
        }
        if k.dqn_units == 0 || k.parallel_units == 0 {
            return bad("comparison unit counts must be positive");
        }
        let m = &self.meta;
        m.train_ranges.validate()?;
        m.test_environment.validate()?;
        if m.eval_rounds.iter().any(|&r| r > m.rounds) {
            return bad("meta.eval_rounds must not exceed meta.rounds");
        }
        Ok(())
    }

    /// Seed of repetition `k`, shared by every setting so runs pair up.
    pub fn cell_seed(&self, k: usize) -> u64 {
        derive_seed(self.master_seed, salt::CELL + k as u64)
    }

    pub fn cell_seeds(&self) -> Vec<u64> {
        (0..self.seeds).map(|k| self.cell_seed(k)).collect()
    }

    pub fn meta_seed(&self) -> u64 {
        derive_seed(self.master_seed, salt::META)
    }
}
