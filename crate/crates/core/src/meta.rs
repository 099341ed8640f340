//! Meta-initialization: one network trained across randomly drawn environments.
//!
//! The interaction environment is redrawn once per workflow, and every replay
//! step redraws a fresh environment to re-price the sampled batch. The final
//! online parameters become the initialization for every unit of a new engine.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::drl_engine::{Engine, EngineCheckpoint, UnitCheckpoint, ENGINE_CHECKPOINT_VERSION};
use crate::env_model::EnvironmentSpec;
use crate::error::{Error, Result};
use crate::neuralnet::{MlpParams, TrainConfig};
use crate::rng::{streams, RandomStream};
use crate::workflow_gen::{generate_batch, GenConfig};

/// Uniform ranges for capacities and bandwidths; densities and weights fixed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnvRanges {
    pub c_local: (f64, f64),
    pub c_edge: (f64, f64),
    pub c_cloud: (f64, f64),
    pub b_device_edge: (f64, f64),
    pub b_edge_cloud: (f64, f64),
    pub b_device_cloud: (f64, f64),
    pub d_local: f64,
    pub d_edge: f64,
    pub d_cloud: f64,
    pub alpha: f64,
    pub beta: f64,
    pub delta: f64,
}

impl EnvRanges {
    /// Ranges that can only produce `env`.
    pub fn collapsed(env: &EnvironmentSpec) -> Self {
        Self {
            c_local: (env.c_local, env.c_local),
            c_edge: (env.c_edge, env.c_edge),
            c_cloud: (env.c_cloud, env.c_cloud),
            b_device_edge: (env.b_device_edge, env.b_device_edge),
            b_edge_cloud: (env.b_edge_cloud, env.b_edge_cloud),
            b_device_cloud: (env.b_device_cloud, env.b_device_cloud),
            d_local: env.d_local,
            d_edge: env.d_edge,
            d_cloud: env.d_cloud,
            alpha: env.alpha,
            beta: env.beta,
            delta: env.delta,
        }
    }

    fn ranged(&self) -> [(&'static str, (f64, f64)); 6] {
        [
            ("c_local", self.c_local),
            ("c_edge", self.c_edge),
            ("c_cloud", self.c_cloud),
            ("b_device_edge", self.b_device_edge),
            ("b_edge_cloud", self.b_edge_cloud),
            ("b_device_cloud", self.b_device_cloud),
        ]
    }

    pub fn validate(&self) -> Result<()> {
        for (name, (lo, hi)) in self.ranged() {
            if !(lo > 0.0 && lo <= hi && hi.is_finite()) {
                return Err(Error::InvalidEnvironment(format!("{name} range [{lo}, {hi}] must be positive and ordered")));
            }
        }
        self.midpoint().validate()
    }

    pub fn midpoint(&self) -> EnvironmentSpec {
        let mid = |(lo, hi): (f64, f64)| lo + (hi - lo) / 2.0;
        EnvironmentSpec {
            c_local: mid(self.c_local),
            c_edge: mid(self.c_edge),
            c_cloud: mid(self.c_cloud),
            b_device_edge: mid(self.b_device_edge),
            b_edge_cloud: mid(self.b_edge_cloud),
            b_device_cloud: mid(self.b_device_cloud),
            d_local: self.d_local,
            d_edge: self.d_edge,
            d_cloud: self.d_cloud,
            alpha: self.alpha,
            beta: self.beta,
            delta: self.delta,
        }
    }
}

/// Independent uniform draw of every ranged parameter.
pub fn sample_environment(rng: &mut RandomStream, ranges: &EnvRanges) -> EnvironmentSpec {
    EnvironmentSpec {
        c_local: rng.uniform(ranges.c_local.0, ranges.c_local.1),
        c_edge: rng.uniform(ranges.c_edge.0, ranges.c_edge.1),
        c_cloud: rng.uniform(ranges.c_cloud.0, ranges.c_cloud.1),
        b_device_edge: rng.uniform(ranges.b_device_edge.0, ranges.b_device_edge.1),
        b_edge_cloud: rng.uniform(ranges.b_edge_cloud.0, ranges.b_edge_cloud.1),
        b_device_cloud: rng.uniform(ranges.b_device_cloud.0, ranges.b_device_cloud.1),
        d_local: ranges.d_local,
        d_edge: ranges.d_edge,
        d_cloud: ranges.d_cloud,
        alpha: ranges.alpha,
        beta: ranges.beta,
        delta: ranges.delta,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetaParams {
    pub psi: MlpParams,
}

impl MetaParams {
    /// Written as a single-unit engine checkpoint so the train command can read it back.
    pub fn to_checkpoint(&self, cfg: &TrainConfig, env: EnvironmentSpec) -> EngineCheckpoint {
        EngineCheckpoint {
            version: ENGINE_CHECKPOINT_VERSION,
            config: TrainConfig { units: 1, ..cfg.clone() },
            env,
            units: vec![UnitCheckpoint { online: self.psi.clone(), target: self.psi.clone(), steps_since_freeze: 0 }],
            interactions: 0,
            train_steps: 0,
        }
    }

    pub fn from_checkpoint(ck: &EngineCheckpoint) -> Result<Self> {
        let unit = ck.units.first().ok_or_else(|| Error::InvalidConfig("checkpoint holds no units".into()))?;
        unit.online.validate()?;
        Ok(Self { psi: unit.online.clone() })
    }

    pub fn save(&self, path: &Path, cfg: &TrainConfig, env: EnvironmentSpec) -> Result<()> {
        self.to_checkpoint(cfg, env).save(path)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_checkpoint(&EngineCheckpoint::load(path)?)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MetaConfig {
    /// Interaction steps (memory insertions) of the meta run.
    pub interaction_steps: u64,
}

impl Default for MetaConfig {
    fn default() -> Self {
        Self { interaction_steps: 10_000 }
    }
}

/// The workflows a meta run cycles through for `seed`.
pub fn meta_workflows(workflow_cfg: &GenConfig, seed: u64) -> Vec<crate::env_model::Workflow> {
    generate_batch(&mut RandomStream::new(seed, streams::WORKFLOWS), workflow_cfg)
}

pub fn train_meta(
    cfg: &TrainConfig,
    ranges: &EnvRanges,
    workflow_cfg: &GenConfig,
    meta: &MetaConfig,
    seed: u64,
) -> Result<MetaParams> {
    train_meta_observed(cfg, ranges, workflow_cfg, meta, seed, |_, _| {})
}

/// As [`train_meta`], calling `observe(workflows_done, engine)` after every workflow.
pub fn train_meta_observed(
    cfg: &TrainConfig,
    ranges: &EnvRanges,
    workflow_cfg: &GenConfig,
    meta: &MetaConfig,
    seed: u64,
    mut observe: impl FnMut(u64, &Engine),
) -> Result<MetaParams> {
    ranges.validate()?;
    workflow_cfg.validate()?;
    let cfg = TrainConfig { units: 1, ..cfg.clone() };
    let mut engine = Engine::new(cfg, ranges.midpoint(), seed)?;
    let workflows = meta_workflows(workflow_cfg, seed);
    let mut env_rng = RandomStream::new(seed, streams::ENV_SAMPLING);
    let mut done = 0;
    if !workflows.is_empty() {
        for w in workflows.iter().cycle() {
            if engine.interactions() >= meta.interaction_steps {
                break;
            }
            let interaction_env = sample_environment(&mut env_rng, ranges);
            engine.interact(w, &interaction_env, &mut || sample_environment(&mut env_rng, ranges))?;
            done += 1;
            observe(done, &engine);
        }
    }
    Ok(MetaParams { psi: engine.units()[0].online.clone() })
}
