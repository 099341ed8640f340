//! Parallel deep Q-learning offloading engine.
//!
//! `s` units, each an online network and a frozen target copy, share one
//! replay memory. During training the behavior trajectory follows unit 0;
//! every unit regresses toward its own target network's bootstrap on the same
//! sampled batch. At decision time each unit rolls out its own greedy plan and
//! the cheapest plan wins.

mod state;
mod trace;

use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use state::{build_state, state_dim, StateVector, COMPUTE_SCALE, MB_SCALE};
pub use trace::{TraceRecord, TrainingTrace};

use crate::env_model::{local_objective_all, workflow_cost, CostBreakdown, EnvironmentSpec, OffloadDecision, Plan, Workflow};
use crate::error::{Error, Result};
use crate::neuralnet::{MlpParams, Sample, TrainConfig, N_ACTIONS};
use crate::replay::{ReplayMemory, StepInputs, Transition};
use crate::rng::{streams, RandomStream};

/// Lower clip bound for regression targets; rewards are never positive.
pub const TARGET_FLOOR: f64 = -1e9;

#[derive(Debug, Clone)]
pub struct DnnUnit {
    pub online: MlpParams,
    pub target: MlpParams,
    pub steps_since_freeze: u64,
    policy_rng: RandomStream,
}

impl DnnUnit {
    fn new(online: MlpParams, policy_rng: RandomStream) -> Self {
        Self { target: online.clone(), online, steps_since_freeze: 0, policy_rng }
    }
}

/// Epsilon-greedy choice over the online network; greedy ties go to the lowest index.
pub fn select_action(online: &MlpParams, s: &StateVector, epsilon: f64, rng: &mut RandomStream) -> Result<usize> {
    if epsilon > 0.0 && rng.unit() < epsilon {
        return Ok(rng.index(N_ACTIONS));
    }
    Ok(argmax(&online.forward(&s.values)?))
}

pub fn argmax(q: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in q.iter().enumerate().skip(1) {
        if v > q[best] {
            best = i;
        }
    }
    best
}

/// `-min F` when `chosen` attains the minimum, `-max F` otherwise.
pub fn compute_reward(f_values: &[f64; 3], chosen: usize) -> Result<f64> {
    if f_values.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("local objective"));
    }
    let min = f_values.iter().copied().fold(f64::INFINITY, f64::min);
    let max = f_values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok(if f_values[chosen] == min { -min } else { -max })
}

/// Bootstrap target from the frozen network, clipped to `[TARGET_FLOOR, 0]`.
pub fn q_target(reward: f64, next_state: &[f64], target_net: &MlpParams, discount: f64, terminal: bool) -> Result<f64> {
    let y = if terminal || discount == 0.0 {
        reward
    } else {
        let q = target_net.forward(next_state)?;
        reward + discount * q.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    };
    if !y.is_finite() {
        return Err(Error::NonFinite("q target"));
    }
    Ok(y.clamp(TARGET_FLOOR, 0.0))
}

/// Scaled reward of `inputs` under `env`.
pub fn step_reward(inputs: &StepInputs, action: usize, env: &EnvironmentSpec, reward_scale: f64) -> Result<f64> {
    let f = local_objective_all(inputs.prev, inputs.inbound.as_ref(), &inputs.task, env);
    compute_reward(&f.map(|v| v * reward_scale), action)
}

#[derive(Debug, Clone)]
pub struct Engine {
    cfg: TrainConfig,
    env: EnvironmentSpec,
    units: Vec<DnnUnit>,
    memory: ReplayMemory,
    replay_rng: RandomStream,
    interactions: u64,
    train_steps: u64,
    pushes_since_train: u64,
}

impl Engine {
    pub fn layer_sizes(cfg: &TrainConfig) -> Vec<usize> {
        vec![state_dim(cfg.max_tasks), cfg.hidden.0, cfg.hidden.1, N_ACTIONS]
    }

    /// Randomly initialized units, each from its own seed stream.
    pub fn new(cfg: TrainConfig, env: EnvironmentSpec, seed: u64) -> Result<Self> {
        cfg.validate()?;
        let sizes = Self::layer_sizes(&cfg);
        let nets = (0..cfg.units)
            .map(|j| MlpParams::init(&sizes, &mut RandomStream::new(seed, streams::UNIT_INIT_BASE + j as u64), cfg.init))
            .collect::<Result<Vec<_>>>()?;
        Self::with_networks(cfg, env, seed, nets)
    }

    /// Every unit starts from a copy of `psi`, optionally perturbed.
    pub fn from_meta(cfg: TrainConfig, env: EnvironmentSpec, seed: u64, psi: &MlpParams) -> Result<Self> {
        cfg.validate()?;
        let sizes = Self::layer_sizes(&cfg);
        if psi.layer_sizes != sizes {
            return Err(Error::Shape(psi.layer_sizes.clone(), sizes));
        }
        let mut noise = RandomStream::new(seed, streams::PERTURB);
        let nets = (0..cfg.units)
            .map(|_| {
                let mut p = psi.clone();
                p.perturb(&mut noise, cfg.meta_perturbation);
                p
            })
            .collect();
        Self::with_networks(cfg, env, seed, nets)
    }

    fn with_networks(cfg: TrainConfig, env: EnvironmentSpec, seed: u64, nets: Vec<MlpParams>) -> Result<Self> {
        env.validate()?;
        let units = nets
            .into_iter()
            .enumerate()
            .map(|(j, p)| DnnUnit::new(p, RandomStream::new(seed, streams::UNIT_POLICY_BASE + j as u64)))
            .collect();
        Ok(Self {
            memory: ReplayMemory::new(cfg.memory_capacity),
            replay_rng: RandomStream::new(seed, streams::REPLAY),
            cfg,
            env,
            units,
            interactions: 0,
            train_steps: 0,
            pushes_since_train: 0,
        })
    }

    pub fn config(&self) -> &TrainConfig {
        &self.cfg
    }

    pub fn env(&self) -> &EnvironmentSpec {
        &self.env
    }

    pub fn set_env(&mut self, env: EnvironmentSpec) -> Result<()> {
        env.validate()?;
        self.env = env;
        Ok(())
    }

    pub fn units(&self) -> &[DnnUnit] {
        &self.units
    }

    pub fn units_mut(&mut self) -> &mut [DnnUnit] {
        &mut self.units
    }

    pub fn memory(&self) -> &ReplayMemory {
        &self.memory
    }

    pub fn interactions(&self) -> u64 {
        self.interactions
    }

    pub fn train_steps(&self) -> u64 {
        self.train_steps
    }

    pub fn epsilon(&self) -> f64 {
        self.cfg.epsilon.at(self.interactions)
    }

    pub fn state(&self, w: &Workflow, i: usize, prev: OffloadDecision) -> Result<StateVector> {
        build_state(w, i, prev, self.cfg.max_tasks)
    }

    /// One pass over `batch` in the engine's own environment.
    pub fn train_on_workflows(&mut self, batch: &[Workflow]) -> Result<TrainingTrace> {
        let mut trace = TrainingTrace::default();
        for w in batch {
            trace.extend(self.train_workflow(w)?);
        }
        Ok(trace)
    }

    /// Cycles through `batch` until at least `steps` training steps have run in total.
    pub fn train_for_steps(&mut self, batch: &[Workflow], steps: u64) -> Result<TrainingTrace> {
        let mut trace = TrainingTrace::default();
        if batch.is_empty() {
            return Ok(trace);
        }
        for w in batch.iter().cycle() {
            if self.train_steps >= steps {
                break;
            }
            trace.extend(self.train_workflow(w)?);
        }
        Ok(trace)
    }

    pub fn train_workflow(&mut self, w: &Workflow) -> Result<TrainingTrace> {
        let env = self.env;
        self.interact(w, &env, &mut || env)
    }

    /// Runs one workflow through the behavior policy, pushing transitions whose
    /// rewards are priced under `interaction_env`. Each triggered replay step
    /// asks `replay_env` for the environment to re-price the sampled batch in.
    pub fn interact(
        &mut self,
        w: &Workflow,
        interaction_env: &EnvironmentSpec,
        replay_env: &mut dyn FnMut() -> EnvironmentSpec,
    ) -> Result<TrainingTrace> {
        w.validate()?;
        let mut trace = TrainingTrace::default();
        let n = w.len();
        let mut prev = OffloadDecision::Device;
        let mut state = self.state(w, 0, prev)?;
        for i in 0..n {
            let eps = self.epsilon();
            let behavior = &mut self.units[0];
            let action = select_action(&behavior.online, &state, eps, &mut behavior.policy_rng)?;
            let inputs = StepInputs { prev, inbound: w.inbound(i), task: w.tasks[i] };
            let reward = step_reward(&inputs, action, interaction_env, self.cfg.reward_scale)?;
            let decision = OffloadDecision::from_index(action).expect("action index in range");
            let terminal = i + 1 == n;
            let next_state = if terminal {
                StateVector { values: vec![0.0; state.values.len()] }
            } else {
                self.state(w, i + 1, decision)?
            };
            self.memory.push(Transition {
                state: std::mem::take(&mut state.values),
                action,
                reward,
                next_state: next_state.values.clone(),
                terminal,
                inputs,
            });
            self.interactions += 1;
            self.pushes_since_train += 1;
            if self.pushes_since_train >= self.cfg.train_trigger {
                self.pushes_since_train = 0;
                let env = replay_env();
                trace.extend(self.replay_step(&env)?);
            }
            state = next_state;
            prev = decision;
        }
        Ok(trace)
    }

    /// Samples a batch, re-prices its rewards under `env` and takes one
    /// gradient step on every unit.
    pub fn replay_step(&mut self, env: &EnvironmentSpec) -> Result<TrainingTrace> {
        let idx = self.memory.sample_indices(self.cfg.batch_size, &mut self.replay_rng)?;
        let batch: Vec<&Transition> = idx.iter().map(|&i| self.memory.get(i).expect("sampled index")).collect();
        let rewards = batch
            .iter()
            .map(|t| step_reward(&t.inputs, t.action, env, self.cfg.reward_scale))
            .collect::<Result<Vec<_>>>()?;
        self.train_steps += 1;
        let step = self.train_steps;
        let cfg = &self.cfg;
        let eps = cfg.epsilon.at(self.interactions);
        let results: Vec<Result<TraceRecord>> = self
            .units
            .par_iter_mut()
            .enumerate()
            .map(|(j, unit)| {
                let targets = batch
                    .iter()
                    .zip(&rewards)
                    .map(|(t, &r)| q_target(r, &t.next_state, &unit.target, cfg.discount, t.terminal))
                    .collect::<Result<Vec<_>>>()?;
                let samples: Vec<Sample> = batch
                    .iter()
                    .zip(&targets)
                    .map(|(t, &y)| Sample { state: &t.state, action: t.action, target: y })
                    .collect();
                let loss = unit.online.train_step(&samples, cfg.learning_rate)?;
                unit.steps_since_freeze += 1;
                let freeze = unit.steps_since_freeze >= cfg.freeze_interval;
                if freeze {
                    unit.online.copy_into(&mut unit.target)?;
                    unit.steps_since_freeze = 0;
                }
                Ok(TraceRecord { step, unit: j, loss, epsilon: eps, freeze })
            })
            .collect();
        Ok(TrainingTrace { records: results.into_iter().collect::<Result<Vec<_>>>()? })
    }

    /// Greedy plan of one unit.
    pub fn rollout(&self, unit: usize, w: &Workflow) -> Result<Plan> {
        let net = &self.units[unit].online;
        let mut prev = OffloadDecision::Device;
        let mut decisions = Vec::with_capacity(w.len());
        for i in 0..w.len() {
            let s = self.state(w, i, prev)?;
            let a = OffloadDecision::from_index(argmax(&net.forward(&s.values)?)).expect("action index in range");
            decisions.push(a);
            prev = a;
        }
        Ok(Plan::new(decisions))
    }

    /// Each unit's greedy plan with its cost in the engine environment.
    pub fn candidates(&self, w: &Workflow) -> Result<Vec<(Plan, CostBreakdown)>> {
        w.validate()?;
        (0..self.units.len())
            .into_par_iter()
            .map(|j| {
                let plan = self.rollout(j, w)?;
                let cost = workflow_cost(w, &plan, &self.env)?;
                Ok((plan, cost))
            })
            .collect()
    }

    /// Cheapest candidate plan; ties go to the lowest unit index.
    pub fn decide(&self, w: &Workflow) -> Result<(Plan, CostBreakdown)> {
        let mut best: Option<(Plan, CostBreakdown)> = None;
        for (plan, cost) in self.candidates(w)? {
            if best.as_ref().is_none_or(|(_, b)| cost.objective < b.objective) {
                best = Some((plan, cost));
            }
        }
        Ok(best.expect("engine has at least one unit"))
    }

    /// Mean decided objective over a batch.
    pub fn mean_decision_cost(&self, batch: &[Workflow]) -> Result<f64> {
        let mut total = 0.0;
        for w in batch {
            total += self.decide(w)?.1.objective;
        }
        Ok(total / batch.len().max(1) as f64)
    }

    pub fn checkpoint(&self) -> EngineCheckpoint {
        EngineCheckpoint {
            version: ENGINE_CHECKPOINT_VERSION,
            config: self.cfg.clone(),
            env: self.env,
            units: self
                .units
                .iter()
                .map(|u| UnitCheckpoint {
                    online: u.online.clone(),
                    target: u.target.clone(),
                    steps_since_freeze: u.steps_since_freeze,
                })
                .collect(),
            interactions: self.interactions,
            train_steps: self.train_steps,
        }
    }

    /// Restores parameters and counters. Random streams are re-derived from
    /// `seed`, and the replay memory starts empty.
    pub fn from_checkpoint(ck: EngineCheckpoint, seed: u64) -> Result<Self> {
        if ck.version != ENGINE_CHECKPOINT_VERSION {
            return Err(Error::CheckpointVersion(ck.version));
        }
        if ck.units.len() != ck.config.units {
            return Err(Error::InvalidConfig(format!(
                "checkpoint holds {} units but its config declares {}",
                ck.units.len(),
                ck.config.units
            )));
        }
        let sizes = Self::layer_sizes(&ck.config);
        for u in &ck.units {
            u.online.validate()?;
            u.target.validate()?;
            if u.online.layer_sizes != sizes || u.target.layer_sizes != sizes {
                return Err(Error::Shape(u.online.layer_sizes.clone(), sizes));
            }
        }
        let mut engine = Self::with_networks(ck.config, ck.env, seed, ck.units.iter().map(|u| u.online.clone()).collect())?;
        for (unit, saved) in engine.units.iter_mut().zip(ck.units) {
            unit.target = saved.target;
            unit.steps_since_freeze = saved.steps_since_freeze;
        }
        engine.interactions = ck.interactions;
        engine.train_steps = ck.train_steps;
        Ok(engine)
    }
}

pub const ENGINE_CHECKPOINT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UnitCheckpoint {
    pub online: MlpParams,
    pub target: MlpParams,
    pub steps_since_freeze: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EngineCheckpoint {
    pub version: u32,
    pub config: TrainConfig,
    pub env: EnvironmentSpec,
    pub units: Vec<UnitCheckpoint>,
    pub interactions: u64,
    pub train_steps: u64,
}

impl EngineCheckpoint {
    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, serde_json::to_string(self)?)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let ck: Self = serde_json::from_str(&std::fs::read_to_string(path)?)?;
        if ck.version != ENGINE_CHECKPOINT_VERSION {
            return Err(Error::CheckpointVersion(ck.version));
        }
        Ok(ck)
    }
}
