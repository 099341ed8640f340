use rayon::prelude::*;

use super::config::ExperimentConfig;
use super::metrics::{mean, median};
use super::output::{csv_bytes, Artifact};
use crate::baselines::{dp_optimal, fixed_plan};
use crate::drl_engine::Engine;
use crate::env_model::{workflow_cost, OffloadDecision, Workflow};
use crate::error::Result;
use crate::neuralnet::TrainConfig;
use crate::rng::{streams, RandomStream};
use crate::workflow_gen::generate_batch;

pub const SCHEMES: [&str; 6] = ["local", "edge", "cloud", "dqn", "parallel_dqn", "oracle"];

#[derive(Debug, Clone, PartialEq)]
pub struct SchemeRow {
    pub scheme: &'static str,
    pub delta: f64,
    pub seed: u64,
    /// Mean objective over the workflow batch.
    pub objective: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonResult {
    pub rows: Vec<SchemeRow>,
}

impl ComparisonResult {
    pub fn objectives(&self, scheme: &str, delta: f64) -> Vec<f64> {
        self.rows.iter().filter(|r| r.scheme == scheme && r.delta == delta).map(|r| r.objective).collect()
    }

    /// Seed-averaged objective.
    pub fn mean(&self, scheme: &str, delta: f64) -> f64 {
        mean(&self.objectives(scheme, delta))
    }

    /// Seed-averaged objective of the cheapest fixed tier, chosen per seed.
    pub fn mean_best_fixed(&self, delta: f64) -> f64 {
        let per_seed: Vec<f64> = self
            .rows
            .iter()
            .filter(|r| r.scheme == "local" && r.delta == delta)
            .map(|r| {
                ["local", "edge", "cloud"]
                    .iter()
                    .filter_map(|s| {
                        self.rows.iter().find(|x| x.scheme == *s && x.delta == delta && x.seed == r.seed)
                    })
                    .map(|x| x.objective)
                    .fold(f64::INFINITY, f64::min)
            })
            .collect();
        mean(&per_seed)
    }

    /// Relative excess of `scheme` over the oracle, seed-averaged.
    pub fn oracle_gap(&self, scheme: &str, delta: f64) -> f64 {
        let oracle = self.mean("oracle", delta);
        (self.mean(scheme, delta) - oracle) / oracle
    }

    pub fn deltas(&self) -> Vec<f64> {
        let mut d: Vec<f64> = Vec::new();
        for r in &self.rows {
            if !d.contains(&r.delta) {
                d.push(r.delta);
            }
        }
        d
    }

    pub fn artifacts(&self) -> Result<Vec<Artifact>> {
        let rows = csv_bytes(
            &["scheme", "delta", "seed", "objective"],
            self.rows.iter().map(|r| vec![r.scheme.to_string(), r.delta.to_string(), r.seed.to_string(), r.objective.to_string()]),
        )?;
        let mut summary = Vec::new();
        for delta in self.deltas() {
            for scheme in SCHEMES {
                let xs = self.objectives(scheme, delta);
                summary.push(vec![scheme.to_string(), delta.to_string(), mean(&xs).to_string(), median(&xs).to_string()]);
            }
        }
        let summary = csv_bytes(&["scheme", "delta", "mean", "median"], summary)?;
        Ok(vec![Artifact::new("scheme_comparison.csv", rows), Artifact::new("scheme_summary.csv", summary)])
    }
}

fn fixed_mean(workflows: &[Workflow], tier: OffloadDecision, env: &crate::env_model::EnvironmentSpec) -> Result<f64> {
    let mut total = 0.0;
    for w in workflows {
        total += workflow_cost(w, &fixed_plan(w, tier), env)?.objective;
    }
    Ok(total / workflows.len() as f64)
}

/// Every scheme at every energy weight and seed. Learned schemes are trained
/// for `train_steps` in the environment of their cell and judged on the batch
/// they trained on.
pub fn run_scheme_comparison(cfg: &ExperimentConfig) -> Result<ComparisonResult> {
    cfg.validate()?;
    let k = &cfg.comparison;
    let cells: Vec<(f64, u64)> =
        k.deltas.iter().flat_map(|&d| cfg.cell_seeds().into_iter().map(move |s| (d, s))).collect();
    let rows = cells
        .into_par_iter()
        .map(|(delta, seed)| {
            let env = cfg.environment.with_delta(delta);
            let workflows = generate_batch(&mut RandomStream::new(seed, streams::WORKFLOWS), &cfg.generator);
            let learned = |units: usize| -> Result<f64> {
                let tc = TrainConfig { units, ..cfg.training.clone() };
                let mut engine = Engine::new(tc, env, seed)?;
                engine.train_for_steps(&workflows, cfg.train_steps)?;
                engine.mean_decision_cost(&workflows)
            };
            let mut oracle = 0.0;
            for w in &workflows {
                oracle += dp_optimal(w, &env)?.1;
            }
            let values = [
                fixed_mean(&workflows, OffloadDecision::Device, &env)?,
                fixed_mean(&workflows, OffloadDecision::Edge, &env)?,
                fixed_mean(&workflows, OffloadDecision::Cloud, &env)?,
                learned(k.dqn_units)?,
                learned(k.parallel_units)?,
                oracle / workflows.len() as f64,
            ];
            Ok(SCHEMES
                .iter()
                .zip(values)
                .map(|(&scheme, objective)| SchemeRow { scheme, delta, seed, objective })
                .collect::<Vec<_>>())
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ComparisonResult { rows: rows.into_iter().flatten().collect() })
}
