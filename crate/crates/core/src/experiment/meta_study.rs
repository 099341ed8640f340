use rayon::prelude::*;

use super::config::ExperimentConfig;
use super::metrics::{initial_loss, mean, median, steps_to_threshold};
use super::output::{csv_bytes, opt_field, Artifact};
use crate::drl_engine::Engine;
use crate::error::Result;
use crate::meta::{train_meta, MetaConfig, MetaParams};
use crate::rng::{streams, RandomStream};
use crate::workflow_gen::generate_batch;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Init {
    Meta,
    Random,
}

impl Init {
    pub fn name(self) -> &'static str {
        match self {
            Init::Meta => "meta",
            Init::Random => "random",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetaRun {
    pub init: Init,
    pub seed: u64,
    /// Unit-0 loss per round.
    pub losses: Vec<f64>,
    /// Mean decision cost after each round; index 0 is before training.
    pub costs: Vec<f64>,
    pub initial_loss: f64,
    pub steps_to_threshold: Option<u64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetaStudyResult {
    pub psi: MetaParams,
    /// Shared threshold: a fraction of the median random-init initial loss.
    pub threshold: f64,
    pub rounds: u64,
    pub runs: Vec<MetaRun>,
}

impl MetaStudyResult {
    pub fn runs_of(&self, init: Init) -> impl Iterator<Item = &MetaRun> {
        self.runs.iter().filter(move |r| r.init == init)
    }

    /// Median steps to threshold; a run that never reaches it counts as `rounds + 1`.
    pub fn median_steps(&self, init: Init) -> f64 {
        let steps: Vec<f64> =
            self.runs_of(init).map(|r| r.steps_to_threshold.unwrap_or(self.rounds + 1) as f64).collect();
        median(&steps)
    }

    pub fn mean_cost(&self, init: Init, round: u64) -> f64 {
        mean(&self.runs_of(init).map(|r| r.costs[round as usize]).collect::<Vec<_>>())
    }

    pub fn mean_initial_loss(&self, init: Init) -> f64 {
        mean(&self.runs_of(init).map(|r| r.initial_loss).collect::<Vec<_>>())
    }

    pub fn artifacts(&self) -> Result<Vec<Artifact>> {
        let loss = csv_bytes(
            &["init", "seed", "step", "loss"],
            self.runs.iter().flat_map(|r| {
                r.losses.iter().enumerate().map(move |(k, l)| {
                    vec![r.init.name().to_string(), r.seed.to_string(), (k + 1).to_string(), l.to_string()]
                })
            }),
        )?;
        let cost = csv_bytes(
            &["init", "seed", "round", "cost"],
            self.runs.iter().flat_map(|r| {
                r.costs
                    .iter()
                    .enumerate()
                    .map(move |(k, c)| vec![r.init.name().to_string(), r.seed.to_string(), k.to_string(), c.to_string()])
            }),
        )?;
        let summary = csv_bytes(
            &["init", "seed", "initial_loss", "threshold", "steps_to_threshold"],
            self.runs.iter().map(|r| {
                vec![
                    r.init.name().to_string(),
                    r.seed.to_string(),
                    r.initial_loss.to_string(),
                    self.threshold.to_string(),
                    opt_field(r.steps_to_threshold),
                ]
            }),
        )?;
        Ok(vec![
            Artifact::new("meta_loss.csv", loss),
            Artifact::new("meta_cost.csv", cost),
            Artifact::new("meta_summary.csv", summary),
            Artifact::new("meta_params.json", self.psi.psi.to_json()?.into_bytes()),
        ])
    }
}

/// Trains the meta-initialization over the train ranges unless `psi` is given.
pub fn meta_params_for(cfg: &ExperimentConfig, psi: Option<MetaParams>) -> Result<MetaParams> {
    match psi {
        Some(p) => Ok(p),
        None => train_meta(
            &cfg.training,
            &cfg.meta.train_ranges,
            &cfg.generator,
            &MetaConfig { interaction_steps: cfg.meta.interaction_steps },
            cfg.meta_seed(),
        ),
    }
}

/// Paired meta-init and random-init engines in the test environment. A round
/// is one training step; the decision cost is recorded after every round.
pub fn run_meta_study(cfg: &ExperimentConfig, psi: Option<MetaParams>) -> Result<MetaStudyResult> {
    cfg.validate()?;
    let psi = meta_params_for(cfg, psi)?;
    let m = &cfg.meta;
    let cells: Vec<(Init, u64)> =
        cfg.cell_seeds().into_iter().flat_map(|s| [(Init::Meta, s), (Init::Random, s)]).collect();
    let curves = cells
        .into_par_iter()
        .map(|(init, seed)| {
            let workflows = generate_batch(&mut RandomStream::new(seed, streams::WORKFLOWS), &cfg.generator);
            let mut engine = match init {
                Init::Meta => Engine::from_meta(cfg.training.clone(), m.test_environment, seed, &psi.psi)?,
                Init::Random => Engine::new(cfg.training.clone(), m.test_environment, seed)?,
            };
            let mut losses = Vec::with_capacity(m.rounds as usize);
            let mut costs = vec![engine.mean_decision_cost(&workflows)?];
            for w in workflows.iter().cycle() {
                if engine.train_steps() >= m.rounds {
                    break;
                }
                losses.extend(engine.train_workflow(w)?.unit_losses(0));
                let cost = engine.mean_decision_cost(&workflows)?;
                let reached = (engine.train_steps() as usize).min(m.rounds as usize);
                costs.resize(reached + 1, cost);
            }
            losses.truncate(m.rounds as usize);
            Ok((init, seed, losses, costs))
        })
        .collect::<Result<Vec<_>>>()?;
    let window = cfg.convergence.smoothing_window;
    let random_l0: Vec<f64> = curves
        .iter()
        .filter(|c| c.0 == Init::Random)
        .map(|c| initial_loss(&c.2, window))
        .collect();
    let threshold = cfg.convergence.threshold_fraction * median(&random_l0);
    let runs = curves
        .into_iter()
        .map(|(init, seed, losses, costs)| MetaRun {
            init,
            seed,
            initial_loss: initial_loss(&losses, window),
            steps_to_threshold: steps_to_threshold(&losses, threshold, window),
            losses,
            costs,
        })
        .collect();
    Ok(MetaStudyResult { psi, threshold, rounds: m.rounds, runs })
}
