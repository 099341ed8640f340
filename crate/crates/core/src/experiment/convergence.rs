use rayon::prelude::*;

use super::config::ExperimentConfig;
use super::metrics::{freeze_alignment, initial_loss, mean, rolling_std, steps_to_threshold};
use super::output::{csv_bytes, opt_field, Artifact};
use crate::drl_engine::Engine;
use crate::error::Result;
use crate::neuralnet::TrainConfig;
use crate::rng::{streams, RandomStream};
use crate::workflow_gen::generate_batch;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepAxis {
    LearningRate,
    BatchSize,
}

impl SweepAxis {
    pub fn name(self) -> &'static str {
        match self {
            SweepAxis::LearningRate => "learning_rate",
            SweepAxis::BatchSize => "batch_size",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceRun {
    pub axis: SweepAxis,
    pub value: f64,
    pub seed: u64,
    /// Unit-0 loss per training step.
    pub losses: Vec<f64>,
    pub freeze_steps: Vec<u64>,
    pub initial_loss: f64,
    pub threshold: f64,
    pub steps_to_threshold: Option<u64>,
    pub rolling_std: f64,
    pub freeze_aligned: usize,
    pub freeze_windows: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceResult {
    pub runs: Vec<ConvergenceRun>,
}

impl ConvergenceResult {
    pub fn runs_at(&self, axis: SweepAxis, value: f64) -> impl Iterator<Item = &ConvergenceRun> {
        self.runs.iter().filter(move |r| r.axis == axis && r.value == value)
    }

    /// Seed-averaged rolling standard deviation of one setting.
    pub fn mean_rolling_std(&self, axis: SweepAxis, value: f64) -> f64 {
        mean(&self.runs_at(axis, value).map(|r| r.rolling_std).collect::<Vec<_>>())
    }

    /// Pooled `(aligned, windows)` over the runs of one batch size.
    pub fn freeze_alignment(&self, batch_size: usize) -> (usize, usize) {
        self.runs_at(SweepAxis::BatchSize, batch_size as f64)
            .fold((0, 0), |(a, w), r| (a + r.freeze_aligned, w + r.freeze_windows))
    }

    pub fn artifacts(&self) -> Result<Vec<Artifact>> {
        let loss = csv_bytes(
            &["axis", "value", "seed", "step", "loss", "freeze_flag"],
            self.runs.iter().flat_map(|r| {
                r.losses.iter().enumerate().map(move |(k, l)| {
                    let step = k as u64 + 1;
                    vec![
                        r.axis.name().to_string(),
                        r.value.to_string(),
                        r.seed.to_string(),
                        step.to_string(),
                        l.to_string(),
                        u8::from(r.freeze_steps.contains(&step)).to_string(),
                    ]
                })
            }),
        )?;
        let summary = csv_bytes(
            &[
                "axis",
                "value",
                "seed",
                "initial_loss",
                "threshold",
                "steps_to_threshold",
                "rolling_std",
                "freeze_aligned",
                "freeze_windows",
            ],
            self.runs.iter().map(|r| {
                vec![
                    r.axis.name().to_string(),
                    r.value.to_string(),
                    r.seed.to_string(),
                    r.initial_loss.to_string(),
                    r.threshold.to_string(),
                    opt_field(r.steps_to_threshold),
                    r.rolling_std.to_string(),
                    r.freeze_aligned.to_string(),
                    r.freeze_windows.to_string(),
                ]
            }),
        )?;
        Ok(vec![Artifact::new("convergence_loss.csv", loss), Artifact::new("convergence_summary.csv", summary)])
    }
}

/// Learning-rate sweep at the configured batch size and batch-size sweep at
/// the configured learning rate; the freeze batch size is added to the batch
/// sweep when missing.
pub fn run_convergence_sweep(cfg: &ExperimentConfig) -> Result<ConvergenceResult> {
    cfg.validate()?;
    let c = &cfg.convergence;
    let mut settings: Vec<(SweepAxis, f64, TrainConfig)> = Vec::new();
    let base = TrainConfig { units: c.units, ..cfg.training.clone() };
    for &lr in &c.learning_rates {
        settings.push((SweepAxis::LearningRate, lr, TrainConfig { learning_rate: lr, ..base.clone() }));
    }
    let mut batches = c.batch_sizes.clone();
    if !batches.contains(&c.freeze_batch_size) {
        batches.push(c.freeze_batch_size);
    }
    for &b in &batches {
        settings.push((SweepAxis::BatchSize, b as f64, TrainConfig { batch_size: b, ..base.clone() }));
    }
    let seeds = cfg.cell_seeds();
    let cells: Vec<_> = settings.iter().flat_map(|s| seeds.iter().map(move |&seed| (s, seed))).collect();
    let runs = cells
        .into_par_iter()
        .map(|((axis, value, tc), seed)| {
            let workflows = generate_batch(&mut RandomStream::new(seed, streams::WORKFLOWS), &cfg.generator);
            let mut engine = Engine::new(tc.clone(), cfg.environment, seed)?;
            let trace = engine.train_for_steps(&workflows, c.train_steps)?;
            let losses = trace.unit_losses(0);
            let freeze_steps = trace.freeze_steps(0);
            let l0 = initial_loss(&losses, c.smoothing_window);
            let threshold = c.threshold_fraction * l0;
            let (freeze_aligned, freeze_windows) =
                freeze_alignment(&losses, &freeze_steps, tc.freeze_interval, c.freeze_tolerance);
            Ok(ConvergenceRun {
                axis: *axis,
                value: *value,
                seed,
                steps_to_threshold: steps_to_threshold(&losses, threshold, c.smoothing_window),
                rolling_std: rolling_std(&losses, c.std_window),
                initial_loss: l0,
                threshold,
                freeze_aligned,
                freeze_windows,
                losses,
                freeze_steps,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ConvergenceResult { runs })
}
