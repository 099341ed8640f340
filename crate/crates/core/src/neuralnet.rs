//! Small fully-connected Q-network with hand-derived backpropagation.
//!
//! Hidden layers use ReLU, the output layer is linear. Weights of layer `l`
//! are stored row-major as `out x in`.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::RandomStream;

pub const N_ACTIONS: usize = 3;
pub const CHECKPOINT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MlpParams {
    pub layer_sizes: Vec<usize>,
    pub weights: Vec<Vec<f64>>,
    pub biases: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitScheme {
    /// `U(-1/sqrt(fan_in), 1/sqrt(fan_in))` for weights and biases.
    #[default]
    ScaledUniform,
    Zeros,
}

/// Epsilon-greedy schedule: linear from `initial` to `final` over `decay_steps` interactions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpsilonSchedule {
    pub initial: f64,
    #[serde(rename = "final")]
    pub final_: f64,
    pub decay_steps: u64,
}

impl EpsilonSchedule {
    pub fn constant(eps: f64) -> Self {
        Self { initial: eps, final_: eps, decay_steps: 0 }
    }

    pub fn at(&self, step: u64) -> f64 {
        if self.decay_steps == 0 || step >= self.decay_steps {
            return self.final_;
        }
        let frac = step as f64 / self.decay_steps as f64;
        self.initial + (self.final_ - self.initial) * frac
    }
}

impl Default for EpsilonSchedule {
    fn default() -> Self {
        Self { initial: 1.0, final_: 0.05, decay_steps: 5_000 }
    }
}

/// Learning and engine hyper-parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub learning_rate: f64,
    /// Discount on the bootstrapped next-state value.
    pub discount: f64,
    pub batch_size: usize,
    /// Training steps between online-to-target copies.
    pub freeze_interval: u64,
    pub epsilon: EpsilonSchedule,
    pub hidden: (usize, usize),
    /// Number of parallel units.
    pub units: usize,
    pub memory_capacity: usize,
    /// Memory insertions between training steps.
    pub train_trigger: u64,
    /// Longest workflow the state encoding can hold.
    pub max_tasks: usize,
    /// Multiplier applied to local-objective values when forming rewards.
    pub reward_scale: f64,
    /// Half-width of uniform noise added to each unit's copy of the meta-parameters; 0 keeps identical copies.
    pub meta_perturbation: f64,
    pub init: InitScheme,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            learning_rate: 0.01,
            discount: 0.95,
            batch_size: 128,
            freeze_interval: 200,
            epsilon: EpsilonSchedule::default(),
            hidden: (64, 32),
            units: 4,
            memory_capacity: 4096,
            train_trigger: 5,
            max_tasks: 5,
            reward_scale: 1e-3,
            meta_perturbation: 0.0,
            init: InitScheme::ScaledUniform,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidConfig(m));
        if !(self.learning_rate > 0.0 && self.learning_rate <= 1.0) {
            return bad(format!("learning_rate must be in (0, 1], got {}", self.learning_rate));
        }
        if !(0.0..=1.0).contains(&self.discount) {
            return bad(format!("discount must be in [0, 1], got {}", self.discount));
        }
        let e = &self.epsilon;
        if !(0.0..=1.0).contains(&e.initial) || !(0.0..=1.0).contains(&e.final_) {
            return bad("epsilon values must be in [0, 1]".into());
        }
        for (name, v) in [
            ("batch_size", self.batch_size),
            ("hidden.0", self.hidden.0),
            ("hidden.1", self.hidden.1),
            ("units", self.units),
            ("memory_capacity", self.memory_capacity),
            ("max_tasks", self.max_tasks),
        ] {
            if v == 0 {
                return bad(format!("{name} must be positive"));
            }
        }
        if self.freeze_interval == 0 || self.train_trigger == 0 {
            return bad("freeze_interval and train_trigger must be positive".into());
        }
        if !(self.reward_scale > 0.0 && self.reward_scale.is_finite()) {
            return bad("reward_scale must be positive".into());
        }
        if !(self.meta_perturbation >= 0.0) {
            return bad("meta_perturbation must be non-negative".into());
        }
        Ok(())
    }
}

/// One regression example: push `Q(state)[action]` toward `target`.
#[derive(Debug, Clone, Copy)]
pub struct Sample<'a> {
    pub state: &'a [f64],
    pub action: usize,
    pub target: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub weights: Vec<Vec<f64>>,
    pub biases: Vec<Vec<f64>>,
}

impl Gradients {
    fn values(&self) -> impl Iterator<Item = f64> + '_ {
        self.weights.iter().chain(&self.biases).flatten().copied()
    }

    /// Largest per-parameter `|a - b| / max(|a|, |b|, floor)`.
    pub fn max_relative_error(&self, other: &Gradients, floor: f64) -> f64 {
        self.values()
            .zip(other.values())
            .map(|(a, b)| (a - b).abs() / a.abs().max(b.abs()).max(floor))
            .fold(0.0, f64::max)
    }
}

#[derive(Serialize, Deserialize)]
struct Checkpoint {
    version: u32,
    #[serde(flatten)]
    params: MlpParams,
}

impl MlpParams {
    pub fn init(layer_sizes: &[usize], rng: &mut RandomStream, scheme: InitScheme) -> Result<Self> {
        if layer_sizes.len() < 2 || layer_sizes.contains(&0) {
            return Err(Error::InvalidConfig(format!("invalid layer sizes {layer_sizes:?}")));
        }
        let mut weights = Vec::with_capacity(layer_sizes.len() - 1);
        let mut biases = Vec::with_capacity(layer_sizes.len() - 1);
        for pair in layer_sizes.windows(2) {
            let (fan_in, fan_out) = (pair[0], pair[1]);
            let bound = 1.0 / (fan_in as f64).sqrt();
            let mut draw = |n: usize| -> Vec<f64> {
                match scheme {
                    InitScheme::ScaledUniform => (0..n).map(|_| rng.uniform(-bound, bound)).collect(),
                    InitScheme::Zeros => vec![0.0; n],
                }
            };
            weights.push(draw(fan_in * fan_out));
            biases.push(draw(fan_out));
        }
        Ok(Self { layer_sizes: layer_sizes.to_vec(), weights, biases })
    }

    pub fn zeros(layer_sizes: &[usize]) -> Result<Self> {
        Self::init(layer_sizes, &mut RandomStream::new(0, 0), InitScheme::Zeros)
    }

    pub fn input_dim(&self) -> usize {
        self.layer_sizes[0]
    }

    pub fn output_dim(&self) -> usize {
        *self.layer_sizes.last().unwrap()
    }

    pub fn n_layers(&self) -> usize {
        self.weights.len()
    }

    pub fn param_count(&self) -> usize {
        self.weights.iter().chain(&self.biases).map(Vec::len).sum()
    }

    pub fn is_finite(&self) -> bool {
        self.weights.iter().chain(&self.biases).flatten().all(|v| v.is_finite())
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.layer_sizes.len();
        if n < 2 || self.weights.len() != n - 1 || self.biases.len() != n - 1 {
            return Err(Error::InvalidConfig("layer count does not match parameter lists".into()));
        }
        for l in 0..n - 1 {
            let (i, o) = (self.layer_sizes[l], self.layer_sizes[l + 1]);
            if self.weights[l].len() != i * o || self.biases[l].len() != o {
                return Err(Error::InvalidConfig(format!("layer {l} parameters do not match {i}x{o}")));
            }
        }
        if !self.is_finite() {
            return Err(Error::NonFinite("network parameter"));
        }
        Ok(())
    }

    pub fn forward(&self, state: &[f64]) -> Result<Vec<f64>> {
        if state.len() != self.input_dim() {
            return Err(Error::Dimension { expected: self.input_dim(), got: state.len() });
        }
        let mut x = state.to_vec();
        let last = self.n_layers() - 1;
        for l in 0..=last {
            x = self.layer(l, &x, l < last);
        }
        Ok(x)
    }

    fn layer(&self, l: usize, input: &[f64], relu: bool) -> Vec<f64> {
        let n_in = self.layer_sizes[l];
        let w = &self.weights[l];
        self.biases[l]
            .iter()
            .enumerate()
            .map(|(o, &b)| {
                let row = &w[o * n_in..(o + 1) * n_in];
                let z = b + row.iter().zip(input).map(|(a, x)| a * x).sum::<f64>();
                if relu { z.max(0.0) } else { z }
            })
            .collect()
    }

    /// Mean squared error over the batch on the selected actions only.
    pub fn loss(&self, batch: &[Sample<'_>]) -> Result<f64> {
        check_batch(self, batch)?;
        let mut total = 0.0;
        for s in batch {
            let q = self.forward(s.state)?;
            total += (q[s.action] - s.target).powi(2);
        }
        Ok(total / batch.len() as f64)
    }

    /// Loss and its gradient with respect to every parameter.
    pub fn gradients(&self, batch: &[Sample<'_>]) -> Result<(f64, Gradients)> {
        check_batch(self, batch)?;
        let n_layers = self.n_layers();
        let mut grads = Gradients {
            weights: self.weights.iter().map(|w| vec![0.0; w.len()]).collect(),
            biases: self.biases.iter().map(|b| vec![0.0; b.len()]).collect(),
        };
        let scale = 2.0 / batch.len() as f64;
        let mut total = 0.0;
        let mut acts: Vec<Vec<f64>> = Vec::with_capacity(n_layers + 1);
        for s in batch {
            acts.clear();
            acts.push(s.state.to_vec());
            for l in 0..n_layers {
                let next = self.layer(l, &acts[l], l + 1 < n_layers);
                acts.push(next);
            }
            let err = acts[n_layers][s.action] - s.target;
            total += err * err;

            let mut delta = vec![0.0; self.output_dim()];
            delta[s.action] = scale * err;
            for l in (0..n_layers).rev() {
                let n_in = self.layer_sizes[l];
                let input = &acts[l];
                let gw = &mut grads.weights[l];
                for (o, &d) in delta.iter().enumerate() {
                    if d == 0.0 {
                        continue;
                    }
                    grads.biases[l][o] += d;
                    let row = &mut gw[o * n_in..(o + 1) * n_in];
                    for (g, x) in row.iter_mut().zip(input) {
                        *g += d * x;
                    }
                }
                if l == 0 {
                    break;
                }
                let w = &self.weights[l];
                let mut prev = vec![0.0; n_in];
                for (o, &d) in delta.iter().enumerate() {
                    if d == 0.0 {
                        continue;
                    }
                    for (p, a) in prev.iter_mut().zip(&w[o * n_in..(o + 1) * n_in]) {
                        *p += a * d;
                    }
                }
                // input of layer l is a ReLU output
                for (p, x) in prev.iter_mut().zip(input) {
                    if *x <= 0.0 {
                        *p = 0.0;
                    }
                }
                delta = prev;
            }
        }
        Ok((total / batch.len() as f64, grads))
    }

    fn param_mut(&mut self, layer: usize, k: usize, bias: bool) -> &mut f64 {
        if bias {
            &mut self.biases[layer][k]
        } else {
            &mut self.weights[layer][k]
        }
    }

    /// Central finite-difference estimate of the loss gradient with step `h`.
    pub fn numerical_gradients(&self, batch: &[Sample<'_>], h: f64) -> Result<Gradients> {
        let mut probe = self.clone();
        let mut diff = |layer: usize, k: usize, bias: bool| -> Result<f64> {
            let orig = *probe.param_mut(layer, k, bias);
            *probe.param_mut(layer, k, bias) = orig + h;
            let up = probe.loss(batch)?;
            *probe.param_mut(layer, k, bias) = orig - h;
            let down = probe.loss(batch)?;
            *probe.param_mut(layer, k, bias) = orig;
            Ok((up - down) / (2.0 * h))
        };
        let mut grads = Gradients { weights: Vec::new(), biases: Vec::new() };
        for l in 0..self.n_layers() {
            grads.weights.push((0..self.weights[l].len()).map(|k| diff(l, k, false)).collect::<Result<_>>()?);
            grads.biases.push((0..self.biases[l].len()).map(|k| diff(l, k, true)).collect::<Result<_>>()?);
        }
        Ok(grads)
    }

    pub fn apply_gradients(&mut self, grads: &Gradients, learning_rate: f64) {
        for (w, g) in self.weights.iter_mut().zip(&grads.weights) {
            for (a, b) in w.iter_mut().zip(g) {
                *a -= learning_rate * b;
            }
        }
        for (w, g) in self.biases.iter_mut().zip(&grads.biases) {
            for (a, b) in w.iter_mut().zip(g) {
                *a -= learning_rate * b;
            }
        }
    }

    /// One SGD step on the batch. Returns the loss before the step.
    pub fn train_step(&mut self, batch: &[Sample<'_>], learning_rate: f64) -> Result<f64> {
        let (loss, grads) = self.gradients(batch)?;
        self.apply_gradients(&grads, learning_rate);
        Ok(loss)
    }

    /// Overwrites `dst` with a snapshot of `self`.
    pub fn copy_into(&self, dst: &mut MlpParams) -> Result<()> {
        if self.layer_sizes != dst.layer_sizes {
            return Err(Error::Shape(self.layer_sizes.clone(), dst.layer_sizes.clone()));
        }
        dst.weights.clone_from(&self.weights);
        dst.biases.clone_from(&self.biases);
        Ok(())
    }

    /// Adds `U(-scale, scale)` noise to every parameter.
    pub fn perturb(&mut self, rng: &mut RandomStream, scale: f64) {
        if scale == 0.0 {
            return;
        }
        for v in self.weights.iter_mut().chain(self.biases.iter_mut()).flatten() {
            *v += rng.uniform(-scale, scale);
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(&Checkpoint { version: CHECKPOINT_VERSION, params: self.clone() })?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let ck: Checkpoint = serde_json::from_str(s)?;
        if ck.version != CHECKPOINT_VERSION {
            return Err(Error::CheckpointVersion(ck.version));
        }
        ck.params.validate()?;
        Ok(ck.params)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()?)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}

/// Free-function form of [`MlpParams::copy_into`].
pub fn copy_into_target(src: &MlpParams, dst: &mut MlpParams) -> Result<()> {
    src.copy_into(dst)
}

fn check_batch(p: &MlpParams, batch: &[Sample<'_>]) -> Result<()> {
    if batch.is_empty() {
        return Err(Error::InvalidConfig("empty training batch".into()));
    }
    for s in batch {
        if !s.target.is_finite() {
            return Err(Error::NonFinite("training target"));
        }
        if s.state.len() != p.input_dim() {
            return Err(Error::Dimension { expected: p.input_dim(), got: s.state.len() });
        }
        if s.action >= p.output_dim() {
            return Err(Error::Dimension { expected: p.output_dim(), got: s.action });
        }
    }
    Ok(())
}
