//! Task-offloading simulator and decision engine for a device/edge/cloud chain.
//!
//! - [`env_model`]: analytic delay, energy and objective.
//! - [`workflow_gen`]: seeded random workflows.
//! - [`neuralnet`]: small MLP with manual backpropagation.
//! - [`replay`]: experience pool.
//! - [`drl_engine`]: parallel deep Q-learning units and plan selection.
//! - [`meta`]: environment-mixing meta-initialization.
//! - [`baselines`]: fixed-tier plans, brute-force and DP optima.
//! - [`experiment`]: reproducible experiment runners.

pub mod baselines;
pub mod drl_engine;
pub mod env_model;
pub mod error;
pub mod experiment;
pub mod meta;
pub mod neuralnet;
pub mod presets;
pub mod replay;
pub mod rng;
pub mod workflow_gen;

pub use error::{Error, Result};
