//! Experiment runners. Each reads an [`ExperimentConfig`], runs its
//! (setting, seed) cells in parallel and returns results that render to CSV.

pub mod comparison;
pub mod config;
pub mod convergence;
pub mod meta_study;
pub mod metrics;
pub mod output;

pub use comparison::{run_scheme_comparison, ComparisonResult};
pub use config::ExperimentConfig;
pub use convergence::{run_convergence_sweep, ConvergenceResult, SweepAxis};
pub use meta_study::{run_meta_study, Init, MetaStudyResult};
pub use output::{write_bundle, Artifact, Manifest};
