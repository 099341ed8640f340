use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use offload_core::baselines::{brute_force_optimal, write_oracle_csv, DEFAULT_ENUMERATION_CAP};
use offload_core::drl_engine::{Engine, EngineCheckpoint};
use offload_core::experiment::meta_study::meta_params_for;
use offload_core::experiment::output::csv_bytes;
use offload_core::experiment::{
    run_convergence_sweep, run_meta_study, run_scheme_comparison, write_bundle, Artifact, ExperimentConfig,
};
use offload_core::meta::MetaParams;
use offload_core::rng::{streams, RandomStream};
use offload_core::workflow_gen::generate_batch;
use offload_core::{Error, Result};

#[derive(Parser)]
#[command(name = "offload", version, about = "Task-offloading simulator and experiment driver")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// Experiment config (JSON); built-in defaults when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Overrides the config's master seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides the config's output directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Train an engine on a generated batch and save its checkpoint.
    Train {
        #[command(flatten)]
        common: Common,
        /// Initialize every unit from meta-parameters.
        #[arg(long)]
        meta_params: Option<PathBuf>,
    },
    /// Decide plans for a generated batch with a trained engine.
    Decide {
        #[command(flatten)]
        common: Common,
        /// Engine checkpoint written by `train`.
        #[arg(long)]
        engine: PathBuf,
    },
    /// Train meta-parameters over the configured environment ranges.
    MetaTrain {
        #[command(flatten)]
        common: Common,
    },
    SweepConvergence {
        #[command(flatten)]
        common: Common,
    },
    CompareSchemes {
        #[command(flatten)]
        common: Common,
    },
    MetaStudy {
        #[command(flatten)]
        common: Common,
        /// Reuse meta-parameters instead of training them.
        #[arg(long)]
        meta_params: Option<PathBuf>,
    },
    /// Exact optimal plans for a generated batch.
    Oracle {
        #[command(flatten)]
        common: Common,
    },
}

fn load_config(common: &Common) -> Result<ExperimentConfig> {
    let mut cfg = match &common.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::default(),
    };
    if let Some(seed) = common.seed {
        cfg.master_seed = seed;
    }
    if let Some(out) = &common.out {
        cfg.output_dir = out.clone();
    }
    cfg.validate()?;
    Ok(cfg)
}

/// The batch commands that act on a single workflow set use the first cell seed.
fn batch_seed(cfg: &ExperimentConfig) -> u64 {
    cfg.cell_seed(0)
}

fn load_meta(path: Option<&Path>) -> Result<Option<MetaParams>> {
    path.map(MetaParams::load).transpose()
}

fn checkpoint_artifact(name: &str, ck: &EngineCheckpoint) -> Result<Artifact> {
    let json = serde_json::to_string(ck)?;
    Ok(Artifact::new(name, json.into_bytes()))
}

fn run(cli: Cli) -> Result<PathBuf> {
    match cli.command {
        Command::Train { common, meta_params } => {
            let cfg = load_config(&common)?;
            let seed = batch_seed(&cfg);
            let workflows = generate_batch(&mut RandomStream::new(seed, streams::WORKFLOWS), &cfg.generator);
            let mut engine = match load_meta(meta_params.as_deref())? {
                Some(m) => Engine::from_meta(cfg.training.clone(), cfg.environment, seed, &m.psi)?,
                None => Engine::new(cfg.training.clone(), cfg.environment, seed)?,
            };
            let trace = engine.train_for_steps(&workflows, cfg.train_steps)?;
            let mut csv = Vec::new();
            trace.write_csv(&mut csv)?;
            let artifacts = vec![checkpoint_artifact("engine.json", &engine.checkpoint())?, Artifact::new("trace.csv", csv)];
            write_bundle(&cfg.output_dir, "train", &cfg, &artifacts)
        }
        Command::Decide { common, engine } => {
            let cfg = load_config(&common)?;
            let seed = batch_seed(&cfg);
            let engine = Engine::from_checkpoint(EngineCheckpoint::load(&engine)?, seed)?;
            let workflows = generate_batch(&mut RandomStream::new(seed, streams::WORKFLOWS), &cfg.generator);
            let mut rows = Vec::with_capacity(workflows.len());
            for (id, w) in workflows.iter().enumerate() {
                let (plan, cost) = engine.decide(w)?;
                rows.push(vec![
                    id.to_string(),
                    plan.code(),
                    cost.objective.to_string(),
                    cost.total_delay_s.to_string(),
                    cost.energy_j.to_string(),
                ]);
            }
            let csv = csv_bytes(&["workflow_id", "plan", "objective", "delay", "energy"], rows)?;
            write_bundle(&cfg.output_dir, "decide", &cfg, &[Artifact::new("decisions.csv", csv)])
        }
        Command::MetaTrain { common } => {
            let cfg = load_config(&common)?;
            let psi = meta_params_for(&cfg, None)?;
            let ck = psi.to_checkpoint(&cfg.training, cfg.meta.train_ranges.midpoint());
            write_bundle(&cfg.output_dir, "meta-train", &cfg, &[checkpoint_artifact("meta_params.json", &ck)?])
        }
        Command::SweepConvergence { common } => {
            let cfg = load_config(&common)?;
            let result = run_convergence_sweep(&cfg)?;
            write_bundle(&cfg.output_dir, "sweep-convergence", &cfg, &result.artifacts()?)
        }
        Command::CompareSchemes { common } => {
            let cfg = load_config(&common)?;
            let result = run_scheme_comparison(&cfg)?;
            write_bundle(&cfg.output_dir, "compare-schemes", &cfg, &result.artifacts()?)
        }
        Command::MetaStudy { common, meta_params } => {
            let cfg = load_config(&common)?;
            let result = run_meta_study(&cfg, load_meta(meta_params.as_deref())?)?;
            write_bundle(&cfg.output_dir, "meta-study", &cfg, &result.artifacts()?)
        }
        Command::Oracle { common } => {
            let cfg = load_config(&common)?;
            let env = cfg.environment;
            let workflows = generate_batch(&mut RandomStream::new(batch_seed(&cfg), streams::WORKFLOWS), &cfg.generator);
            let rows = workflows
                .iter()
                .enumerate()
                .map(|(id, w)| brute_force_optimal(w, &env, DEFAULT_ENUMERATION_CAP).map(|(p, obj)| (id, p, obj)))
                .collect::<Result<Vec<_>>>()?;
            let mut csv = Vec::new();
            write_oracle_csv(&mut csv, &rows)?;
            write_bundle(&cfg.output_dir, "oracle", &cfg, &[Artifact::new("oracle.csv", csv)])
        }
    }
}

fn exit_code(err: &Error) -> u8 {
    match err.category() {
        "config" => 2,
        "validation" => 3,
        "io" => 4,
        _ => 5,
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(manifest) => {
            println!("{}", manifest.display());
            ExitCode::SUCCESS
        }
        Err(err) => {
            eprintln!("error[{}]: {err}", err.category());
            ExitCode::from(exit_code(&err))
        }
    }
}
