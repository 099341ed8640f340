//! Acceptance suite. Each test prints one `criterion N ... PASS|FAIL` line.
//!
//! Run with `cargo test -p offload-core --test acceptance -- --nocapture`.

use std::sync::OnceLock;
use std::time::Instant;

use offload_core::baselines::{brute_force_optimal, dp_optimal};
use offload_core::drl_engine::Engine;
use offload_core::env_model::{local_objective_f, workflow_cost, OffloadDecision, Plan};
use offload_core::experiment::{
    run_convergence_sweep, run_meta_study, run_scheme_comparison, ConvergenceResult, ExperimentConfig, Init,
    MetaStudyResult, SweepAxis,
};
use offload_core::meta::{meta_workflows, sample_environment, train_meta_observed, EnvRanges, MetaConfig};
use offload_core::neuralnet::{InitScheme, MlpParams, Sample, TrainConfig};
use offload_core::presets;
use offload_core::rng::RandomStream;
use offload_core::workflow_gen::{generate_workflow, GenConfig};

fn report(id: u32, name: &str, pass: bool, detail: String) {
    println!("criterion {id} [{name}]: {} ({detail})", if pass { "PASS" } else { "FAIL" });
    assert!(pass, "criterion {id} [{name}] failed: {detail}");
}

fn sweep() -> &'static ConvergenceResult {
    static CELL: OnceLock<ConvergenceResult> = OnceLock::new();
    CELL.get_or_init(|| run_convergence_sweep(&ExperimentConfig::default()).unwrap())
}

fn meta_study() -> &'static MetaStudyResult {
    static CELL: OnceLock<MetaStudyResult> = OnceLock::new();
    CELL.get_or_init(|| run_meta_study(&ExperimentConfig::default(), None).unwrap())
}

#[test]
fn criterion_1_cost_decomposition() {
    let start = Instant::now();
    let mut rng = RandomStream::new(1, 100);
    let ranges = EnvRanges {
        c_local: (5.0, 50.0),
        c_edge: (20.0, 100.0),
        c_cloud: (50.0, 300.0),
        b_device_edge: (100.0, 1000.0),
        b_edge_cloud: (50.0, 400.0),
        b_device_cloud: (5.0, 50.0),
        ..presets::meta_train_ranges()
    };
    let mut worst = 0.0f64;
    for k in 0..1000 {
        let mut env = sample_environment(&mut rng, &ranges);
        env.delta = rng.uniform(0.0, 3.0);
        let gen = GenConfig { tasks_per_workflow: 1 + k % 8, ..GenConfig::default() };
        let w = generate_workflow(&mut rng, &gen);
        let plan = Plan::new((0..w.len()).map(|_| OffloadDecision::ALL[rng.index(3)]).collect());
        let total = workflow_cost(&w, &plan, &env).unwrap().objective;
        let mut prev = OffloadDecision::Device;
        let mut chained = 0.0;
        for (i, &a) in plan.decisions.iter().enumerate() {
            chained += local_objective_f(prev, w.inbound(i).as_ref(), &w.tasks[i], a, &env);
            prev = a;
        }
        worst = worst.max((total - chained).abs() / total.abs());
    }
    let secs = start.elapsed().as_secs_f64();
    report(1, "cost decomposition", worst <= 1e-9 && secs < 1.0, format!("max rel err {worst:.2e}, {secs:.3}s"));
}

#[test]
fn criterion_2_oracle_cross_validation() {
    let start = Instant::now();
    let mut rng = RandomStream::new(2, 100);
    let (mut plan_mismatch, mut worst) = (0, 0.0f64);
    for k in 0..200 {
        // small compute demands make transfers matter, so optima are mixed plans
        let gen = GenConfig { tasks_per_workflow: 1 + k % 6, compute_demand: (1.0, 1e4), ..GenConfig::default() };
        let env = presets::reference().with_delta(rng.uniform(0.0, 2.0));
        let w = generate_workflow(&mut rng, &gen);
        let (bp, bo) = brute_force_optimal(&w, &env, 10).unwrap();
        let (dp, dobj) = dp_optimal(&w, &env).unwrap();
        worst = worst.max((bo - dobj).abs() / bo.abs());
        plan_mismatch += usize::from(bp != dp);
    }
    let secs = start.elapsed().as_secs_f64();
    report(
        2,
        "brute force equals DP",
        worst <= 1e-9 && plan_mismatch == 0 && secs < 10.0,
        format!("max rel err {worst:.2e}, {plan_mismatch} plan mismatches, {secs:.3}s"),
    );
}

#[test]
fn criterion_3_gradient_check() {
    let start = Instant::now();
    let mut rng = RandomStream::new(3, 100);
    let mut worst = 0.0f64;
    for _ in 0..50 {
        let sizes = [2 + rng.index(6), 2 + rng.index(8), 2 + rng.index(8), 3];
        let p = MlpParams::init(&sizes, &mut rng, InitScheme::ScaledUniform).unwrap();
        let n = 1 + rng.index(8);
        let states: Vec<Vec<f64>> = (0..n).map(|_| (0..sizes[0]).map(|_| rng.uniform(-2.0, 2.0)).collect()).collect();
        let batch: Vec<Sample> = states
            .iter()
            .map(|s| Sample { state: s, action: rng.index(3), target: rng.uniform(-3.0, 1.0) })
            .collect();
        let (_, analytic) = p.gradients(&batch).unwrap();
        let numeric = p.numerical_gradients(&batch, 1e-5).unwrap();
        worst = worst.max(analytic.max_relative_error(&numeric, 1e-6));
    }
    let secs = start.elapsed().as_secs_f64();
    report(3, "gradient check", worst <= 1e-4 && secs < 30.0, format!("max rel err {worst:.2e}, {secs:.3}s"));
}

#[test]
fn criterion_4_scheme_ordering() {
    let result = run_scheme_comparison(&ExperimentConfig::default()).unwrap();
    let mut pass = true;
    let mut detail = Vec::new();
    for delta in result.deltas() {
        let parallel = result.mean("parallel_dqn", delta);
        let dqn = result.mean("dqn", delta);
        let fixed = result.mean_best_fixed(delta);
        let gap = result.oracle_gap("parallel_dqn", delta);
        pass &= parallel <= dqn && dqn <= fixed && gap <= 0.15;
        detail.push(format!("delta {delta}: {parallel:.2} <= {dqn:.2} <= {fixed:.2}, gap {:.2}%", 100.0 * gap));
    }
    report(4, "parallel <= single <= best fixed", pass, detail.join("; "));
}

#[test]
fn criterion_5_convergence_sweep() {
    let r = sweep();
    let reached = |lr: f64| r.runs_at(SweepAxis::LearningRate, lr).filter(|x| x.steps_to_threshold.is_some()).count();
    let seeds = r.runs_at(SweepAxis::LearningRate, 0.01).count();
    let (fast, slow) = (reached(0.01), reached(0.0001));
    let (std_small, std_large) = (r.mean_rolling_std(SweepAxis::BatchSize, 128.0), r.mean_rolling_std(SweepAxis::BatchSize, 1024.0));
    report(
        5,
        "convergence sweep",
        fast == seeds && slow == 0 && std_large < std_small,
        format!("lr 0.01 reached {fast}/{seeds}, lr 0.0001 reached {slow}/{seeds}, std 128={std_small:.4} 1024={std_large:.4}"),
    );
}

#[test]
fn criterion_6_freeze_signature() {
    let (aligned, windows) = sweep().freeze_alignment(1024);
    let frac = aligned as f64 / windows as f64;
    report(6, "freeze-aligned loss jumps", windows > 0 && frac >= 0.6, format!("{aligned}/{windows} = {:.0}%", 100.0 * frac));
}

#[test]
fn criterion_7a_meta_steps_to_threshold() {
    let m = meta_study();
    let (meta, random) = (m.median_steps(Init::Meta), m.median_steps(Init::Random));
    report(
        7,
        "meta init reaches threshold faster",
        meta <= 0.8 * random,
        format!("median steps meta {meta} vs random {random}, threshold {:.4}", m.threshold),
    );
}

#[test]
fn criterion_7b_meta_decision_cost() {
    let m = meta_study();
    let mut pass = true;
    let mut detail = Vec::new();
    for round in [20, 40, 80] {
        let (meta, random) = (m.mean_cost(Init::Meta, round), m.mean_cost(Init::Random, round));
        pass &= meta <= random;
        detail.push(format!("round {round}: meta {meta:.2} vs random {random:.2}"));
    }
    report(7, "meta init decision cost", pass, detail.join("; "));
}

#[test]
fn criterion_8_degeneracy_equivalence() {
    let env = presets::meta_test();
    let cfg = TrainConfig::default();
    let gen = GenConfig::default();
    let seed = 8;
    let mut engine = Engine::new(TrainConfig { units: 1, ..cfg.clone() }, env, seed).unwrap();
    let workflows = meta_workflows(&gen, seed);
    let mut mismatches = 0;
    let mut checkpoints = 0;
    let psi = train_meta_observed(&cfg, &EnvRanges::collapsed(&env), &gen, &MetaConfig { interaction_steps: 2000 }, seed, |k, meta| {
        engine.train_workflow(&workflows[(k as usize - 1) % workflows.len()]).unwrap();
        checkpoints += 1;
        let (a, b) = (&meta.units()[0], &engine.units()[0]);
        mismatches += usize::from(a.online != b.online || a.target != b.target);
    })
    .unwrap();
    let same_final = psi.psi == engine.units()[0].online;
    report(
        8,
        "collapsed ranges equal single-unit training",
        mismatches == 0 && same_final && checkpoints > 0,
        format!("{checkpoints} checkpoints, {mismatches} mismatches"),
    );
}

#[test]
fn criterion_9_determinism() {
    let mut cfg = ExperimentConfig { seeds: 2, train_steps: 150, ..ExperimentConfig::default() };
    cfg.convergence.train_steps = 150;
    cfg.convergence.batch_sizes = vec![128];
    cfg.convergence.learning_rates = vec![0.01];
    cfg.convergence.freeze_batch_size = 128;
    cfg.comparison.deltas = vec![0.5, 1.0];
    cfg.meta.interaction_steps = 500;
    cfg.meta.rounds = 100;
    let render = || {
        let mut files = run_convergence_sweep(&cfg).unwrap().artifacts().unwrap();
        files.extend(run_scheme_comparison(&cfg).unwrap().artifacts().unwrap());
        files.extend(run_meta_study(&cfg, None).unwrap().artifacts().unwrap());
        files
    };
    let (a, b) = (render(), render());
    let differing: Vec<&str> = a.iter().zip(&b).filter(|(x, y)| x != y).map(|(x, _)| x.name.as_str()).collect();
    report(
        9,
        "byte-identical reruns",
        a.len() == b.len() && differing.is_empty(),
        format!("{} artifacts, differing: {differing:?}", a.len()),
    );
}
