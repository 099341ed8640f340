//! Random workflow generation.

use serde::{Deserialize, Serialize};

use crate::env_model::{EdgeFlow, Task, Workflow};
use crate::error::{Error, Result};
use crate::rng::RandomStream;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GenConfig {
    pub first_task_data_mb: (f64, f64),
    pub later_task_data_mb: (f64, f64),
    pub compute_demand: (f64, f64),
    pub tasks_per_workflow: usize,
    pub workflows_per_user: usize,
    pub users: usize,
}

impl Default for GenConfig {
    fn default() -> Self {
        Self {
            first_task_data_mb: (50.0, 100.0),
            later_task_data_mb: (10.0, 50.0),
            compute_demand: (1e3, 1e5),
            tasks_per_workflow: 5,
            workflows_per_user: 5,
            users: 4,
        }
    }
}

impl GenConfig {
    pub fn validate(&self) -> Result<()> {
        for (name, (lo, hi)) in [
            ("first_task_data_mb", self.first_task_data_mb),
            ("later_task_data_mb", self.later_task_data_mb),
            ("compute_demand", self.compute_demand),
        ] {
            if !(lo > 0.0 && lo <= hi && hi.is_finite()) {
                return Err(Error::InvalidConfig(format!("{name} range [{lo}, {hi}] must be positive and ordered")));
            }
        }
        if self.tasks_per_workflow == 0 {
            return Err(Error::InvalidConfig("tasks_per_workflow must be at least 1".into()));
        }
        Ok(())
    }
}

/// Draws one chain. Each flow carries the downstream task's data.
pub fn generate_workflow(rng: &mut RandomStream, cfg: &GenConfig) -> Workflow {
    let n = cfg.tasks_per_workflow;
    let mut tasks = Vec::with_capacity(n);
    for i in 0..n {
        let (lo, hi) = if i == 0 { cfg.first_task_data_mb } else { cfg.later_task_data_mb };
        let data = rng.uniform(lo, hi);
        let compute = rng.uniform(cfg.compute_demand.0, cfg.compute_demand.1);
        tasks.push(Task::new(compute, data));
    }
    let flows = tasks[1..].iter().map(|t| EdgeFlow::new(t.data_size)).collect();
    Workflow { tasks, flows }
}

/// `users * workflows_per_user` workflows, user-major.
pub fn generate_batch(rng: &mut RandomStream, cfg: &GenConfig) -> Vec<Workflow> {
    (0..cfg.users * cfg.workflows_per_user).map(|_| generate_workflow(rng, cfg)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn degenerate_ranges() {
        let cfg = GenConfig {
            first_task_data_mb: (50.0, 50.0),
            later_task_data_mb: (10.0, 10.0),
            compute_demand: (1e3, 1e3),
            tasks_per_workflow: 3,
            ..GenConfig::default()
        };
        let w = generate_workflow(&mut RandomStream::new(1, 1), &cfg);
        let data: Vec<f64> = w.tasks.iter().map(|t| t.data_size).collect();
        assert_eq!(data, vec![50.0, 10.0, 10.0]);
        assert!(w.tasks.iter().all(|t| t.compute_demand == 1000.0));
        assert_eq!(w.flows, vec![EdgeFlow::new(10.0), EdgeFlow::new(10.0)]);
        w.validate().unwrap();
    }

    #[test]
    fn same_seed_identical() {
        let cfg = GenConfig::default();
        let a = generate_workflow(&mut RandomStream::new(42, 1), &cfg);
        let b = generate_workflow(&mut RandomStream::new(42, 1), &cfg);
        assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
    }

    #[test]
    fn samples_stay_in_range() {
        let cfg = GenConfig::default();
        let mut rng = RandomStream::new(3, 1);
        for _ in 0..10_000 {
            let w = generate_workflow(&mut rng, &cfg);
            assert!((50.0..=100.0).contains(&w.tasks[0].data_size));
            for t in &w.tasks[1..] {
                assert!((10.0..=50.0).contains(&t.data_size));
            }
            for t in &w.tasks {
                assert!((1e3..=1e5).contains(&t.compute_demand));
            }
        }
    }

    #[test]
    fn batch_sizes() {
        let mut rng = RandomStream::new(0, 1);
        assert_eq!(generate_batch(&mut rng, &GenConfig::default()).len(), 20);
        let none = GenConfig { users: 0, ..GenConfig::default() };
        assert!(generate_batch(&mut rng, &none).is_empty());
    }

    #[test]
    fn distinct_seeds_differ() {
        let cfg = GenConfig::default();
        for s in 0..100u64 {
            let a = generate_batch(&mut RandomStream::new(2 * s, 1), &cfg);
            let b = generate_batch(&mut RandomStream::new(2 * s + 1, 1), &cfg);
            assert_ne!(a, b);
        }
    }

    #[test]
    fn rejects_bad_config() {
        let bad = GenConfig { compute_demand: (10.0, 1.0), ..GenConfig::default() };
        assert!(bad.validate().is_err());
        let bad = GenConfig { tasks_per_workflow: 0, ..GenConfig::default() };
        assert!(bad.validate().is_err());
        GenConfig::default().validate().unwrap();
    }
}
