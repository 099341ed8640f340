//! Environment parameters and the analytic delay/energy cost model.
//!
//! Units: compute demand in M-cycles over capacities in MHz gives seconds;
//! megabytes over MB/s gives seconds; megabytes times J/MB gives joules.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Compute capacities, bandwidths, energy densities and objective weights
/// of a device/edge/cloud system.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnvironmentSpec {
    pub c_local: f64,
    pub c_edge: f64,
    pub c_cloud: f64,
    pub b_device_edge: f64,
    pub b_edge_cloud: f64,
    pub b_device_cloud: f64,
    pub d_local: f64,
    pub d_edge: f64,
    pub d_cloud: f64,
    /// Weight on energy spent at the edge.
    pub alpha: f64,
    /// Weight on energy spent in the cloud.
    pub beta: f64,
    /// Weight of energy relative to delay in the objective.
    pub delta: f64,
}

impl EnvironmentSpec {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("c_local", self.c_local),
            ("c_edge", self.c_edge),
            ("c_cloud", self.c_cloud),
            ("b_device_edge", self.b_device_edge),
            ("b_edge_cloud", self.b_edge_cloud),
            ("b_device_cloud", self.b_device_cloud),
            ("d_local", self.d_local),
            ("d_edge", self.d_edge),
            ("d_cloud", self.d_cloud),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidEnvironment(format!("{name} must be positive, got {v}")));
            }
        }
        for (name, v) in [("alpha", self.alpha), ("beta", self.beta), ("delta", self.delta)] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::InvalidEnvironment(format!("{name} must be non-negative, got {v}")));
            }
        }
        Ok(())
    }

    pub fn with_delta(mut self, delta: f64) -> Self {
        self.delta = delta;
        self
    }

    fn capacity(&self, loc: OffloadDecision) -> f64 {
        match loc {
            OffloadDecision::Device => self.c_local,
            OffloadDecision::Edge => self.c_edge,
            OffloadDecision::Cloud => self.c_cloud,
        }
    }

    fn density(&self, loc: OffloadDecision) -> f64 {
        match loc {
            OffloadDecision::Device => self.d_local,
            OffloadDecision::Edge => self.d_edge,
            OffloadDecision::Cloud => self.d_cloud,
        }
    }

    /// Energy weight of a tier: 1 on the device, alpha at the edge, beta in the cloud.
    fn energy_weight(&self, loc: OffloadDecision) -> f64 {
        match loc {
            OffloadDecision::Device => 1.0,
            OffloadDecision::Edge => self.alpha,
            OffloadDecision::Cloud => self.beta,
        }
    }

    fn bandwidth(&self, a: OffloadDecision, b: OffloadDecision) -> Option<f64> {
        use OffloadDecision::*;
        match (a, b) {
            (Device, Edge) | (Edge, Device) => Some(self.b_device_edge),
            (Edge, Cloud) | (Cloud, Edge) => Some(self.b_edge_cloud),
            (Device, Cloud) | (Cloud, Device) => Some(self.b_device_cloud),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Task {
    /// M-cycles.
    pub compute_demand: f64,
    /// MB.
    pub data_size: f64,
}

impl Task {
    pub fn new(compute_demand: f64, data_size: f64) -> Self {
        Self { compute_demand, data_size }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EdgeFlow {
    pub transfer_mb: f64,
}

impl EdgeFlow {
    pub fn new(transfer_mb: f64) -> Self {
        Self { transfer_mb }
    }
}

/// A chain of dependent tasks; `flows[k]` carries data from task `k` to task `k + 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Workflow {
    pub tasks: Vec<Task>,
    pub flows: Vec<EdgeFlow>,
}

impl Workflow {
    pub fn new(tasks: Vec<Task>, flows: Vec<EdgeFlow>) -> Result<Self> {
        let w = Self { tasks, flows };
        w.validate()?;
        Ok(w)
    }

    pub fn validate(&self) -> Result<()> {
        if self.tasks.is_empty() {
            return Err(Error::InvalidWorkflow("workflow has no tasks".into()));
        }
        if self.flows.len() + 1 != self.tasks.len() {
            return Err(Error::InvalidWorkflow(format!(
                "{} tasks need {} flows, got {}",
                self.tasks.len(),
                self.tasks.len() - 1,
                self.flows.len()
            )));
        }
        for t in &self.tasks {
            if !(t.compute_demand > 0.0 && t.data_size > 0.0) || !t.compute_demand.is_finite() || !t.data_size.is_finite() {
                return Err(Error::InvalidWorkflow(format!("task sizes must be positive: {t:?}")));
            }
        }
        if self.flows.iter().any(|f| !(f.transfer_mb >= 0.0 && f.transfer_mb.is_finite())) {
            return Err(Error::InvalidWorkflow("flow sizes must be non-negative".into()));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.tasks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tasks.is_empty()
    }

    /// Flow into task `i` (zero-based), `None` for the first task.
    pub fn inbound(&self, i: usize) -> Option<EdgeFlow> {
        if i == 0 {
            None
        } else {
            self.flows.get(i - 1).copied()
        }
    }
}

/// Execution tier of one task. The discriminant is the action index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum OffloadDecision {
    Device = 0,
    Edge = 1,
    Cloud = 2,
}

impl OffloadDecision {
    pub const ALL: [OffloadDecision; 3] = [Self::Device, Self::Edge, Self::Cloud];

    pub fn from_index(i: usize) -> Option<Self> {
        Self::ALL.get(i).copied()
    }

    pub fn index(self) -> usize {
        self as usize
    }

    /// One-hot column `[b0, b1, b2]`.
    pub fn one_hot(self) -> [f64; 3] {
        let mut v = [0.0; 3];
        v[self.index()] = 1.0;
        v
    }

    pub fn symbol(self) -> char {
        match self {
            Self::Device => 'D',
            Self::Edge => 'E',
            Self::Cloud => 'C',
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Plan {
    pub decisions: Vec<OffloadDecision>,
}

impl Plan {
    pub fn new(decisions: Vec<OffloadDecision>) -> Self {
        Self { decisions }
    }

    pub fn len(&self) -> usize {
        self.decisions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.decisions.is_empty()
    }

    /// Compact form such as `"DEC"`.
    pub fn code(&self) -> String {
        self.decisions.iter().map(|d| d.symbol()).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct CostBreakdown {
    pub compute_delay_s: f64,
    pub transmit_delay_s: f64,
    pub total_delay_s: f64,
    pub energy_j: f64,
    pub objective: f64,
}

pub fn compute_delay(task: &Task, dec: OffloadDecision, env: &EnvironmentSpec) -> f64 {
    task.compute_demand / env.capacity(dec)
}

/// Zero when both ends share a tier; otherwise the transfer over the tier pair's bandwidth.
pub fn transmission_delay(flow: &EdgeFlow, from: OffloadDecision, to: OffloadDecision, env: &EnvironmentSpec) -> f64 {
    match env.bandwidth(from, to) {
        Some(bw) => flow.transfer_mb / bw,
        None => 0.0,
    }
}

/// Unweighted execution energy of a task; transmission energy is not modeled.
pub fn task_energy(task: &Task, dec: OffloadDecision, env: &EnvironmentSpec) -> f64 {
    task.data_size * env.density(dec)
}

/// Task energy after the tier weight (1, alpha or beta).
pub fn weighted_task_energy(task: &Task, dec: OffloadDecision, env: &EnvironmentSpec) -> f64 {
    env.energy_weight(dec) * task_energy(task, dec, env)
}

/// Delay, weighted energy and objective of one workflow under a plan.
///
/// Transfers are charged between consecutive tasks only: the first task has no
/// inbound transfer and the last task returns nothing.
pub fn workflow_cost(workflow: &Workflow, plan: &Plan, env: &EnvironmentSpec) -> Result<CostBreakdown> {
    if plan.len() != workflow.len() {
        return Err(Error::PlanLength { plan: plan.len(), tasks: workflow.len() });
    }
    let mut compute = 0.0;
    let mut transmit = 0.0;
    let mut energy = 0.0;
    for (i, (task, &dec)) in workflow.tasks.iter().zip(&plan.decisions).enumerate() {
        compute += compute_delay(task, dec, env);
        if let Some(flow) = workflow.flows.get(i) {
            transmit += transmission_delay(flow, dec, plan.decisions[i + 1], env);
        }
        energy += weighted_task_energy(task, dec, env);
    }
    let total = compute + transmit;
    Ok(CostBreakdown {
        compute_delay_s: compute,
        transmit_delay_s: transmit,
        total_delay_s: total,
        energy_j: energy,
        objective: total + env.delta * energy,
    })
}

/// Sum of per-workflow objectives.
pub fn objective_q(workflows: &[Workflow], plans: &[Plan], env: &EnvironmentSpec) -> Result<f64> {
    if workflows.len() != plans.len() {
        return Err(Error::BatchLength { workflows: workflows.len(), plans: plans.len() });
    }
    workflows
        .iter()
        .zip(plans)
        .map(|(w, p)| workflow_cost(w, p, env).map(|c| c.objective))
        .sum()
}

/// One-step cost of placing `task` at `action` given the previous task's tier:
/// compute delay, inbound transfer (none for the first task) and weighted energy.
pub fn local_objective_f(
    prev: OffloadDecision,
    inbound_flow: Option<&EdgeFlow>,
    task: &Task,
    action: OffloadDecision,
    env: &EnvironmentSpec,
) -> f64 {
    let transmit = inbound_flow.map_or(0.0, |f| transmission_delay(f, prev, action, env));
    compute_delay(task, action, env) + transmit + env.delta * weighted_task_energy(task, action, env)
}

/// `F` for all three actions.
pub fn local_objective_all(
    prev: OffloadDecision,
    inbound_flow: Option<&EdgeFlow>,
    task: &Task,
    env: &EnvironmentSpec,
) -> [f64; 3] {
    OffloadDecision::ALL.map(|a| local_objective_f(prev, inbound_flow, task, a, env))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presets;
    use OffloadDecision::*;

    fn reference() -> EnvironmentSpec {
        presets::reference()
    }

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() <= 1e-12 * a.abs().max(b.abs()).max(1.0)
    }

    #[test]
    fn compute_delay_examples() {
        let env = reference();
        assert!(close(compute_delay(&Task::new(30.0, 1.0), Device, &env), 1.0));
        assert!(close(compute_delay(&Task::new(150.0, 1.0), Cloud, &env), 1.0));
        for d in OffloadDecision::ALL {
            assert!(compute_delay(&Task::new(1e-300, 1.0), d, &env) < 1e-298);
        }
    }

    #[test]
    fn transmission_examples() {
        let env = reference();
        let f = EdgeFlow::new(80.0);
        assert_eq!(transmission_delay(&f, Edge, Edge, &env), 0.0);
        assert!(close(transmission_delay(&f, Device, Edge, &env), 0.1));
        assert!(close(transmission_delay(&f, Cloud, Device, &env), 8.0));
    }

    #[test]
    fn transmission_is_symmetric() {
        let env = reference();
        let f = EdgeFlow::new(37.5);
        for a in OffloadDecision::ALL {
            for b in OffloadDecision::ALL {
                assert_eq!(transmission_delay(&f, a, b, &env), transmission_delay(&f, b, a, &env));
            }
        }
    }

    #[test]
    fn energy_examples() {
        let env = reference();
        assert!(close(task_energy(&Task::new(1.0, 10.0), Device, &env), 3.0));
        assert!(close(task_energy(&Task::new(1.0, 10.0), Cloud, &env), 1.0));
        assert!(task_energy(&Task::new(1.0, 1e-300), Edge, &env) < 1e-299);
    }

    #[test]
    fn single_task_workflow_cost() {
        let env = reference().with_delta(1.0);
        let w = Workflow::new(vec![Task::new(30.0, 10.0)], vec![]).unwrap();
        let c = workflow_cost(&w, &Plan::new(vec![Device]), &env).unwrap();
        assert!(close(c.total_delay_s, 1.0));
        assert!(close(c.energy_j, 3.0));
        assert!(close(c.objective, 4.0));
        assert_eq!(c.transmit_delay_s, 0.0);
    }

    #[test]
    fn zero_delta_objective_is_delay() {
        let env = reference().with_delta(0.0);
        let w = Workflow::new(
            vec![Task::new(100.0, 60.0), Task::new(2000.0, 20.0), Task::new(500.0, 30.0)],
            vec![EdgeFlow::new(20.0), EdgeFlow::new(30.0)],
        )
        .unwrap();
        let c = workflow_cost(&w, &Plan::new(vec![Device, Cloud, Edge]), &env).unwrap();
        assert_eq!(c.objective, c.total_delay_s);
    }

    #[test]
    fn same_tier_chain_has_no_transmission() {
        let env = reference();
        let w = Workflow::new(vec![Task::new(10.0, 60.0), Task::new(20.0, 20.0)], vec![EdgeFlow::new(20.0)]).unwrap();
        let c = workflow_cost(&w, &Plan::new(vec![Device, Device]), &env).unwrap();
        assert_eq!(c.transmit_delay_s, 0.0);
    }

    #[test]
    fn plan_length_mismatch() {
        let env = reference();
        let w = Workflow::new(vec![Task::new(10.0, 60.0)], vec![]).unwrap();
        let err = workflow_cost(&w, &Plan::new(vec![Device, Edge]), &env).unwrap_err();
        assert!(matches!(err, Error::PlanLength { plan: 2, tasks: 1 }));
    }

    #[test]
    fn objective_q_sums() {
        let env = reference();
        assert_eq!(objective_q(&[], &[], &env).unwrap(), 0.0);
        let w = Workflow::new(vec![Task::new(10.0, 60.0), Task::new(20.0, 20.0)], vec![EdgeFlow::new(20.0)]).unwrap();
        let p = Plan::new(vec![Device, Cloud]);
        let single = workflow_cost(&w, &p, &env).unwrap().objective;
        assert_eq!(objective_q(std::slice::from_ref(&w), std::slice::from_ref(&p), &env).unwrap(), single);
        let double = objective_q(&[w.clone(), w.clone()], &[p.clone(), p.clone()], &env).unwrap();
        assert_eq!(double, single + single);
        assert!(matches!(objective_q(&[w], &[], &env), Err(Error::BatchLength { .. })));
    }

    #[test]
    fn local_objective_first_task() {
        let env = reference().with_delta(1.0);
        let f = local_objective_f(Device, None, &Task::new(30.0, 10.0), Device, &env);
        assert!(close(f, 4.0));
    }

    #[test]
    fn local_objective_same_tier_has_no_transfer() {
        let env = reference();
        let t = Task::new(700.0, 25.0);
        let flow = EdgeFlow::new(25.0);
        for a in OffloadDecision::ALL {
            let with_flow = local_objective_f(a, Some(&flow), &t, a, &env);
            let without = local_objective_f(a, None, &t, a, &env);
            assert_eq!(with_flow, without);
        }
    }

    #[test]
    fn local_objective_all_matches_terms() {
        let env = reference().with_delta(0.7);
        let t = Task::new(1234.0, 42.0);
        let flow = EdgeFlow::new(42.0);
        let fs = local_objective_all(Edge, Some(&flow), &t, &env);
        let mut expected = 0.0;
        for a in OffloadDecision::ALL {
            let bw = match (Edge, a) {
                (Edge, Edge) => f64::INFINITY,
                (_, Device) => env.b_device_edge,
                _ => env.b_edge_cloud,
            };
            let comp = t.compute_demand / [env.c_local, env.c_edge, env.c_cloud][a.index()];
            let energy = t.data_size * [env.d_local, env.d_edge, env.d_cloud][a.index()] * [1.0, env.alpha, env.beta][a.index()];
            expected += comp + flow.transfer_mb / bw + env.delta * energy;
        }
        assert!(close(fs.iter().sum::<f64>(), expected));
    }

    #[test]
    fn env_validation() {
        let mut env = reference();
        assert!(env.validate().is_ok());
        env.c_edge = 0.0;
        assert!(env.validate().is_err());
        let mut env = reference();
        env.delta = -1.0;
        assert!(env.validate().is_err());
    }

    #[test]
    fn workflow_validation() {
        assert!(Workflow::new(vec![], vec![]).is_err());
        assert!(Workflow::new(vec![Task::new(1.0, 1.0)], vec![EdgeFlow::new(1.0)]).is_err());
        assert!(Workflow::new(vec![Task::new(0.0, 1.0)], vec![]).is_err());
    }

    #[test]
    fn env_json_field_names() {
        let v = serde_json::to_value(reference()).unwrap();
        for k in [
            "c_local", "c_edge", "c_cloud", "b_device_edge", "b_edge_cloud", "b_device_cloud", "d_local", "d_edge",
            "d_cloud", "alpha", "beta", "delta",
        ] {
            assert!(v.get(k).is_some(), "missing {k}");
        }
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn env() -> impl Strategy<Value = EnvironmentSpec> {
            (prop::array::uniform6(1.0f64..500.0), prop::array::uniform3(0.01f64..1.0), prop::array::uniform3(0.0f64..3.0))
                .prop_map(|(cb, d, w)| EnvironmentSpec {
                    c_local: cb[0],
                    c_edge: cb[1],
                    c_cloud: cb[2],
                    b_device_edge: cb[3],
                    b_edge_cloud: cb[4],
                    b_device_cloud: cb[5],
                    d_local: d[0],
                    d_edge: d[1],
                    d_cloud: d[2],
                    alpha: w[0],
                    beta: w[1],
                    delta: w[2],
                })
        }

        fn workflow_and_plan() -> impl Strategy<Value = (Workflow, Plan)> {
            prop::collection::vec((1.0f64..1e5, 1.0f64..100.0, 0usize..3), 1..7).prop_map(|v| {
                let tasks: Vec<Task> = v.iter().map(|&(c, d, _)| Task::new(c, d)).collect();
                let flows = tasks[1..].iter().map(|t| EdgeFlow::new(t.data_size)).collect();
                let plan = Plan::new(v.iter().map(|&(_, _, a)| OffloadDecision::ALL[a]).collect());
                (Workflow::new(tasks, flows).unwrap(), plan)
            })
        }

        proptest! {
            #[test]
            fn objective_is_sum_of_chained_local_terms((w, plan) in workflow_and_plan(), env in env()) {
                let total = workflow_cost(&w, &plan, &env).unwrap().objective;
                let mut prev = OffloadDecision::Device;
                let mut chained = 0.0;
                for (i, &a) in plan.decisions.iter().enumerate() {
                    chained += local_objective_f(prev, w.inbound(i).as_ref(), &w.tasks[i], a, &env);
                    prev = a;
                }
                prop_assert!((total - chained).abs() <= 1e-9 * total.abs().max(1.0));
            }

            #[test]
            fn more_compute_never_costs_less((w, plan) in workflow_and_plan(), env in env(), k in 0usize..6, extra in 0.0f64..1e4) {
                let k = k % w.len();
                let mut heavier = w.clone();
                heavier.tasks[k].compute_demand += extra;
                let a = workflow_cost(&w, &plan, &env).unwrap().objective;
                let b = workflow_cost(&heavier, &plan, &env).unwrap().objective;
                prop_assert!(b >= a);
            }

            #[test]
            fn transfer_is_symmetric(mb in 0.0f64..100.0, a in 0usize..3, b in 0usize..3, env in env()) {
                let (a, b) = (OffloadDecision::ALL[a], OffloadDecision::ALL[b]);
                let f = EdgeFlow::new(mb);
                prop_assert_eq!(transmission_delay(&f, a, b, &env), transmission_delay(&f, b, a, &env));
            }

            #[test]
            fn costs_are_non_negative((w, plan) in workflow_and_plan(), env in env()) {
                let c = workflow_cost(&w, &plan, &env).unwrap();
                prop_assert!(c.compute_delay_s > 0.0 && c.transmit_delay_s >= 0.0 && c.energy_j >= 0.0);
            }
        }
    }
}
