//! Fixed-tier baselines and exact solvers.

use std::io::Write;

use crate::env_model::{local_objective_f, workflow_cost, EnvironmentSpec, OffloadDecision, Plan, Workflow};
use crate::error::{Error, Result};

pub const DEFAULT_ENUMERATION_CAP: usize = 10;

/// Every task on `tier`.
pub fn fixed_plan(w: &Workflow, tier: OffloadDecision) -> Plan {
    Plan::new(vec![tier; w.len()])
}

/// Cheapest of the three fixed-tier plans, with its objective.
pub fn best_fixed_plan(w: &Workflow, env: &EnvironmentSpec) -> Result<(Plan, f64)> {
    let mut best: Option<(Plan, f64)> = None;
    for tier in OffloadDecision::ALL {
        let plan = fixed_plan(w, tier);
        let obj = workflow_cost(w, &plan, env)?.objective;
        if best.as_ref().is_none_or(|(_, b)| obj < *b) {
            best = Some((plan, obj));
        }
    }
    Ok(best.expect("three tiers"))
}

/// Exhaustive search over all `3^N` plans in lexicographic order
/// (Device < Edge < Cloud); the first minimum wins.
pub fn brute_force_optimal(w: &Workflow, env: &EnvironmentSpec, cap: usize) -> Result<(Plan, f64)> {
    let n = w.len();
    if n > cap {
        return Err(Error::OverCap { tasks: n, cap });
    }
    let total = 3usize.pow(n as u32);
    let mut digits = vec![0usize; n];
    let mut best: Option<(Vec<usize>, f64)> = None;
    for _ in 0..total {
        let plan = Plan::new(digits.iter().map(|&d| OffloadDecision::ALL[d]).collect());
        let obj = workflow_cost(w, &plan, env)?.objective;
        if best.as_ref().is_none_or(|(_, b)| obj < *b) {
            best = Some((digits.clone(), obj));
        }
        // odometer, most significant digit first
        for d in digits.iter_mut().rev() {
            *d += 1;
            if *d < 3 {
                break;
            }
            *d = 0;
        }
    }
    let (digits, obj) = best.expect("at least one plan");
    Ok((Plan::new(digits.into_iter().map(|d| OffloadDecision::ALL[d]).collect()), obj))
}

/// Exact optimum by backward dynamic programming over (task, previous tier).
pub fn dp_optimal(w: &Workflow, env: &EnvironmentSpec) -> Result<(Plan, f64)> {
    w.validate()?;
    let n = w.len();
    // cost_to_go[i][p]: best cost of tasks i.. given task i-1 ran on tier p
    let mut cost_to_go = vec![[0.0f64; 3]; n + 1];
    let mut choice = vec![[0usize; 3]; n];
    for i in (0..n).rev() {
        let inbound = w.inbound(i);
        for prev in OffloadDecision::ALL {
            let mut best = f64::INFINITY;
            let mut arg = 0;
            for a in OffloadDecision::ALL {
                let c = local_objective_f(prev, inbound.as_ref(), &w.tasks[i], a, env) + cost_to_go[i + 1][a.index()];
                if c < best {
                    best = c;
                    arg = a.index();
                }
            }
            cost_to_go[i][prev.index()] = best;
            choice[i][prev.index()] = arg;
        }
    }
    // the first task has no inbound transfer, so its "previous" tier is arbitrary
    let mut prev = 0;
    let mut decisions = Vec::with_capacity(n);
    for c in &choice {
        let a = c[prev];
        decisions.push(OffloadDecision::ALL[a]);
        prev = a;
    }
    Ok((Plan::new(decisions), cost_to_go[0][0]))
}

/// Writes `workflow_id,plan,objective` rows.
pub fn write_oracle_csv<W: Write>(out: W, rows: &[(usize, Plan, f64)]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["workflow_id", "plan", "objective"])?;
    for (id, plan, obj) in rows {
        w.write_record([id.to_string(), plan.code(), obj.to_string()])?;
    }
    w.flush()?;
    Ok(())
}
