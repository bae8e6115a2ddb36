//! Closed-loop rollouts and realized-cost comparisons.

use crate::disturbance::{remaining_count, DisturbanceScenario};
use crate::error::{Error, Result};
use crate::linalg::{quad_form, Vector};
use crate::lqr::{RiccatiData, SystemModel};
use crate::policies::{BlindPolicy, OfflinePolicy, Policy};

/// Trace of one rollout. `stage_costs[T]` is the terminal cost.
#[derive(Debug, Clone, PartialEq)]
pub struct RolloutResult {
    pub policy: &'static str,
    pub states: Vec<Vector>,
    pub controls: Vec<Vector>,
    pub stage_costs: Vec<f64>,
    pub disturbed: Vec<bool>,
    pub total_cost: f64,
}

/// Runs `policy` from `x0` through `scenario`. The remaining-disturbance
/// counter handed to the policy at step `t` counts disturbances at `t` or
/// later, and drops only after one is realized.
pub fn rollout(
    policy: &dyn Policy,
    scenario: &DisturbanceScenario,
    x0: &Vector,
    model: &SystemModel,
) -> Result<RolloutResult> {
    let n = model.state_dim();
    if x0.len() != n {
        return Err(Error::DimensionMismatch {
            matrix: "x0",
            expected_rows: n,
            expected_cols: 1,
            rows: x0.len(),
            cols: 1,
        });
    }
    if scenario.horizon() != model.horizon || scenario.dim() != n {
        return Err(Error::InvalidScenario(format!(
            "scenario ({} steps, dim {}) does not fit model ({} steps, dim {n})",
            scenario.horizon(),
            scenario.dim(),
            model.horizon
        )));
    }
    let horizon = model.horizon;
    let mut states = Vec::with_capacity(horizon + 1);
    let mut controls = Vec::with_capacity(horizon);
    let mut stage_costs = Vec::with_capacity(horizon + 1);
    let mut disturbed = Vec::with_capacity(horizon);
    let mut k_remaining = remaining_count(scenario, 0);
    let mut x = x0.clone();

    for t in 0..horizon {
        let u = policy.action(t, &x, k_remaining)?;
        stage_costs.push(quad_form(&model.q, &x) + quad_form(&model.r, &u));
        let mut next = &model.a * &x + &model.b * &u;
        let d = scenario.disturbance_at(t);
        if let Some(d) = d {
            next += d;
            k_remaining -= 1;
        }
        disturbed.push(d.is_some());
        states.push(std::mem::replace(&mut x, next));
        controls.push(u);
    }
    stage_costs.push(quad_form(&model.q_terminal, &x));
    states.push(x);
    let total_cost = stage_costs.iter().sum();
    Ok(RolloutResult {
        policy: policy.label(),
        states,
        controls,
        stage_costs,
        disturbed,
        total_cost,
    })
}

/// Realized costs of the regret decomposition for one scenario.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegretSample {
    /// Blind policy with the disturbances.
    pub blind_disturbed: f64,
    /// Blind policy without disturbances.
    pub blind_nominal: f64,
    /// Offline policy with the disturbances.
    pub offline_disturbed: f64,
    pub regret: f64,
}

pub fn empirical_regret(
    scenario: &DisturbanceScenario,
    x0: &Vector,
    model: &SystemModel,
    riccati: &RiccatiData,
) -> Result<RegretSample> {
    let blind = BlindPolicy::new(riccati);
    let offline = OfflinePolicy::new(scenario, riccati)?;
    let empty = DisturbanceScenario::empty(model.horizon, model.state_dim());
    let blind_disturbed = rollout(&blind, scenario, x0, model)?.total_cost;
    let blind_nominal = rollout(&blind, &empty, x0, model)?.total_cost;
    let offline_disturbed = rollout(&offline, scenario, x0, model)?.total_cost;
    Ok(RegretSample {
        blind_disturbed,
        blind_nominal,
        offline_disturbed,
        regret: blind_disturbed - offline_disturbed,
    })
}
