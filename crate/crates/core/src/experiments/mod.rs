//! Experiment drivers: single trajectories, horizon/budget sweeps,
//! convergence diagnostics and Monte Carlo bound checks, each with a
//! deterministic CSV writer.

mod config;
mod output;

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde_json::json;

pub use config::{
    builtin_paper_config, builtin_paper_model, paper_model, BoundsConfig, DisturbanceConfig, ExperimentConfig,
    LawKind, ModelConfig, Placement, ProbabilityConfig, ProbabilityKind, SweepConfig,
};
pub use output::{
    num, trajectory_columns, write_artifact, write_bounds_csv, write_diagnostics_csv, write_sweep_csv,
    write_trajectory_csv, BOUNDS_COLUMNS, DIAGNOSTICS_COLUMNS, NOT_APPLICABLE, SWEEP_COLUMNS,
};

use crate::bounds::{verify_bounds, BoundVerification, VerifyOptions};
use crate::disturbance::DisturbanceScenario;
use crate::error::{Error, Result};
use crate::linalg::Vector;
use crate::lqr::{riccati_backward, RiccatiData, SystemModel};
use crate::policies::{da_action, da_precompute, AwarePolicy, BlindPolicy, DisturbanceAwareTables, OfflinePolicy};
use crate::simulator::{rollout, RolloutResult};

/// Threshold on `‖r_0^k‖` reported as the convergence crossing.
pub const CROSSING_THRESHOLD: f64 = 1e-3;

/// Label of the blind policy run without disturbances.
pub const NOMINAL_LABEL: &str = "nominal";

#[derive(Debug, Clone)]
pub struct TrajectoryRun {
    pub scenario: DisturbanceScenario,
    /// Blind, disturbance-aware, offline, then the undisturbed blind run.
    pub rollouts: Vec<RolloutResult>,
}

pub fn run_trajectory_experiment(config: &ExperimentConfig) -> Result<TrajectoryRun> {
    let model = config.system_model()?;
    let riccati = riccati_backward(&model)?;
    let scenario = config.scenario(&model)?;
    let prob = config.probability_model(Some(&scenario), model.horizon, scenario.len())?;
    let x0 = config.x0_vector();

    let blind = BlindPolicy::new(&riccati);
    let aware = AwarePolicy::new(&scenario, &prob, &riccati)?;
    let offline = OfflinePolicy::new(&scenario, &riccati)?;
    let mut rollouts = vec![
        rollout(&blind, &scenario, &x0, &model)?,
        rollout(&aware, &scenario, &x0, &model)?,
        rollout(&offline, &scenario, &x0, &model)?,
    ];
    let empty = DisturbanceScenario::empty(model.horizon, model.state_dim());
    let mut nominal = rollout(&blind, &empty, &x0, &model)?;
    nominal.policy = NOMINAL_LABEL;
    rollouts.push(nominal);
    Ok(TrajectoryRun { scenario, rollouts })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRow {
    pub horizon: usize,
    pub budget: usize,
    /// `‖u_0^DA − u_0^blind‖`.
    pub norm_diff: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiagnosticRow {
    pub horizon: usize,
    pub budget: usize,
    pub r0_norm: f64,
    /// `max_t ‖r_t^k‖`.
    pub r_max_norm: f64,
}

/// Reverse-indexed view of the first `k` chronological values.
pub fn values_by_remaining(values: &[Vector], dim: usize) -> Vec<Vector> {
    let mut out = Vec::with_capacity(values.len() + 1);
    out.push(Vector::zeros(dim));
    out.extend(values.iter().rev().cloned());
    out
}

/// Runs `f(T, k, riccati, tables)` over the sweep grid, with one Riccati
/// pass per horizon. Rows come back sorted by `(T, k)` in grid order.
fn over_grid<R, F>(config: &ExperimentConfig, f: F) -> Result<Vec<R>>
where
    R: Send,
    F: Fn(usize, usize, &RiccatiData, &DisturbanceAwareTables) -> Result<R> + Sync,
{
    let base = config.system_model()?;
    let dim = base.state_dim();
    let max_budget = config.sweep.budgets.iter().copied().max().unwrap_or(0);
    let values = config.disturbance_values(max_budget, dim)?;
    for &horizon in &config.sweep.horizons {
        if let Some(&k) = config.sweep.budgets.iter().find(|&&k| k > horizon) {
            return Err(Error::OutOfRange {
                what: "budget",
                value: k,
                allowed: format!("at most the horizon {horizon}"),
            });
        }
    }
    let per_horizon = config
        .sweep
        .horizons
        .par_iter()
        .map(|&horizon| {
            let riccati = riccati_backward(&base.with_horizon(horizon))?;
            config
                .sweep
                .budgets
                .par_iter()
                .map(|&k| {
                    let prob = config.probability_model(None, horizon, k)?;
                    let tables = da_precompute(&values_by_remaining(&values[..k], dim), &prob, &riccati, k)?;
                    f(horizon, k, &riccati, &tables)
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(per_horizon.into_iter().flatten().collect())
}

/// First-action gap between the disturbance-aware and blind policies at
/// `x0` for every `(T, k)`. Disturbance values are the config's first `k`
/// draws, fixed before the sweep.
pub fn run_sweep(config: &ExperimentConfig) -> Result<Vec<SweepRow>> {
    let x0 = config.x0_vector();
    over_grid(config, |horizon, budget, riccati, tables| {
        let u_da = da_action(0, &x0, budget, tables, riccati)?;
        let u_blind = -(&riccati.k[0] * &x0);
        Ok(SweepRow {
            horizon,
            budget,
            norm_diff: (u_da - u_blind).norm(),
        })
    })
}

pub fn run_convergence_diagnostics(config: &ExperimentConfig) -> Result<Vec<DiagnosticRow>> {
    over_grid(config, |horizon, budget, _, tables| {
        Ok(DiagnosticRow {
            horizon,
            budget,
            r0_norm: tables.r(0, budget).norm(),
            r_max_norm: tables.max_r_norm(budget),
        })
    })
}

/// Smallest sampled horizon with `‖r_0^k‖ < threshold`, per budget.
pub fn first_crossings(rows: &[DiagnosticRow], threshold: f64) -> BTreeMap<usize, Option<usize>> {
    let mut out: BTreeMap<usize, Option<usize>> = BTreeMap::new();
    for r in rows {
        let entry = out.entry(r.budget).or_default();
        if r.r0_norm < threshold && entry.is_none_or(|t| r.horizon < t) {
            *entry = Some(r.horizon);
        }
    }
    out
}

/// One Monte Carlo batch per configured budget, in config order.
pub fn run_bound_verification(config: &ExperimentConfig) -> Result<Vec<BoundVerification>> {
    let model = config.system_model()?;
    let riccati = riccati_backward(&model)?;
    let x0 = config.x0_vector();
    let options = VerifyOptions {
        value_law: config.value_law(),
        override_assumption_check: config.bounds.override_assumption_check,
    };
    config
        .bounds
        .budgets
        .iter()
        .map(|&d| {
            verify_bounds(
                &model,
                &riccati,
                config.bounds.trials,
                d,
                config.disturbance.w_hat,
                &x0,
                config.seed,
                &options,
            )
        })
        .collect()
}

/// The four artifacts the CLI can produce.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Artifact {
    Trajectory,
    Sweep,
    Diagnostics,
    Bounds,
}

impl Artifact {
    pub fn basename(self) -> &'static str {
        match self {
            Self::Trajectory => "trajectory",
            Self::Sweep => "sweep",
            Self::Diagnostics => "diagnostics",
            Self::Bounds => "bounds",
        }
    }
}

fn model_details(model: &SystemModel, riccati: &RiccatiData) -> serde_json::Value {
    json!({
        "state_dim": model.state_dim(),
        "input_dim": model.input_dim(),
        "gamma_hat": riccati.gamma_hat,
        "p_hat": riccati.p_hat,
        "assumption1_ok": riccati.assumption1_ok(),
    })
}

/// Runs `artifact` and writes `<dir>/<name>.csv` plus its metadata sidecar.
pub fn run_to_dir(artifact: Artifact, config: &ExperimentConfig, dir: &Path) -> Result<PathBuf> {
    config.validate()?;
    let name = artifact.basename();
    let mut csv = Vec::new();
    let mut details = json!({
        "value_law": config.value_law().name(),
        "probability_model": config.probability.kind,
        "w_hat": config.disturbance.w_hat,
        "x0": config.x0,
    });
    let extra = match artifact {
        Artifact::Trajectory => {
            let run = run_trajectory_experiment(config)?;
            write_trajectory_csv(&run, &mut csv)?;
            let model = config.system_model()?;
            let riccati = riccati_backward(&model)?;
            json!({
                "horizon": model.horizon,
                "placement": config.disturbance.placement,
                "times": run.scenario.times(),
                "values": run.scenario.values().iter().map(|v| v.as_slice().to_vec()).collect::<Vec<_>>(),
                "policies": run.rollouts.iter().map(|r| r.policy).collect::<Vec<_>>(),
                "total_costs": run.rollouts.iter().map(|r| (r.policy, r.total_cost)).collect::<BTreeMap<_, _>>(),
                "model": model_details(&model, &riccati),
            })
        }
        Artifact::Sweep => {
            write_sweep_csv(&run_sweep(config)?, &mut csv)?;
            json!({ "horizons": config.sweep.horizons, "budgets": config.sweep.budgets })
        }
        Artifact::Diagnostics => {
            let rows = run_convergence_diagnostics(config)?;
            write_diagnostics_csv(&rows, &mut csv)?;
            let crossings: BTreeMap<String, Option<usize>> = first_crossings(&rows, CROSSING_THRESHOLD)
                .into_iter()
                .map(|(k, t)| (k.to_string(), t))
                .collect();
            json!({
                "horizons": config.sweep.horizons,
                "budgets": config.sweep.budgets,
                "crossing_threshold": CROSSING_THRESHOLD,
                "first_crossing_horizon": crossings,
            })
        }
        Artifact::Bounds => {
            let runs = run_bound_verification(config)?;
            write_bounds_csv(&runs, &mut csv)?;
            let model = config.system_model()?;
            let riccati = riccati_backward(&model)?;
            json!({
                "trials": config.bounds.trials,
                "budgets": config.bounds.budgets,
                "override_assumption_check": config.bounds.override_assumption_check,
                "trial_seed": "seed + trial index",
                "model": model_details(&model, &riccati),
                "lambda_min_r": runs.first().map(|r| r.report.lambda_min_r),
                "norm_b": runs.first().map(|r| r.report.norm_b),
                "margin_bounds_available": riccati.assumption1_ok(),
            })
        }
    };
    if let (Some(d), Some(e)) = (details.as_object_mut(), extra.as_object()) {
        d.extend(e.clone());
    }
    write_artifact(dir, name, config, &csv, details)
}
