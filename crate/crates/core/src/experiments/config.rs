use std::fs;
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::disturbance::{sample_scenario, sphere_point, DisturbanceScenario, ProbabilityModel, ValueLaw};
use crate::error::{Error, Result};
use crate::linalg::{Matrix, Vector};
use crate::lqr::{validate_model, SystemModel};

/// Everything one run needs. Serialized as TOML.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub seed: u64,
    pub x0: Vec<f64>,
    pub model: ModelConfig,
    #[serde(default)]
    pub disturbance: DisturbanceConfig,
    #[serde(default)]
    pub probability: ProbabilityConfig,
    #[serde(default)]
    pub sweep: SweepConfig,
    #[serde(default)]
    pub bounds: BoundsConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    pub horizon: usize,
    pub a: Vec<Vec<f64>>,
    pub b: Vec<Vec<f64>>,
    pub q: Vec<Vec<f64>>,
    pub q_terminal: Vec<Vec<f64>>,
    pub r: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LawKind {
    SphereSurface,
    FixedList,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Placement {
    /// A uniformly random subset of the horizon.
    UniformRandom,
    /// `t_i = (i + 1)·T / (count + 1)`; a single disturbance lands at `T/2`.
    EvenlySpaced,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DisturbanceConfig {
    pub w_hat: f64,
    pub count: usize,
    pub law: LawKind,
    pub placement: Placement,
    /// Coordinates the sphere law acts on; all when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub support: Option<Vec<usize>>,
    /// Explicit chronological times; overrides `placement` and `count`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub times: Option<Vec<usize>>,
    /// Values for the `fixed_list` law, chronological.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub values: Option<Vec<Vec<f64>>>,
}

impl Default for DisturbanceConfig {
    fn default() -> Self {
        Self {
            w_hat: 0.3,
            count: 1,
            law: LawKind::SphereSurface,
            placement: Placement::UniformRandom,
            support: None,
            times: None,
            values: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProbabilityKind {
    UniformConditional,
    Zero,
    /// Certain at the scenario's true times (trajectory runs only).
    Certain,
    Table,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProbabilityConfig {
    pub kind: ProbabilityKind,
    /// `table[t][k]` for the `table` kind.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub table: Option<Vec<Vec<f64>>>,
}

impl Default for ProbabilityConfig {
    fn default() -> Self {
        Self {
            kind: ProbabilityKind::UniformConditional,
            table: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub horizons: Vec<usize>,
    pub budgets: Vec<usize>,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            horizons: (1..=20).map(|i| i * 200).collect(),
            budgets: (1..=10).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundsConfig {
    pub trials: usize,
    pub budgets: Vec<usize>,
    #[serde(default)]
    pub override_assumption_check: bool,
}

impl Default for BoundsConfig {
    fn default() -> Self {
        Self {
            trials: 500,
            budgets: vec![1, 2, 4],
            override_assumption_check: false,
        }
    }
}

fn matrix(name: &'static str, rows: &[Vec<f64>]) -> Result<Matrix> {
    let nrows = rows.len();
    let ncols = rows.first().map_or(0, Vec::len);
    if let Some(bad) = rows.iter().find(|r| r.len() != ncols) {
        return Err(Error::Config(format!(
            "matrix {name} is ragged: row of length {} in a {ncols}-column matrix",
            bad.len()
        )));
    }
    Ok(Matrix::from_row_iterator(nrows, ncols, rows.iter().flatten().copied()))
}

fn rows(m: &Matrix) -> Vec<Vec<f64>> {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

impl ModelConfig {
    pub fn from_model(model: &SystemModel) -> Self {
        Self {
            horizon: model.horizon,
            a: rows(&model.a),
            b: rows(&model.b),
            q: rows(&model.q),
            q_terminal: rows(&model.q_terminal),
            r: rows(&model.r),
        }
    }
}

/// The planar double integrator `x = [y, ẏ, z, ż]` with `Δt = 0.005`.
pub fn paper_model(horizon: usize) -> SystemModel {
    let dt = 0.005;
    let mut a = Matrix::identity(4, 4);
    a[(0, 1)] = dt;
    a[(2, 3)] = dt;
    let mut b = Matrix::zeros(4, 2);
    b[(1, 0)] = dt;
    b[(3, 1)] = dt;
    let q = Matrix::from_diagonal(&Vector::from_vec(vec![2.0, 1e-3, 1.0, 1e-3]));
    let r = Matrix::from_diagonal(&Vector::from_vec(vec![1e-2, 1e-2]));
    SystemModel::new(a, b, q.clone(), q, r, horizon)
}

/// Double-integrator study defaults: `T = 1000`, one disturbance at `T/2`
/// drawn from the radius-0.3 sphere over the position coordinates, uniform
/// conditional occurrence model, `x0 = [1, 0, 1, 0]`.
pub fn builtin_paper_config() -> ExperimentConfig {
    ExperimentConfig {
        seed: 0,
        x0: vec![1.0, 0.0, 1.0, 0.0],
        model: ModelConfig::from_model(&paper_model(1000)),
        disturbance: DisturbanceConfig {
            w_hat: 0.3,
            count: 1,
            law: LawKind::SphereSurface,
            placement: Placement::EvenlySpaced,
            support: Some(vec![0, 2]),
            times: None,
            values: None,
        },
        probability: ProbabilityConfig::default(),
        sweep: SweepConfig::default(),
        bounds: BoundsConfig::default(),
    }
}

pub fn builtin_paper_model() -> (SystemModel, ExperimentConfig) {
    let config = builtin_paper_config();
    let model = config.system_model().expect("builtin model is valid");
    (model, config)
}

impl ExperimentConfig {
    pub fn from_toml_str(s: &str) -> Result<Self> {
        let config: Self = toml::from_str(s)?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_toml_str(&fs::read_to_string(path)?)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        Ok(toml::to_string(self)?)
    }

    /// SHA-256 of the canonical TOML serialization.
    pub fn config_hash(&self) -> Result<String> {
        let text = self.to_toml_string()?;
        Ok(hex::encode(Sha256::digest(text.as_bytes())))
    }

    pub fn validate(&self) -> Result<()> {
        let model = self.system_model()?;
        if self.x0.len() != model.state_dim() {
            return Err(Error::Config(format!(
                "x0 has {} entries, state dimension is {}",
                self.x0.len(),
                model.state_dim()
            )));
        }
        if self.sweep.horizons.is_empty() || self.sweep.budgets.is_empty() {
            return Err(Error::Config("sweep ranges must be nonempty".into()));
        }
        if self.bounds.budgets.is_empty() {
            return Err(Error::Config("bounds.budgets must be nonempty".into()));
        }
        if !(self.disturbance.w_hat >= 0.0) {
            return Err(Error::Config("disturbance.w_hat must be >= 0".into()));
        }
        if self.disturbance.law == LawKind::FixedList && self.disturbance.values.is_none() {
            return Err(Error::Config("fixed_list law needs disturbance.values".into()));
        }
        if self.probability.kind == ProbabilityKind::Table && self.probability.table.is_none() {
            return Err(Error::Config("table probability kind needs probability.table".into()));
        }
        Ok(())
    }

    pub fn system_model(&self) -> Result<SystemModel> {
        let m = &self.model;
        validate_model(SystemModel::new(
            matrix("a", &m.a)?,
            matrix("b", &m.b)?,
            matrix("q", &m.q)?,
            matrix("q_terminal", &m.q_terminal)?,
            matrix("r", &m.r)?,
            m.horizon,
        ))
    }

    pub fn x0_vector(&self) -> Vector {
        Vector::from_vec(self.x0.clone())
    }

    fn fixed_values(&self) -> Option<Vec<Vector>> {
        self.disturbance
            .values
            .as_ref()
            .map(|vs| vs.iter().cloned().map(Vector::from_vec).collect())
    }

    /// Value law used for Monte Carlo sampling. The fixed list is only
    /// usable when its length matches the sampled count.
    pub fn value_law(&self) -> ValueLaw {
        match self.disturbance.law {
            LawKind::SphereSurface => ValueLaw::SphereSurface {
                support: self.disturbance.support.clone(),
            },
            LawKind::FixedList => ValueLaw::FixedList(self.fixed_values().unwrap_or_default()),
        }
    }

    /// `count` chronological disturbance values, independent of placement.
    pub fn disturbance_values(&self, count: usize, dim: usize) -> Result<Vec<Vector>> {
        match self.disturbance.law {
            LawKind::FixedList => {
                let values = self.fixed_values().unwrap_or_default();
                if values.len() < count {
                    return Err(Error::Config(format!(
                        "fixed_list has {} values, {count} needed",
                        values.len()
                    )));
                }
                Ok(values.into_iter().take(count).collect())
            }
            LawKind::SphereSurface => {
                let coords: Vec<usize> = self.disturbance.support.clone().unwrap_or_else(|| (0..dim).collect());
                if coords.is_empty() || coords.iter().any(|&c| c >= dim) {
                    return Err(Error::Config(format!("support {coords:?} invalid for dimension {dim}")));
                }
                let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
                Ok((0..count)
                    .map(|_| sphere_point(&mut rng, dim, &coords, self.disturbance.w_hat))
                    .collect())
            }
        }
    }

    /// The scenario used by single-scenario runs (trajectory).
    pub fn scenario(&self, model: &SystemModel) -> Result<DisturbanceScenario> {
        let horizon = model.horizon;
        let dim = model.state_dim();
        let d = &self.disturbance;
        let times = match (&d.times, d.placement) {
            (Some(times), _) => times.clone(),
            (None, Placement::EvenlySpaced) => {
                if d.count > horizon {
                    return Err(Error::Config(format!("{} disturbances exceed horizon {horizon}", d.count)));
                }
                (0..d.count).map(|i| (i + 1) * horizon / (d.count + 1)).collect()
            }
            (None, Placement::UniformRandom) => {
                return sample_scenario(self.seed, d.count, model, d.w_hat, &self.value_law());
            }
        };
        let values = self.disturbance_values(times.len(), dim)?;
        DisturbanceScenario::new(horizon, dim, times, values, d.w_hat)
    }

    /// Occurrence model; `scenario` is needed for the `certain` kind.
    pub fn probability_model(&self, scenario: Option<&DisturbanceScenario>, horizon: usize, max_k: usize) -> Result<ProbabilityModel> {
        match self.probability.kind {
            ProbabilityKind::UniformConditional => Ok(ProbabilityModel::UniformConditional),
            ProbabilityKind::Zero => Ok(ProbabilityModel::zero(horizon, max_k)),
            ProbabilityKind::Certain => scenario
                .map(ProbabilityModel::certain)
                .ok_or_else(|| Error::Config("certain probability model needs a concrete scenario".into())),
            ProbabilityKind::Table => {
                let table = self.probability.table.clone().unwrap_or_default();
                if table.len() != horizon {
                    return Err(Error::Config(format!(
                        "probability table has {} rows for horizon {horizon}",
                        table.len()
                    )));
                }
                ProbabilityModel::table(table)
            }
        }
    }
}
