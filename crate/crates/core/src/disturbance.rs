//! Sparse disturbance scenarios, occurrence-probability models and seeded
//! scenario sampling.
//!
//! Scenarios are stored in chronological order. The disturbance-aware policy
//! works with the number of disturbances *remaining*, so
//! [`DisturbanceScenario::values_by_remaining`] provides the reverse view:
//! entry `k` is the value that arrives next when `k` disturbances remain.
//!
//! Sampling uses `ChaCha8` seeded through `SeedableRng::seed_from_u64`:
//! occurrence times are a uniform random subset of `[0, T)` drawn with
//! `rand::seq::index::sample` and then sorted, and sphere values are
//! normalized standard-normal draws on the supported coordinates.

use std::fs;
use std::path::Path;

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::Vector;
use crate::lqr::SystemModel;

/// Relative slack on `‖w‖ ≤ ŵ` to absorb rounding of normalized samples.
const NORM_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct DisturbanceScenario {
    horizon: usize,
    dim: usize,
    times: Vec<usize>,
    values: Vec<Vector>,
    w_hat: f64,
}

impl DisturbanceScenario {
    pub fn new(
        horizon: usize,
        dim: usize,
        times: Vec<usize>,
        values: Vec<Vector>,
        w_hat: f64,
    ) -> Result<Self> {
        if times.len() != values.len() {
            return Err(Error::InvalidScenario(format!(
                "{} times but {} values",
                times.len(),
                values.len()
            )));
        }
        if !(w_hat >= 0.0) || !w_hat.is_finite() {
            return Err(Error::InvalidScenario(format!("w_hat must be finite and >= 0, got {w_hat}")));
        }
        if let Some(w) = times.windows(2).find(|w| w[0] >= w[1]) {
            return Err(Error::InvalidScenario(format!(
                "times must be strictly increasing ({} then {})",
                w[0], w[1]
            )));
        }
        if let Some(&t) = times.iter().find(|&&t| t >= horizon) {
            return Err(Error::InvalidScenario(format!("time {t} outside [0, {horizon})")));
        }
        for (i, w) in values.iter().enumerate() {
            if w.len() != dim {
                return Err(Error::InvalidScenario(format!(
                    "value {i} has dimension {}, expected {dim}",
                    w.len()
                )));
            }
            if w.norm() > w_hat * (1.0 + NORM_SLACK) {
                return Err(Error::InvalidScenario(format!(
                    "value {i} has norm {} > w_hat {w_hat}",
                    w.norm()
                )));
            }
        }
        Ok(Self {
            horizon,
            dim,
            times,
            values,
            w_hat,
        })
    }

    pub fn empty(horizon: usize, dim: usize) -> Self {
        Self {
            horizon,
            dim,
            times: Vec::new(),
            values: Vec::new(),
            w_hat: 0.0,
        }
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn times(&self) -> &[usize] {
        &self.times
    }

    pub fn values(&self) -> &[Vector] {
        &self.values
    }

    pub fn w_hat(&self) -> f64 {
        self.w_hat
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// `d_t`, if a disturbance occurs at `t`.
    pub fn disturbance_at(&self, t: usize) -> Option<&Vector> {
        self.times.binary_search(&t).ok().map(|i| &self.values[i])
    }

    /// Dense `d_0 .. d_{T-1}` with zeros off the support.
    pub fn dense(&self) -> Vec<Vector> {
        let mut d = vec![Vector::zeros(self.dim); self.horizon];
        for (&t, w) in self.times.iter().zip(&self.values) {
            d[t] = w.clone();
        }
        d
    }

    /// Reverse-chronological view, length `|D| + 1`. Entry `k ≥ 1` is the
    /// disturbance that occurs next when `k` remain; entry 0 is zero.
    pub fn values_by_remaining(&self) -> Vec<Vector> {
        let mut out = Vec::with_capacity(self.len() + 1);
        out.push(Vector::zeros(self.dim));
        out.extend(self.values.iter().rev().cloned());
        out
    }

    /// Same occurrence times, different horizon. Errors if a time falls outside.
    pub fn with_horizon(&self, horizon: usize) -> Result<Self> {
        Self::new(horizon, self.dim, self.times.clone(), self.values.clone(), self.w_hat)
    }

    pub fn to_file(&self) -> ScenarioFile {
        ScenarioFile {
            horizon: self.horizon,
            dim: self.dim,
            w_hat: self.w_hat,
            times: self.times.clone(),
            values: self.values.iter().map(|v| v.iter().copied().collect()).collect(),
        }
    }

    pub fn to_toml_string(&self) -> Result<String> {
        Ok(toml::to_string(&self.to_file())?)
    }

    pub fn from_toml_str(s: &str) -> Result<Self> {
        let file: ScenarioFile = toml::from_str(s)?;
        file.into_scenario()
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        fs::write(path, self.to_toml_string()?)?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_toml_str(&fs::read_to_string(path)?)
    }
}

/// On-disk scenario document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioFile {
    pub horizon: usize,
    pub dim: usize,
    pub w_hat: f64,
    pub times: Vec<usize>,
    pub values: Vec<Vec<f64>>,
}

impl ScenarioFile {
    pub fn into_scenario(self) -> Result<DisturbanceScenario> {
        let values = self.values.into_iter().map(Vector::from_vec).collect();
        DisturbanceScenario::new(self.horizon, self.dim, self.times, values, self.w_hat)
    }
}

/// Number of disturbances at time `t` or later.
pub fn remaining_count(scenario: &DisturbanceScenario, t: usize) -> usize {
    scenario.times.len() - scenario.times.partition_point(|&s| s < t)
}

/// `min(1, k / (T − t))`.
pub fn uniform_conditional(t: usize, k: usize, horizon: usize) -> Result<f64> {
    if t >= horizon {
        return Err(Error::OutOfRange {
            what: "time step",
            value: t,
            allowed: format!("[0, {horizon})"),
        });
    }
    Ok((k as f64 / (horizon - t) as f64).min(1.0))
}

/// Probability `p_t^k` that a disturbance occurs at `t` given `k` remain.
#[derive(Debug, Clone, PartialEq)]
pub enum ProbabilityModel {
    UniformConditional,
    /// `grid[t][k]` for `t ∈ [0, T)`, `k ∈ [0, max_k]`.
    Table(Vec<Vec<f64>>),
}

impl ProbabilityModel {
    pub fn table(grid: Vec<Vec<f64>>) -> Result<Self> {
        for (t, row) in grid.iter().enumerate() {
            if row.is_empty() {
                return Err(Error::InvalidProbability(format!("row {t} is empty")));
            }
            if row[0] != 0.0 {
                return Err(Error::InvalidProbability(format!(
                    "p[{t}][0] = {} but must be 0",
                    row[0]
                )));
            }
            if let Some((k, p)) = row.iter().enumerate().find(|(_, p)| !(0.0..=1.0).contains(*p)) {
                return Err(Error::InvalidProbability(format!("p[{t}][{k}] = {p} outside [0, 1]")));
            }
        }
        Ok(Self::Table(grid))
    }

    /// `p ≡ 0`.
    pub fn zero(horizon: usize, max_k: usize) -> Self {
        Self::Table(vec![vec![0.0; max_k + 1]; horizon])
    }

    /// Occurrence is certain exactly at the scenario's times (with the
    /// matching remaining count) and impossible elsewhere.
    pub fn certain(scenario: &DisturbanceScenario) -> Self {
        let n = scenario.len();
        let mut grid = vec![vec![0.0; n + 1]; scenario.horizon()];
        for (i, &t) in scenario.times().iter().enumerate() {
            grid[t][n - i] = 1.0;
        }
        Self::Table(grid)
    }

    pub fn prob(&self, t: usize, k: usize, horizon: usize) -> Result<f64> {
        if t >= horizon {
            return Err(Error::OutOfRange {
                what: "time step",
                value: t,
                allowed: format!("[0, {horizon})"),
            });
        }
        if k == 0 {
            return Ok(0.0);
        }
        match self {
            Self::UniformConditional => uniform_conditional(t, k, horizon),
            Self::Table(grid) => {
                let row = grid.get(t).ok_or_else(|| Error::OutOfRange {
                    what: "time step",
                    value: t,
                    allowed: format!("[0, {})", grid.len()),
                })?;
                row.get(k).copied().ok_or_else(|| Error::OutOfRange {
                    what: "remaining count",
                    value: k,
                    allowed: format!("[0, {}]", row.len().saturating_sub(1)),
                })
            }
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::UniformConditional => "uniform_conditional",
            Self::Table(_) => "table",
        }
    }
}

/// How disturbance values are produced when sampling.
#[derive(Debug, Clone, PartialEq)]
pub enum ValueLaw {
    /// Uniform on the radius-`ŵ` sphere over `support` coordinates (all
    /// coordinates when `None`), zero elsewhere.
    SphereSurface { support: Option<Vec<usize>> },
    /// Values supplied verbatim, chronologically.
    FixedList(Vec<Vector>),
}

impl ValueLaw {
    pub fn name(&self) -> &'static str {
        match self {
            Self::SphereSurface { .. } => "sphere_surface",
            Self::FixedList(_) => "fixed_list",
        }
    }
}

pub fn sample_scenario(
    rng_seed: u64,
    count: usize,
    model: &SystemModel,
    w_hat: f64,
    value_law: &ValueLaw,
) -> Result<DisturbanceScenario> {
    let horizon = model.horizon;
    if count > horizon {
        return Err(Error::OutOfRange {
            what: "disturbance count",
            value: count,
            allowed: format!("[0, {horizon}]"),
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let mut times = index::sample(&mut rng, horizon, count).into_vec();
    times.sort_unstable();
    let n = model.state_dim();
    let values = match value_law {
        ValueLaw::SphereSurface { support } => {
            let coords: Vec<usize> = match support {
                Some(s) => s.clone(),
                None => (0..n).collect(),
            };
            if coords.is_empty() || coords.iter().any(|&c| c >= n) {
                return Err(Error::InvalidArgument(format!(
                    "sphere support {coords:?} invalid for state dimension {n}"
                )));
            }
            (0..count)
                .map(|_| sphere_point(&mut rng, n, &coords, w_hat))
                .collect()
        }
        ValueLaw::FixedList(list) => {
            if list.len() != count {
                return Err(Error::InvalidScenario(format!(
                    "fixed_list has {} values for count {count}",
                    list.len()
                )));
            }
            list.clone()
        }
    };
    DisturbanceScenario::new(horizon, n, times, values, w_hat)
}

/// One point uniformly distributed on the sphere of radius `radius` spanned
/// by `coords`.
pub fn sphere_point<R: Rng + ?Sized>(rng: &mut R, dim: usize, coords: &[usize], radius: f64) -> Vector {
    loop {
        let mut v = Vector::zeros(dim);
        for &c in coords {
            v[c] = rng.sample(StandardNormal);
        }
        let norm = v.norm();
        if norm > 0.0 {
            return v * (radius / norm);
        }
    }
}
