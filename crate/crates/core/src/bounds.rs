//! Closed-form regret and cost-difference bounds for the blind policy, and a
//! Monte Carlo harness that checks them against realized costs.
//!
//! Three bounds are provided, all horizon independent:
//!
//! * [`theorem4_bound`]: blind with disturbances vs blind without.
//! * [`theorem5_bound`]: blind without disturbances vs offline with them.
//!   Needs a positive stability margin.
//! * [`theorem3_bound`]: blind vs offline (the regret), the sum of the two.

use rayon::prelude::*;

use crate::disturbance::{sample_scenario, ValueLaw};
use crate::error::{Error, Result};
use crate::linalg::{min_eigenvalue, spectral_norm, Vector};
use crate::lqr::{RiccatiData, SystemModel};
use crate::simulator::empirical_regret;

fn check_common(w_hat: f64, x0_norm: f64, p_hat: f64) -> Result<()> {
    if !(w_hat >= 0.0) || !(x0_norm >= 0.0) {
        return Err(Error::InvalidArgument(format!(
            "bound inputs must be nonnegative (w_hat={w_hat}, |x0|={x0_norm})"
        )));
    }
    if !(p_hat >= 1.0) {
        return Err(Error::InvalidArgument(format!("p_hat must be >= 1, got {p_hat}")));
    }
    Ok(())
}

fn check_margin(gamma: f64, norm_b: f64, lambda_min_r: f64) -> Result<()> {
    if !(gamma > 0.0) {
        return Err(Error::AssumptionViolated { gamma_hat: gamma });
    }
    if !(norm_b >= 0.0) || !(lambda_min_r > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "need ‖B‖ >= 0 and λ_min(R) > 0 (got {norm_b}, {lambda_min_r})"
        )));
    }
    Ok(())
}

/// `2·D·ŵ·P̂·(‖x0‖ + ŵ + D·ŵ·P̂)`
pub fn theorem4_bound(d: usize, w_hat: f64, x0_norm: f64, p_hat: f64) -> Result<f64> {
    check_common(w_hat, x0_norm, p_hat)?;
    let d = d as f64;
    Ok(2.0 * d * w_hat * p_hat * (x0_norm + w_hat + d * w_hat * p_hat))
}

/// `2‖x0‖·D·P̂·ŵ + D²·ŵ·P̂·(3ŵ + (3P̂ŵ + γ⁻²)‖B‖²/λ_min(R))`
pub fn theorem5_bound(
    d: usize,
    w_hat: f64,
    x0_norm: f64,
    p_hat: f64,
    gamma: f64,
    norm_b: f64,
    lambda_min_r: f64,
) -> Result<f64> {
    check_common(w_hat, x0_norm, p_hat)?;
    check_margin(gamma, norm_b, lambda_min_r)?;
    let d = d as f64;
    let input = (3.0 * p_hat * w_hat + gamma.powi(-2)) * norm_b * norm_b / lambda_min_r;
    Ok(2.0 * x0_norm * d * p_hat * w_hat + d * d * w_hat * p_hat * (3.0 * w_hat + input))
}

/// ```text
/// 2Dŵ P̂(2‖x0‖ + ŵ) + D²ŵ²(2P̂² + 3P̂) + D²ŵP̂(3P̂ŵ + γ⁻²)‖B‖²/λ_min(R)
/// ```
pub fn theorem3_bound(
    d: usize,
    w_hat: f64,
    x0_norm: f64,
    p_hat: f64,
    gamma: f64,
    norm_b: f64,
    lambda_min_r: f64,
) -> Result<f64> {
    check_common(w_hat, x0_norm, p_hat)?;
    check_margin(gamma, norm_b, lambda_min_r)?;
    let d = d as f64;
    let linear = 2.0 * d * w_hat * p_hat * (2.0 * x0_norm + w_hat);
    let quadratic = d * d * w_hat * w_hat * (2.0 * p_hat * p_hat + 3.0 * p_hat);
    let input = d * d * w_hat * p_hat * (3.0 * p_hat * w_hat + gamma.powi(-2)) * norm_b * norm_b / lambda_min_r;
    Ok(linear + quadratic + input)
}

/// Constants and bound values for one `(model, x0, D, ŵ)` configuration.
/// `thm3`/`thm5` are `None` when the stability margin is not positive.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundReport {
    pub p_hat: f64,
    pub gamma_hat: f64,
    pub lambda_min_r: f64,
    pub norm_b: f64,
    pub norm_x0: f64,
    pub d_count: usize,
    pub w_hat: f64,
    pub thm3: Option<f64>,
    pub thm4: f64,
    pub thm5: Option<f64>,
    pub assumption1_ok: bool,
    /// Steps whose closed-loop spectral norm is at least 1.
    pub assumption1_violations: usize,
}

impl BoundReport {
    pub fn new(riccati: &RiccatiData, x0: &Vector, d_count: usize, w_hat: f64) -> Result<Self> {
        let model = riccati.model();
        let p_hat = riccati.p_hat;
        let gamma_hat = riccati.gamma_hat;
        let lambda_min_r = min_eigenvalue(&model.r);
        let norm_b = spectral_norm(&model.b);
        let norm_x0 = x0.norm();
        let assumption1_ok = riccati.assumption1_ok();
        let thm4 = theorem4_bound(d_count, w_hat, norm_x0, p_hat)?;
        let (thm3, thm5) = if assumption1_ok {
            (
                Some(theorem3_bound(d_count, w_hat, norm_x0, p_hat, gamma_hat, norm_b, lambda_min_r)?),
                Some(theorem5_bound(d_count, w_hat, norm_x0, p_hat, gamma_hat, norm_b, lambda_min_r)?),
            )
        } else {
            (None, None)
        };
        Ok(Self {
            p_hat,
            gamma_hat,
            lambda_min_r,
            norm_b,
            norm_x0,
            d_count,
            w_hat,
            thm3,
            thm4,
            thm5,
            assumption1_ok,
            assumption1_violations: riccati.assumption1_violations(),
        })
    }
}

/// `empirical / bound`, with `0/0` reported as 0 and flagged.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ratio {
    pub value: f64,
    pub zero_over_zero: bool,
}

impl Ratio {
    pub fn of(empirical: f64, bound: f64) -> Self {
        if bound == 0.0 && empirical == 0.0 {
            Self {
                value: 0.0,
                zero_over_zero: true,
            }
        } else {
            Self {
                value: empirical / bound,
                zero_over_zero: false,
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialRecord {
    pub trial: usize,
    pub d_count: usize,
    pub w_hat: f64,
    /// `|J^w − V^w|`
    pub emp_blind_vs_offline: f64,
    /// `|J^w − J|`
    pub emp_blind_vs_nominal: f64,
    /// `|J − V^w|`
    pub emp_nominal_vs_offline: f64,
    pub ratio3: Option<Ratio>,
    pub ratio4: Ratio,
    pub ratio5: Option<Ratio>,
}

impl TrialRecord {
    pub fn zero_over_zero(&self) -> bool {
        self.ratio4.zero_over_zero
            || self.ratio3.is_some_and(|r| r.zero_over_zero)
            || self.ratio5.is_some_and(|r| r.zero_over_zero)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundVerification {
    pub report: BoundReport,
    pub trials: Vec<TrialRecord>,
}

fn max_of<'a>(it: impl Iterator<Item = &'a f64>) -> f64 {
    it.copied().fold(0.0, f64::max)
}

impl BoundVerification {
    pub fn max_ratio3(&self) -> Option<f64> {
        self.report.thm3?;
        Some(max_of(self.trials.iter().filter_map(|t| t.ratio3.as_ref()).map(|r| &r.value)))
    }

    pub fn max_ratio4(&self) -> f64 {
        max_of(self.trials.iter().map(|t| &t.ratio4.value))
    }

    pub fn max_ratio5(&self) -> Option<f64> {
        self.report.thm5?;
        Some(max_of(self.trials.iter().filter_map(|t| t.ratio5.as_ref()).map(|r| &r.value)))
    }

    pub fn max_blind_vs_offline(&self) -> f64 {
        max_of(self.trials.iter().map(|t| &t.emp_blind_vs_offline))
    }

    pub fn max_blind_vs_nominal(&self) -> f64 {
        max_of(self.trials.iter().map(|t| &t.emp_blind_vs_nominal))
    }

    pub fn max_nominal_vs_offline(&self) -> f64 {
        max_of(self.trials.iter().map(|t| &t.emp_nominal_vs_offline))
    }

    pub fn any_zero_over_zero(&self) -> bool {
        self.trials.iter().any(TrialRecord::zero_over_zero)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyOptions {
    pub value_law: ValueLaw,
    /// Run even when the stability margin is not positive. Only the
    /// margin-free bound is evaluated in that case.
    pub override_assumption_check: bool,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self {
            value_law: ValueLaw::SphereSurface { support: None },
            override_assumption_check: false,
        }
    }
}

/// Samples `trials` scenarios with `d_count` disturbances of norm `ŵ` and
/// compares realized cost gaps with the bounds. Trial `i` uses seed
/// `rng_seed + i`, so results do not depend on scheduling.
#[allow(clippy::too_many_arguments)]
pub fn verify_bounds(
    model: &SystemModel,
    riccati: &RiccatiData,
    trials: usize,
    d_count: usize,
    w_hat: f64,
    x0: &Vector,
    rng_seed: u64,
    options: &VerifyOptions,
) -> Result<BoundVerification> {
    let report = BoundReport::new(riccati, x0, d_count, w_hat)?;
    if !report.assumption1_ok && !options.override_assumption_check {
        return Err(Error::AssumptionViolated {
            gamma_hat: report.gamma_hat,
        });
    }
    let records = (0..trials)
        .into_par_iter()
        .map(|trial| {
            let seed = rng_seed.wrapping_add(trial as u64);
            let scenario = sample_scenario(seed, d_count, model, w_hat, &options.value_law)?;
            let sample = empirical_regret(&scenario, x0, model, riccati)?;
            let emp_blind_vs_offline = (sample.blind_disturbed - sample.offline_disturbed).abs();
            let emp_blind_vs_nominal = (sample.blind_disturbed - sample.blind_nominal).abs();
            let emp_nominal_vs_offline = (sample.blind_nominal - sample.offline_disturbed).abs();
            Ok(TrialRecord {
                trial,
                d_count,
                w_hat,
                emp_blind_vs_offline,
                emp_blind_vs_nominal,
                emp_nominal_vs_offline,
                ratio3: report.thm3.map(|b| Ratio::of(emp_blind_vs_offline, b)),
                ratio4: Ratio::of(emp_blind_vs_nominal, report.thm4),
                ratio5: report.thm5.map(|b| Ratio::of(emp_nominal_vs_offline, b)),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(BoundVerification {
        report,
        trials: records,
    })
}
