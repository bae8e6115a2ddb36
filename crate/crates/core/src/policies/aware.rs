use super::Policy;
use crate::disturbance::{DisturbanceScenario, ProbabilityModel};
use crate::error::{Error, Result};
use crate::linalg::{quad_form, Vector};
use crate::lqr::RiccatiData;

/// Two-dimensional cost-to-go tables over `(t, k)` where `k` is the number
/// of disturbances still to come.
///
/// `J_t^k(x) = xᵀP_t x + 2 (r_t^k)ᵀx + c_t^k`.
#[derive(Debug, Clone)]
pub struct DisturbanceAwareTables {
    horizon: usize,
    max_k: usize,
    /// `r[t * (max_k + 1) + k]`, `t = 0..=T`.
    r: Vec<Vector>,
    c: Vec<f64>,
    /// `p_t^k` as evaluated at precompute time, `t = 0..T`.
    p: Vec<f64>,
    w_by_k: Vec<Vector>,
}

impl DisturbanceAwareTables {
    fn idx(&self, t: usize, k: usize) -> usize {
        t * (self.max_k + 1) + k
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn max_k(&self) -> usize {
        self.max_k
    }

    pub fn r(&self, t: usize, k: usize) -> &Vector {
        &self.r[self.idx(t, k)]
    }

    pub fn c(&self, t: usize, k: usize) -> f64 {
        self.c[self.idx(t, k)]
    }

    pub fn prob(&self, t: usize, k: usize) -> f64 {
        self.p[self.idx(t, k)]
    }

    /// Disturbance that arrives next when `k` remain (`k ≥ 1`).
    pub fn w(&self, k: usize) -> &Vector {
        &self.w_by_k[k]
    }

    /// `r̃_{t+1}^k = (1 − p_t^k) r_{t+1}^k + p_t^k r_{t+1}^{k−1}`.
    pub fn r_tilde(&self, t: usize, k: usize) -> Vector {
        let p = self.prob(t, k);
        let next = self.r(t + 1, k);
        if k == 0 {
            return next.clone();
        }
        next * (1.0 - p) + self.r(t + 1, k - 1) * p
    }

    pub fn c_tilde(&self, t: usize, k: usize) -> f64 {
        let p = self.prob(t, k);
        let next = self.c(t + 1, k);
        if k == 0 {
            return next;
        }
        (1.0 - p) * next + p * self.c(t + 1, k - 1)
    }

    fn check_k(&self, k: usize) -> Result<()> {
        if k > self.max_k {
            return Err(Error::OutOfRange {
                what: "remaining count",
                value: k,
                allowed: format!("[0, {}]", self.max_k),
            });
        }
        Ok(())
    }

    /// `‖r_t^k‖` maximized over `t`.
    pub fn max_r_norm(&self, k: usize) -> f64 {
        (0..=self.horizon).map(|t| self.r(t, k).norm()).fold(0.0, f64::max)
    }
}

/// `h = r̃_{t+1}^k + p_t^k P_{t+1} w_k`, the linear term the control reacts to.
fn drive(t: usize, k: usize, tables: &DisturbanceAwareTables, riccati: &RiccatiData) -> Vector {
    let mut h = tables.r_tilde(t, k);
    let p = tables.prob(t, k);
    if k > 0 && p != 0.0 {
        h += (&riccati.p[t + 1] * tables.w(k)) * p;
    }
    h
}

/// Fills the `(t, k)` tables backward from `r_T^k = 0, c_T^k = 0`:
///
/// ```text
/// h       = r̃_{t+1}^k + p_t^k P_{t+1} w_k
/// r_t^k   = Aᵀ(I − F_t P_{t+1})ᵀ h
/// c_t^k   = c̃_{t+1}^k − hᵀF_t h + p_t^k w_kᵀP_{t+1}w_k + 2 p_t^k (r_{t+1}^{k−1})ᵀw_k
/// ```
///
/// The tilde mixes with `p_t^k`, the probability of a disturbance at the
/// current step, which is what expected-cost backward induction produces.
///
/// `values_by_k` has `max_k + 1` entries in reverse-chronological order (see
/// [`DisturbanceScenario::values_by_remaining`]); entry 0 is ignored.
pub fn da_precompute(
    values_by_k: &[Vector],
    prob: &ProbabilityModel,
    riccati: &RiccatiData,
    max_k: usize,
) -> Result<DisturbanceAwareTables> {
    let model = riccati.model();
    let horizon = model.horizon;
    let n = model.state_dim();
    if values_by_k.len() != max_k + 1 {
        return Err(Error::InvalidArgument(format!(
            "expected {} reverse-indexed values, got {}",
            max_k + 1,
            values_by_k.len()
        )));
    }
    if let Some(w) = values_by_k.iter().find(|w| w.len() != n) {
        return Err(Error::InvalidArgument(format!(
            "disturbance value of dimension {} for state dimension {n}",
            w.len()
        )));
    }

    let width = max_k + 1;
    let mut p = vec![0.0; horizon * width];
    for t in 0..horizon {
        for k in 0..=max_k {
            p[t * width + k] = prob.prob(t, k, horizon)?;
        }
    }
    let mut tables = DisturbanceAwareTables {
        horizon,
        max_k,
        r: vec![Vector::zeros(n); (horizon + 1) * width],
        c: vec![0.0; (horizon + 1) * width],
        p,
        w_by_k: values_by_k.to_vec(),
    };

    for t in (0..horizon).rev() {
        let p_next = &riccati.p[t + 1];
        let f_t = &riccati.f[t];
        // Aᵀ(I − F_t P_{t+1})ᵀ = (A − B K_t)ᵀ
        let cl_t = riccati.closed_loop[t].transpose();
        for k in 0..=max_k {
            let pk = tables.prob(t, k);
            let h = drive(t, k, &tables, riccati);
            let mut c = tables.c_tilde(t, k) - quad_form(f_t, &h);
            if k > 0 && pk != 0.0 {
                let w = tables.w(k);
                c += pk * quad_form(p_next, w) + 2.0 * pk * tables.r(t + 1, k - 1).dot(w);
            }
            let i = tables.idx(t, k);
            tables.r[i] = &cl_t * h;
            tables.c[i] = c;
        }
    }
    Ok(tables)
}

/// `u = −K_t x − (R + BᵀP_{t+1}B)⁻¹Bᵀ(p_t^k P_{t+1} w_k + r̃_{t+1}^k)`.
pub fn da_action(
    t: usize,
    x: &Vector,
    k_remaining: usize,
    tables: &DisturbanceAwareTables,
    riccati: &RiccatiData,
) -> Result<Vector> {
    tables.check_k(k_remaining)?;
    let h = drive(t, k_remaining, tables, riccati);
    Ok(-(&riccati.k[t] * x) - &riccati.feedforward[t] * h)
}

pub fn da_expected_cost(
    t: usize,
    x: &Vector,
    k: usize,
    tables: &DisturbanceAwareTables,
    riccati: &RiccatiData,
) -> Result<f64> {
    tables.check_k(k)?;
    Ok(quad_form(&riccati.p[t], x) + 2.0 * tables.r(t, k).dot(x) + tables.c(t, k))
}

#[derive(Debug, Clone)]
pub struct AwarePolicy<'a> {
    riccati: &'a RiccatiData,
    tables: DisturbanceAwareTables,
}

impl<'a> AwarePolicy<'a> {
    /// Tables for the scenario's disturbance values; the scenario's times
    /// are not looked at.
    pub fn new(scenario: &DisturbanceScenario, prob: &ProbabilityModel, riccati: &'a RiccatiData) -> Result<Self> {
        let tables = da_precompute(&scenario.values_by_remaining(), prob, riccati, scenario.len())?;
        Ok(Self { riccati, tables })
    }

    pub fn from_tables(tables: DisturbanceAwareTables, riccati: &'a RiccatiData) -> Self {
        Self { riccati, tables }
    }

    pub fn tables(&self) -> &DisturbanceAwareTables {
        &self.tables
    }

    pub fn expected_cost(&self, t: usize, x: &Vector, k: usize) -> Result<f64> {
        da_expected_cost(t, x, k, &self.tables, self.riccati)
    }
}

impl Policy for AwarePolicy<'_> {
    fn label(&self) -> &'static str {
        "disturbance_aware"
    }

    fn action(&self, t: usize, x: &Vector, k_remaining: usize) -> Result<Vector> {
        da_action(t, x, k_remaining, &self.tables, self.riccati)
    }
}
