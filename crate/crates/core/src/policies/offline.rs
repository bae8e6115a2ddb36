use super::Policy;
use crate::disturbance::DisturbanceScenario;
use crate::error::{Error, Result};
use crate::linalg::{quad_form, Vector};
use crate::lqr::RiccatiData;

/// Linear and constant parts of the clairvoyant cost-to-go
/// `V_t(x) = xᵀP_t x + v_tᵀx + q_t`, indexed `t = 0..=T`.
#[derive(Debug, Clone, PartialEq)]
pub struct OfflineAuxiliary {
    pub v: Vec<Vector>,
    pub q: Vec<f64>,
}

fn check_scenario(scenario: &DisturbanceScenario, riccati: &RiccatiData) -> Result<()> {
    let model = riccati.model();
    if scenario.horizon() != model.horizon {
        return Err(Error::InvalidScenario(format!(
            "scenario horizon {} does not match model horizon {}",
            scenario.horizon(),
            model.horizon
        )));
    }
    if scenario.dim() != model.state_dim() {
        return Err(Error::InvalidScenario(format!(
            "scenario dimension {} does not match state dimension {}",
            scenario.dim(),
            model.state_dim()
        )));
    }
    Ok(())
}

/// Backward recurrences, with `M_t = P_{t+1}⁻¹ S_t` and `v_T = 0, q_T = 0`:
///
/// ```text
/// v_t = 2 AᵀS_t d_t + Aᵀ M_tᵀ v_{t+1}
/// q_t = q_{t+1} + d_tᵀS_t d_t + v_{t+1}ᵀ M_t d_t − ¼ v_{t+1}ᵀ F_t v_{t+1}
/// ```
///
/// The constant term uses `S_t` (not `S_{t+1}`): that is the placement for
/// which the realized closed-loop cost equals `V_0(x_0)`, and `S_T` does not
/// exist. `M_t` is only needed once `v_{t+1} ≠ 0`.
pub fn offline_precompute(scenario: &DisturbanceScenario, riccati: &RiccatiData) -> Result<OfflineAuxiliary> {
    check_scenario(scenario, riccati)?;
    let model = riccati.model();
    let horizon = model.horizon;
    let n = model.state_dim();
    let at = model.a.transpose();

    let mut v = vec![Vector::zeros(n); horizon + 1];
    let mut q = vec![0.0; horizon + 1];
    for t in (0..horizon).rev() {
        let s_t = &riccati.s[t];
        let v_next = &v[t + 1];
        let mut v_t = Vector::zeros(n);
        let mut q_t = q[t + 1];
        if let Some(d) = scenario.disturbance_at(t) {
            v_t += (&at * (s_t * d)) * 2.0;
            q_t += quad_form(s_t, d);
        }
        if v_next.iter().any(|&x| x != 0.0) {
            let transfer = riccati.transfer(t)?;
            v_t += &at * (transfer.transpose() * v_next);
            if let Some(d) = scenario.disturbance_at(t) {
                q_t += v_next.dot(&(transfer * d));
            }
            q_t -= 0.25 * quad_form(&riccati.f[t], v_next);
        }
        v[t] = v_t;
        q[t] = q_t;
    }
    Ok(OfflineAuxiliary { v, q })
}

/// `u_t = −K_t x − (BᵀP_{t+1}B + R)⁻¹Bᵀ(P_{t+1} d_t + ½ v_{t+1})`.
pub fn offline_action(
    t: usize,
    x: &Vector,
    aux: &OfflineAuxiliary,
    scenario: &DisturbanceScenario,
    riccati: &RiccatiData,
) -> Vector {
    offline_action_with(t, x, aux, scenario.disturbance_at(t), riccati)
}

fn offline_action_with(
    t: usize,
    x: &Vector,
    aux: &OfflineAuxiliary,
    d: Option<&Vector>,
    riccati: &RiccatiData,
) -> Vector {
    let mut drive = &aux.v[t + 1] * 0.5;
    if let Some(d) = d {
        drive += &riccati.p[t + 1] * d;
    }
    -(&riccati.k[t] * x) - &riccati.feedforward[t] * drive
}

pub fn offline_cost_to_go(t: usize, x: &Vector, aux: &OfflineAuxiliary, riccati: &RiccatiData) -> f64 {
    quad_form(&riccati.p[t], x) + aux.v[t].dot(x) + aux.q[t]
}

/// Clairvoyant controller bound to one scenario.
#[derive(Debug, Clone)]
pub struct OfflinePolicy<'a> {
    riccati: &'a RiccatiData,
    scenario: DisturbanceScenario,
    aux: OfflineAuxiliary,
}

impl<'a> OfflinePolicy<'a> {
    pub fn new(scenario: &DisturbanceScenario, riccati: &'a RiccatiData) -> Result<Self> {
        let aux = offline_precompute(scenario, riccati)?;
        Ok(Self {
            riccati,
            scenario: scenario.clone(),
            aux,
        })
    }

    pub fn auxiliary(&self) -> &OfflineAuxiliary {
        &self.aux
    }

    pub fn cost_to_go(&self, t: usize, x: &Vector) -> f64 {
        offline_cost_to_go(t, x, &self.aux, self.riccati)
    }
}

impl Policy for OfflinePolicy<'_> {
    fn label(&self) -> &'static str {
        "offline"
    }

    fn action(&self, t: usize, x: &Vector, _k_remaining: usize) -> Result<Vector> {
        Ok(offline_action(t, x, &self.aux, &self.scenario, self.riccati))
    }
}
