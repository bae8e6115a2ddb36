use nalgebra::Cholesky;

use super::model::{validate_model_with, SystemModel, Tolerances};
use crate::error::{Error, Result};
use crate::linalg::{condition_number, min_eigenvalue, spectral_norm, symmetrize, Matrix};

/// Backward Riccati sequences for a finite horizon plus the per-step
/// matrices every policy needs.
///
/// Indexing: `p` has `T + 1` entries (`p[T] = Q_T`); every other sequence has
/// `T` entries and entry `t` is built from `P_{t+1}`.
#[derive(Debug, Clone)]
pub struct RiccatiData {
    model: SystemModel,
    pub p: Vec<Matrix>,
    /// `K_t = (BᵀP_{t+1}B + R)⁻¹BᵀP_{t+1}A`
    pub k: Vec<Matrix>,
    /// `S_t = P_{t+1} − P_{t+1}B(BᵀP_{t+1}B + R)⁻¹BᵀP_{t+1}`
    pub s: Vec<Matrix>,
    /// `F_t = B(R + BᵀP_{t+1}B)⁻¹Bᵀ`
    pub f: Vec<Matrix>,
    /// `(BᵀP_{t+1}B + R)⁻¹Bᵀ`, the map from a linear cost term to the control offset.
    pub feedforward: Vec<Matrix>,
    /// `A − B K_t`
    pub closed_loop: Vec<Matrix>,
    /// Spectral norm of `closed_loop[t]`.
    pub closed_loop_norms: Vec<f64>,
    /// `P_{t+1}⁻¹ S_t`, absent where `P_{t+1}` is not positive definite.
    transfer: Vec<Option<Matrix>>,
    pub gamma_hat: f64,
    pub p_hat: f64,
}

impl RiccatiData {
    pub fn model(&self) -> &SystemModel {
        &self.model
    }

    pub fn horizon(&self) -> usize {
        self.model.horizon
    }

    /// `P_{t+1}⁻¹ S_t`, or a singularity error naming `t + 1`.
    pub fn transfer(&self, t: usize) -> Result<&Matrix> {
        self.transfer[t].as_ref().ok_or_else(|| Error::Singular {
            what: "P_{t+1}",
            t: t + 1,
            condition: condition_number(&self.p[t + 1]),
        })
    }

    pub fn assumption1_ok(&self) -> bool {
        self.gamma_hat > 0.0
    }

    /// Steps whose closed loop has spectral norm `>= 1`.
    pub fn assumption1_violations(&self) -> usize {
        self.closed_loop_norms.iter().filter(|&&n| n >= 1.0).count()
    }
}

pub fn riccati_backward(model: &SystemModel) -> Result<RiccatiData> {
    riccati_backward_with(model, &Tolerances::default())
}

pub fn riccati_backward_with(model: &SystemModel, tol: &Tolerances) -> Result<RiccatiData> {
    let model = validate_model_with(model.clone(), tol)?;
    let horizon = model.horizon;
    let (a, b) = (&model.a, &model.b);
    let at = a.transpose();
    let bt = b.transpose();

    let mut p = vec![Matrix::zeros(0, 0); horizon + 1];
    let mut k = Vec::with_capacity(horizon);
    let mut s = Vec::with_capacity(horizon);
    let mut f = Vec::with_capacity(horizon);
    let mut feedforward = Vec::with_capacity(horizon);
    let mut transfer = Vec::with_capacity(horizon);
    p[horizon] = model.q_terminal.clone();

    for t in (0..horizon).rev() {
        let next = &p[t + 1];
        let gram = &bt * next * b + &model.r;
        let chol = Cholesky::new(symmetrize(&gram)).ok_or_else(|| Error::Singular {
            what: "BᵀP_{t+1}B + R",
            t,
            condition: condition_number(&gram),
        })?;
        let ff = chol.solve(&bt);
        let k_t = &ff * next * a;
        let s_t = symmetrize(&(next - next * b * &ff * next));
        let f_t = b * &ff;
        let p_t = symmetrize(&(&at * &s_t * a + &model.q));

        let tr = if min_eigenvalue(next) >= tol.pd {
            Cholesky::new(next.clone()).map(|c| c.solve(&s_t))
        } else {
            None
        };

        p[t] = p_t;
        k.push(k_t);
        s.push(s_t);
        f.push(f_t);
        feedforward.push(ff);
        transfer.push(tr);
    }
    k.reverse();
    s.reverse();
    f.reverse();
    feedforward.reverse();
    transfer.reverse();

    let closed_loop: Vec<Matrix> = k.iter().map(|k_t| a - b * k_t).collect();
    let closed_loop_norms = closed_loop.iter().map(spectral_norm).collect();

    let mut data = RiccatiData {
        model,
        p,
        k,
        s,
        f,
        feedforward,
        closed_loop,
        closed_loop_norms,
        transfer,
        gamma_hat: 0.0,
        p_hat: 1.0,
    };
    data.gamma_hat = stability_margin(&data, &data.model);
    data.p_hat = p_hat_bound(&data);
    Ok(data)
}

/// `1 − max_t σ_max(A − B K_t)`. Non-positive values mean the per-step
/// contraction assumption fails; callers decide what to do with that.
pub fn stability_margin(riccati: &RiccatiData, model: &SystemModel) -> f64 {
    let worst = riccati
        .k
        .iter()
        .map(|k_t| spectral_norm(&(&model.a - &model.b * k_t)))
        .fold(0.0, f64::max);
    1.0 - worst
}

/// `max(1, max_t ‖P_t‖)`.
pub fn p_hat_bound(riccati: &RiccatiData) -> f64 {
    riccati.p.iter().map(spectral_norm).fold(1.0, f64::max)
}
