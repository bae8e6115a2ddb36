use super::Policy;
use crate::error::Result;
use crate::linalg::{quad_form, Vector};
use crate::lqr::RiccatiData;

/// `u_t = −K_t x`.
pub fn blind_action(t: usize, x: &Vector, riccati: &RiccatiData) -> Vector {
    -(&riccati.k[t] * x)
}

/// Undisturbed cost-to-go `xᵀP_t x`.
pub fn blind_cost_to_go(t: usize, x: &Vector, riccati: &RiccatiData) -> f64 {
    quad_form(&riccati.p[t], x)
}

#[derive(Debug, Clone, Copy)]
pub struct BlindPolicy<'a> {
    riccati: &'a RiccatiData,
}

impl<'a> BlindPolicy<'a> {
    pub fn new(riccati: &'a RiccatiData) -> Self {
        Self { riccati }
    }
}

impl Policy for BlindPolicy<'_> {
    fn label(&self) -> &'static str {
        "blind"
    }

    fn action(&self, t: usize, x: &Vector, _k_remaining: usize) -> Result<Vector> {
        Ok(blind_action(t, x, self.riccati))
    }
}
