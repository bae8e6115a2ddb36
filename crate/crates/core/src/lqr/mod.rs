//! Dense finite-horizon LQR: model validation, the backward Riccati
//! recursion and the diagnostics derived from it.

mod model;
mod riccati;

pub use model::{validate_model, validate_model_with, SystemModel, Tolerances};
pub use riccati::{p_hat_bound, riccati_backward, riccati_backward_with, stability_margin, RiccatiData};
