//! Finite-horizon LQR under sparse disturbances.
//!
//! Three controllers are compared on `x_{t+1} = A x_t + B u_t + d_t` where
//! `d_t` is nonzero on a small set of steps:
//!
//! * **blind**: plain LQR feedback, ignoring disturbances;
//! * **disturbance-aware**: knows the disturbance values and their order but
//!   only a probability model of when they occur;
//! * **offline**: knows everything in advance.
//!
//! [`lqr`] builds the Riccati data every policy shares, [`policies`] holds the
//! controllers, [`simulator`] rolls them out, [`bounds`] evaluates the regret
//! bounds and [`experiments`] drives the reproducible CSV studies.

// `!(x >= 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bounds;
pub mod disturbance;
pub mod error;
pub mod experiments;
pub mod linalg;
pub mod lqr;
pub mod policies;
pub mod simulator;

pub use disturbance::{DisturbanceScenario, ProbabilityModel, ValueLaw};
pub use error::{Error, Result};
pub use linalg::{Matrix, Vector};
pub use lqr::{riccati_backward, RiccatiData, SystemModel};
pub use simulator::{rollout, RolloutResult};
