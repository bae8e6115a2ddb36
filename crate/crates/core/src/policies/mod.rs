//! The three controllers: blind LQR, disturbance-aware, and clairvoyant
//! offline. Each exposes its precomputation, per-step action and
//! cost-to-go as free functions, and a small [`Policy`] wrapper for rollouts.

mod aware;
mod blind;
mod offline;

pub use aware::{da_action, da_expected_cost, da_precompute, AwarePolicy, DisturbanceAwareTables};
pub use blind::{blind_action, blind_cost_to_go, BlindPolicy};
pub use offline::{
    offline_action, offline_cost_to_go, offline_precompute, OfflineAuxiliary, OfflinePolicy,
};

use crate::error::Result;
use crate::linalg::Vector;

/// A causal controller driven by the simulator.
///
/// The simulator owns the count of remaining disturbances and passes it in;
/// policies that do not need it ignore it.
pub trait Policy: Sync {
    fn label(&self) -> &'static str;

    fn action(&self, t: usize, x: &Vector, k_remaining: usize) -> Result<Vector>;
}
