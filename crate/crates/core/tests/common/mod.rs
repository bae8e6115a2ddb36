//! Shared fixtures and an independent scalar oracle for the
//! disturbance-aware policy.
#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sparse_lqr::policies::{da_action, DisturbanceAwareTables};
use sparse_lqr::{RiccatiData, SystemModel, Vector};

/// Scalar instance with chronological disturbance values.
#[derive(Debug, Clone)]
pub struct ScalarInstance {
    pub a: f64,
    pub b: f64,
    pub q: f64,
    pub q_terminal: f64,
    pub r: f64,
    pub horizon: usize,
    pub values: Vec<f64>,
    pub w_hat: f64,
    pub x0: f64,
}

impl ScalarInstance {
    pub fn random(seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let horizon = rng.random_range(1..=4);
        let count = rng.random_range(0..=horizon.min(2));
        let w_hat = rng.random_range(0.1..2.0);
        let sign = |rng: &mut ChaCha8Rng| if rng.random::<bool>() { 1.0 } else { -1.0 };
        let b = sign(&mut rng) * rng.random_range(0.2..2.0);
        Self {
            a: rng.random_range(-0.95..0.95),
            b,
            q: rng.random_range(0.0..2.0),
            q_terminal: rng.random_range(0.0..2.0),
            r: rng.random_range(0.1..2.0),
            horizon,
            values: (0..count).map(|_| sign(&mut rng) * w_hat).collect(),
            w_hat,
            x0: rng.random_range(-2.0..2.0),
        }
    }

    pub fn model(&self) -> SystemModel {
        SystemModel::scalar(self.a, self.b, self.q, self.q_terminal, self.r, self.horizon)
    }

    pub fn count(&self) -> usize {
        self.values.len()
    }

    /// Value that arrives next when `k` disturbances remain.
    pub fn w(&self, k: usize) -> f64 {
        self.values[self.count() - k]
    }

    /// `[0, w_1, …, w_D]` as the library's reverse-indexed view.
    pub fn values_by_remaining(&self) -> Vec<Vector> {
        std::iter::once(0.0)
            .chain(self.values.iter().rev().copied())
            .map(|w| Vector::from_element(1, w))
            .collect()
    }

    pub fn prob(&self, t: usize, k: usize) -> f64 {
        if k == 0 {
            0.0
        } else {
            (k as f64 / (self.horizon - t) as f64).min(1.0)
        }
    }
}

/// `c_xx x² + c_xu x u + c_uu u² + c_x x + c_u u + c`.
#[derive(Debug, Clone, Copy, Default)]
struct Bivariate {
    xx: f64,
    xu: f64,
    uu: f64,
    x: f64,
    u: f64,
    c: f64,
}

/// `c2 y² + c1 y + c0`.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Quadratic {
    pub c2: f64,
    pub c1: f64,
    pub c0: f64,
}

impl Quadratic {
    pub fn eval(&self, y: f64) -> f64 {
        self.c2 * y * y + self.c1 * y + self.c0
    }

    /// `y ↦ self(y + s)`.
    fn shifted(&self, s: f64) -> Self {
        Self {
            c2: self.c2,
            c1: self.c1 + 2.0 * self.c2 * s,
            c0: self.eval(s),
        }
    }

    fn scaled(&self, k: f64) -> Self {
        Self {
            c2: k * self.c2,
            c1: k * self.c1,
            c0: k * self.c0,
        }
    }

    fn plus(&self, o: &Self) -> Self {
        Self {
            c2: self.c2 + o.c2,
            c1: self.c1 + o.c1,
            c0: self.c0 + o.c0,
        }
    }
}

/// Optimal affine law `u = gain·x + offset` and the value it attains.
#[derive(Debug, Clone, Copy)]
pub struct OracleNode {
    pub value: Quadratic,
    pub gain: f64,
    pub offset: f64,
}

/// Backward induction over the full scenario tree, node by node, without
/// memoization: at `(t, k)` the next step either carries `w_k` (probability
/// `p = min(1, k/(T−t))`) or not, and the control minimizes the expected
/// stage-plus-continuation cost written as a polynomial in `(x, u)`.
pub fn oracle(inst: &ScalarInstance, t: usize, k: usize) -> OracleNode {
    if t == inst.horizon {
        return OracleNode {
            value: Quadratic {
                c2: inst.q_terminal,
                ..Default::default()
            },
            gain: 0.0,
            offset: 0.0,
        };
    }
    let p = inst.prob(t, k);
    let mut cont = Quadratic::default();
    if p < 1.0 {
        cont = cont.plus(&oracle(inst, t + 1, k).value.scaled(1.0 - p));
    }
    if p > 0.0 {
        cont = cont.plus(&oracle(inst, t + 1, k - 1).value.shifted(inst.w(k)).scaled(p));
    }
    // y = a x + b u
    let (a, b) = (inst.a, inst.b);
    let poly = Bivariate {
        xx: inst.q + cont.c2 * a * a,
        xu: 2.0 * cont.c2 * a * b,
        uu: inst.r + cont.c2 * b * b,
        x: cont.c1 * a,
        u: cont.c1 * b,
        c: cont.c0,
    };
    // ∂/∂u = 0: 2 uu u + xu x + u_lin = 0
    let gain = -poly.xu / (2.0 * poly.uu);
    let offset = -poly.u / (2.0 * poly.uu);
    let value = Quadratic {
        c2: poly.xx + poly.xu * gain + poly.uu * gain * gain,
        c1: poly.x + poly.xu * offset + 2.0 * poly.uu * gain * offset + poly.u * gain,
        c0: poly.c + poly.uu * offset * offset + poly.u * offset,
    };
    OracleNode { value, gain, offset }
}

/// Expected realized cost of the library's disturbance-aware policy,
/// enumerating every disturbance path with its probability.
pub fn enumerated_da_cost(inst: &ScalarInstance, tables: &DisturbanceAwareTables, riccati: &RiccatiData) -> f64 {
    fn go(inst: &ScalarInstance, tables: &DisturbanceAwareTables, riccati: &RiccatiData, t: usize, x: f64, k: usize) -> f64 {
        if t == inst.horizon {
            return inst.q_terminal * x * x;
        }
        let u = da_action(t, &Vector::from_element(1, x), k, tables, riccati).unwrap()[0];
        let y = inst.a * x + inst.b * u;
        let p = inst.prob(t, k);
        let mut cost = inst.q * x * x + inst.r * u * u;
        if p < 1.0 {
            cost += (1.0 - p) * go(inst, tables, riccati, t + 1, y, k);
        }
        if p > 0.0 {
            cost += p * go(inst, tables, riccati, t + 1, y + inst.w(k), k - 1);
        }
        cost
    }
    go(inst, tables, riccati, 0, inst.x0, inst.count())
}

pub fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1.0)
}
