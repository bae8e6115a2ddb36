use crate::error::{Error, Result};
use crate::linalg::{max_asymmetry, min_eigenvalue, Matrix};

/// Numerical tolerances shared by validation and the Riccati recursion.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// PSD slack, scaled by `max(1, ‖M‖)`.
    pub psd: f64,
    /// Minimum eigenvalue accepted as positive definite.
    pub pd: f64,
    /// Symmetry slack, scaled by `max(1, ‖M‖)`.
    pub sym: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            psd: 1e-8,
            pd: 1e-10,
            sym: 1e-9,
        }
    }
}

/// Time-invariant linear dynamics `x' = A x + B u + d` with quadratic stage
/// and terminal costs over a horizon of `horizon` steps.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemModel {
    pub a: Matrix,
    pub b: Matrix,
    pub q: Matrix,
    pub q_terminal: Matrix,
    pub r: Matrix,
    pub horizon: usize,
}

impl SystemModel {
    pub fn new(a: Matrix, b: Matrix, q: Matrix, q_terminal: Matrix, r: Matrix, horizon: usize) -> Self {
        Self {
            a,
            b,
            q,
            q_terminal,
            r,
            horizon,
        }
    }

    /// Scalar model, mostly for tests and hand-checked examples.
    pub fn scalar(a: f64, b: f64, q: f64, q_terminal: f64, r: f64, horizon: usize) -> Self {
        let s = |v| Matrix::from_element(1, 1, v);
        Self::new(s(a), s(b), s(q), s(q_terminal), s(r), horizon)
    }

    pub fn state_dim(&self) -> usize {
        self.a.nrows()
    }

    pub fn input_dim(&self) -> usize {
        self.b.ncols()
    }

    pub fn with_horizon(&self, horizon: usize) -> Self {
        Self {
            horizon,
            ..self.clone()
        }
    }
}

fn check_shape(matrix: &'static str, m: &Matrix, rows: usize, cols: usize) -> Result<()> {
    if m.nrows() != rows || m.ncols() != cols {
        return Err(Error::DimensionMismatch {
            matrix,
            expected_rows: rows,
            expected_cols: cols,
            rows: m.nrows(),
            cols: m.ncols(),
        });
    }
    Ok(())
}

fn check_symmetric(matrix: &'static str, m: &Matrix, tol: f64) -> Result<()> {
    let asym = max_asymmetry(m);
    if asym > tol * m.amax().max(1.0) {
        return Err(Error::NotSymmetric {
            matrix,
            asymmetry: asym,
        });
    }
    Ok(())
}

fn check_psd(matrix: &'static str, m: &Matrix, tol: &Tolerances) -> Result<()> {
    check_symmetric(matrix, m, tol.sym)?;
    let eig = min_eigenvalue(m);
    if eig < -tol.psd * m.amax().max(1.0) {
        return Err(Error::Definiteness {
            matrix,
            requirement: "positive semidefinite",
            eigenvalue: eig,
        });
    }
    Ok(())
}

/// Checks dimensions and definiteness, returning the model unchanged.
pub fn validate_model(model: SystemModel) -> Result<SystemModel> {
    validate_model_with(model, &Tolerances::default())
}

pub fn validate_model_with(model: SystemModel, tol: &Tolerances) -> Result<SystemModel> {
    let n = model.a.nrows();
    let m = model.b.ncols();
    check_shape("A", &model.a, n, n)?;
    check_shape("B", &model.b, n, m)?;
    check_shape("Q", &model.q, n, n)?;
    check_shape("Q_T", &model.q_terminal, n, n)?;
    check_shape("R", &model.r, m, m)?;
    if n == 0 || m == 0 {
        return Err(Error::InvalidArgument(
            "state and input dimensions must be positive".into(),
        ));
    }
    check_psd("Q", &model.q, tol)?;
    check_psd("Q_T", &model.q_terminal, tol)?;
    check_symmetric("R", &model.r, tol.sym)?;
    let eig = min_eigenvalue(&model.r);
    if eig < tol.pd {
        return Err(Error::Definiteness {
            matrix: "R",
            requirement: "positive definite",
            eigenvalue: eig,
        });
    }
    Ok(model)
}
