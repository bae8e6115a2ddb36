use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch in {matrix}: expected {expected_rows}x{expected_cols}, got {rows}x{cols}")]
    DimensionMismatch {
        matrix: &'static str,
        expected_rows: usize,
        expected_cols: usize,
        rows: usize,
        cols: usize,
    },

    #[error("{matrix} is not symmetric (max asymmetry {asymmetry:e})")]
    NotSymmetric { matrix: &'static str, asymmetry: f64 },

    #[error("{matrix} must be {requirement}, found eigenvalue {eigenvalue:e}")]
    Definiteness {
        matrix: &'static str,
        requirement: &'static str,
        eigenvalue: f64,
    },

    #[error("failed to invert {what} at t={t} (condition number {condition:e})")]
    Singular {
        what: &'static str,
        t: usize,
        condition: f64,
    },

    #[error("invalid scenario: {0}")]
    InvalidScenario(String),

    #[error("invalid probability model: {0}")]
    InvalidProbability(String),

    #[error("{what} out of range: {value} (allowed {allowed})")]
    OutOfRange {
        what: &'static str,
        value: usize,
        allowed: String,
    },

    #[error("stability margin {gamma_hat} <= 0: assumption violated, bound not applicable")]
    AssumptionViolated { gamma_hat: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid config: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error("TOML parse error: {0}")]
    TomlDe(#[from] toml::de::Error),

    #[error("TOML write error: {0}")]
    TomlSer(#[from] toml::ser::Error),
}
