use thiserror::Error;

/// Errors raised by the circuit model and its linear-algebra kernel.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("parameter `{name}` must be positive, got {value}")]
    NonPositiveParameter { name: &'static str, value: f64 },

    #[error("mutual inductance |M| = {mutual} must be smaller than L = {inductance}")]
    CouplingOutOfRange { mutual: f64, inductance: f64 },

    #[error("regime rejected: {0}")]
    RegimeRejected(String),

    #[error("eigenvalues nearly degenerate (min gap {gap:e}, scale {scale:e})")]
    NearDegenerate { gap: f64, scale: f64 },

    #[error("zero coupling (mu = 0): the intertwining operator is undefined")]
    ZeroCoupling,

    #[error("gauge component t2{index} = {value} is degenerate")]
    GaugeDegenerate { index: usize, value: f64 },

    #[error("matrix is singular (determinant {determinant:e})")]
    SingularMatrix { determinant: f64 },

    #[error("matrix is not symmetric positive definite (eigenvalue {eigenvalue:e})")]
    NotSpd { eigenvalue: f64 },

    #[error("Jacobi iteration did not converge after {sweeps} sweeps")]
    NoConvergence { sweeps: usize },

    #[error("non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },

    #[error("sigma vanishes ({0:e}); printed coefficient formulas are undefined")]
    ZeroSigma(f64),

    #[error("time grid is empty")]
    GridEmpty,

    #[error("invalid time grid: {0}")]
    InvalidGrid(String),

    #[error("pair index must be 1 or 2, got {0}")]
    PairIndex(usize),

    #[error("unit mismatch: {0}")]
    UnitMismatch(String),
}

pub type Result<T> = std::result::Result<T, Error>;
