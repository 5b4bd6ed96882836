use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("log power {0} exceeds the supported maximum of 1")]
    LogPower(u32),
    #[error("point lies at the origin")]
    AtOrigin,
    #[error("source and target points coincide")]
    Coincident,
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error("expression is not a single pure radial power")]
    NotRadialPower,
    #[error("argument must be positive, got {0}")]
    NonPositive(f64),
    #[error("inadmissible parameters: {0}")]
    Inadmissible(String),
    #[error("construction infeasible: {0}")]
    Infeasible(String),
    #[error("quadrature did not converge: {0}")]
    Quadrature(String),
    #[error("finite-difference estimate is noise dominated: spread {spread:.3e} exceeds {bound:.3e}")]
    NoiseDominated { spread: f64, bound: f64 },
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("invalid spec: {0}")]
    Spec(String),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
