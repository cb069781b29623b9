use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid degree distribution: {0}")]
    InvalidDistribution(String),

    #[error("invalid degree sequence: {0}")]
    InvalidSequence(String),

    /// The size-biased offspring mean does not exceed one.
    #[error("distribution is not supercritical (size-biased mean {size_biased_mean})")]
    Subcritical { size_biased_mean: f64 },

    /// A fluid state reached the end of its existence interval.
    #[error("fluid state is no longer supercritical (rho = {rho})")]
    SubcriticalState { rho: f64 },

    #[error("argument outside domain: {0}")]
    Domain(String),

    #[error("root bracketing failed: {0}")]
    NoRoot(String),

    #[error("integration left the invariant region at t = {t} after {halvings} step halvings")]
    StepSize { t: f64, halvings: u32 },

    #[error("quadrature did not converge: grid {coarse} vs doubled grid {fine}")]
    Quadrature { coarse: f64, fine: f64 },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}
