use thiserror::Error;

/// Errors produced by the chain, spectral, continuum and field layers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid profile: {0}")]
    InvalidProfile(String),

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("time step {dt:e} exceeds the stability bound {bound:e}")]
    StepTooLarge { dt: f64, bound: f64 },

    #[error("multiple collision at t = {t}: gaps {first} and {second} close simultaneously")]
    MultipleCollision { t: f64, first: usize, second: usize },

    #[error("particle order violated at t = {t}: gap {k} = {gap:e}")]
    OrderViolation { t: f64, k: usize, gap: f64 },

    #[error("quadrature did not converge: estimate {estimate}, error estimate {error:e}")]
    Quadrature { estimate: f64, error: f64 },

    #[error("flow map is not a diffeomorphism at t = {t}: min G_z = {min_gz:e}")]
    NotDiffeomorphic { t: f64, min_gz: f64 },

    #[error("inversion failed: {0}")]
    Inversion(String),

    #[error("config field `{field}`: {reason}")]
    Config { field: String, reason: String },

    #[error("plot rendering failed: {0}")]
    Plot(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
