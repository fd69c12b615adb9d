use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("mass {rho} is not below the saturation mass {rho_s}")]
    SupercriticalMass { rho: f64, rho_s: f64 },

    #[error("did not converge: {0}")]
    NotConverged(String),

    #[error("zero concentration at cluster size {index}")]
    ZeroConcentration { index: usize },

    #[error("overflow: {0}")]
    Overflow(String),

    #[error("config: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
