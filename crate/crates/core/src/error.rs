use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("singular least-squares system: {0}")]
    Singular(String),

    #[error("scaling law is not monotone: {0}")]
    NotMonotone(String),

    #[error("delta1 = 1: {0}")]
    SaturatedDoppler(String),

    #[error("path {index} outside the delay-Doppler support: {reason}")]
    PathOutOfRange { index: usize, reason: String },

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}
