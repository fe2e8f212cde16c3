use std::io;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, DmoError>;

#[derive(Debug, Error)]
pub enum DmoError {
    #[error("invalid {name}: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("angular frequency is zero, dip variable is undefined")]
    ZeroFrequency,

    #[error("operator is singular at xi = {xi}")]
    Singular { xi: f64 },

    #[error("impulse at (t = {t} s, x = {x} m) lies outside the grid")]
    OutOfGrid { t: f64, x: f64 },

    #[error("grid {rows}x{cols} exceeds the direct-integral limit of {limit}x{limit}")]
    GridTooLarge { rows: usize, cols: usize, limit: usize },

    #[error("malformed FKG1 stream: {0}")]
    Format(String),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Io(#[from] io::Error),
}

impl DmoError {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        DmoError::InvalidParameter { name, reason: reason.into() }
    }
}
