use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("configuration error: {0}")]
    Configuration(String),

    /// A symbol field was asked for a partial derivative it does not carry.
    #[error("missing partial derivative {multi_index} (field supplies order {available})")]
    Capability { multi_index: String, available: u8 },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("oracle did not converge: tail estimate {achieved:.3e} exceeds {tolerance:.3e}; {advice}")]
    Convergence {
        achieved: f64,
        tolerance: f64,
        advice: String,
    },

    #[error("extrapolation failed: successive estimates differ by {relative_gap:.3e} (limit {limit:.1e})")]
    Extraction { relative_gap: f64, limit: f64 },

    #[error("validation failed: {0}")]
    Validation(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
