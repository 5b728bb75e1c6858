//! Crate-wide error type.

use thiserror::Error;

/// Errors produced by geometry validation, channel synthesis, design, and IO.
#[derive(Debug, Error)]
pub enum Error {
    /// Two points that must be distinct coincide (zero-distance path loss).
    #[error("singular geometry: {0}")]
    SingularGeometry(String),

    /// The coupling system `I - B R` is numerically singular for a codeword.
    #[error(
        "coupling singularity for codeword {codeword} (index {codeword_index}){}: \
         condition estimate {condition:.3e} exceeds threshold",
        grid_index.map(|g| format!(" at grid index {g}")).unwrap_or_default()
    )]
    CouplingSingularity {
        codeword_index: usize,
        codeword: String,
        grid_index: Option<usize>,
        condition: f64,
    },

    /// A precondition on an argument failed.
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    /// A response table does not cover the requested grid/codeword domain.
    #[error("incomplete response table: {0}")]
    IncompleteTable(String),

    /// Configuration file could not be parsed or validated.
    #[error("config error: {0}")]
    Config(String),

    /// A cached artifact is missing, corrupt, or keyed differently.
    #[error("cache error: {0}")]
    Cache(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
