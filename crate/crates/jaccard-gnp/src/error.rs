//! Crate-wide error type.
//!
//! Every error carries a short stable code (used by the CLI for
//! machine-parsable one-line diagnostics) plus a human message.

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A numeric or structural argument is outside its domain.
    #[error("{0}")]
    InvalidParameter(String),

    /// Vertex index outside `[0, n)`.
    #[error("vertex {vertex} out of range for graph on {n} vertices")]
    VertexOutOfRange { vertex: usize, n: usize },

    /// A run would exceed a configured size cap.
    #[error("{0}")]
    Capacity(String),

    /// Malformed edge-list, family spec, or manifest input.
    #[error("{0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Stable machine-parsable code, one per error class.
    pub fn code(&self) -> &'static str {
        match self {
            Error::InvalidParameter(_) => "E_PARAM",
            Error::VertexOutOfRange { .. } => "E_VERTEX",
            Error::Capacity(_) => "E_CAPACITY",
            Error::Parse(_) => "E_PARSE",
            Error::Io(_) => "E_IO",
            Error::Json(_) => "E_JSON",
        }
    }
}

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}

/// Checks that a probability lies in `[0,1]` (NaN rejected).
pub(crate) fn check_probability(p: f64, name: &str) -> Result<()> {
    if p.is_finite() && (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(invalid(format!("{name} must lie in [0,1], got {p}")))
    }
}
