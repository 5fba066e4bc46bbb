use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    /// An operation received inputs that violate its preconditions.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// A configuration value is out of range or inconsistent.
    #[error("configuration error: {0}")]
    Config(String),

    /// A scenario cannot be evaluated (e.g. its no-action baseline never collides).
    #[error("invalid scenario `{id}`: {reason}")]
    ScenarioInvalid { id: String, reason: String },

    /// The driving agent failed during a loop iteration.
    #[error("agent failed at iteration {iteration}: {source}")]
    AgentFailed {
        iteration: usize,
        #[source]
        source: Box<Error>,
    },

    /// The scene imaginer failed during a loop iteration.
    #[error("imaginer failed at iteration {iteration}: {source}")]
    ImaginerFailed {
        iteration: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn invalid_input(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    pub fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }
}
