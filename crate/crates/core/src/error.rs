use thiserror::Error;

/// Errors produced by the core library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A point left the open interval on which the activation is analytic.
    #[error("value {value} lies outside the analytic interval ({lo}, {hi}) of `{activation}`")]
    Domain {
        activation: String,
        value: f64,
        lo: f64,
        hi: f64,
    },

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("invalid activation `{name}`: {reason}")]
    Activation { name: String, reason: String },

    #[error("unknown activation `{0}`")]
    UnknownActivation(String),

    #[error("no closed form for derivative of order {order} of `{activation}`")]
    MissingClosedForm { activation: String, order: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("formats do not share a common chain: {0}")]
    MismatchedChains(String),

    #[error("budget exceeded: {0}")]
    Budget(String),

    /// An evaluation failed at a specific grid cell.
    #[error("cell {cell}: {source}")]
    Cell {
        cell: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    /// True for errors that stem from numerical domain violations, possibly
    /// wrapped in a cell context.
    pub fn is_domain(&self) -> bool {
        match self {
            Error::Domain { .. } => true,
            Error::Cell { source, .. } => source.is_domain(),
            _ => false,
        }
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
