use thiserror::Error;

/// Errors raised by the analysis and manipulation engine.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("degenerate geometry: {0}")]
    DegenerateGeometry(String),
    #[error("invalid geometry: {0}")]
    InvalidGeometry(String),
    #[error("point ({x}, {y}) lies outside the scene bounds")]
    OutOfBounds { x: f64, y: f64 },
    #[error("path segment {segment} has no associated corridor")]
    MissingCorridor { segment: usize },
    #[error("unknown attribute `{0}`")]
    UnknownAttribute(String),
    #[error("raw value does not belong to attribute `{0}`")]
    AttributeMismatch(String),
    #[error("score {0} is outside the valid range")]
    InvalidScore(f64),
    #[error("cannot aggregate an empty set of classes")]
    EmptyReport,
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("infeasible request: {0}")]
    InfeasibleRequest(String),
}

pub type Result<T> = std::result::Result<T, Error>;
