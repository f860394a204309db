use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the admissible range (e.g. a parameter outside `[0, 1]`).
    #[error("argument out of range: {0}")]
    OutOfRange(String),
    #[error("configuration error: {0}")]
    Config(String),
    #[error("geometry error: {0}")]
    Geometry(String),
    #[error("topology error: {0}")]
    Topology(String),
    #[error("solver error: {0}")]
    Solver(String),
    #[error("estimation error: {0}")]
    Estimation(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("internal error: {0}")]
    Internal(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
