use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("node id {id} out of range for a network with {n} nodes")]
    NodeOutOfRange { id: usize, n: usize },

    #[error("arc ({source_node}, {target}) has nonpositive weight {weight}")]
    NonPositiveWeight {
        source_node: usize,
        target: usize,
        weight: f64,
    },

    #[error("duplicate arc ({0}, {1})")]
    DuplicateArc(usize, usize),

    #[error("self-loop at node {0} is not permitted for this network")]
    SelfLoop(usize),

    #[error("value {value} for {what} lies outside [0, 1]")]
    OutOfUnitRange { what: String, value: f64 },

    #[error("solver did not converge after {iterations} iterations (residual {residual:e})")]
    NotConverged { iterations: usize, residual: f64 },

    #[error("statistic of an empty vector")]
    Empty,

    #[error("{}:{line}: {msg}", path.display())]
    Parse {
        path: PathBuf,
        line: usize,
        msg: String,
    },

    #[error("not a hierarchy graph: {0}")]
    NotHierarchy(String),

    #[error("instance has {n} nodes, brute force is limited to {max}")]
    TooLarge { n: usize, max: usize },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Toml(#[from] toml::de::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    /// True for failures of a numerical routine, as opposed to bad input.
    pub fn is_solver_failure(&self) -> bool {
        matches!(self, Error::NotConverged { .. })
    }
}

pub type Result<T> = std::result::Result<T, Error>;
