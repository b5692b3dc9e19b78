use thiserror::Error;

use crate::linsolve::SolveReport;

pub type Result<T> = std::result::Result<T, HdgError>;

#[derive(Debug, Error)]
pub enum HdgError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("capability exceeded: {0}")]
    Capability(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("singular matrix: pivot {pivot:.3e} at column {column} (tolerance {tolerance:.3e})")]
    SingularMatrix {
        column: usize,
        pivot: f64,
        tolerance: f64,
    },

    #[error("assembly failed on element {element}: {reason}")]
    Assembly { element: usize, reason: String },

    #[error("assembly failed: {0}")]
    Topology(String),

    #[error("solver failed: {reason}")]
    Solver {
        reason: String,
        report: Option<SolveReport>,
    },

    #[error("postprocessing failed on element {element}: {reason}")]
    Postprocess { element: usize, reason: String },

    #[error("unsupported operation: {0}")]
    Unsupported(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
