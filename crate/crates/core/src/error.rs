use std::path::PathBuf;

use thiserror::Error;

/// Convenient result alias used across the crate.
pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// A function of the film height was evaluated at a non-positive argument.
    #[error("domain error: {what} requires a positive argument, got {value}")]
    Domain { what: &'static str, value: f64 },

    /// A nodal value is not strictly positive.
    #[error("positivity lost at node ({i}, {j}): u = {value:e}")]
    Positivity { i: usize, j: usize, value: f64 },

    /// Step rejection exhausted the configured number of halvings.
    #[error(
        "positivity failure at step {step}: node ({i}, {j}) reached {value:e} after {halvings} halvings"
    )]
    PositivityFailure {
        step: u64,
        i: usize,
        j: usize,
        value: f64,
        halvings: u32,
    },

    /// A non-finite value appeared in the state.
    #[error("overflow at step {step}: node ({i}, {j}) is {value}")]
    Overflow {
        step: u64,
        i: usize,
        j: usize,
        value: f64,
    },

    /// Invalid parameters; each entry names the violated assumption.
    #[error("invalid configuration:\n  {}", .0.join("\n  "))]
    Config(Vec<String>),

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("grid too large for dense oracle: {nodes} nodes (limit {limit})")]
    TooLarge { nodes: usize, limit: usize },

    #[error("linear solver failed: {0}")]
    Solver(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {msg}")]
    Format { path: PathBuf, msg: String },

    #[error("{0}")]
    Parse(String),
}

impl Error {
    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(vec![msg.into()])
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for runtime aborts of a trajectory (positivity loss, overflow).
    pub fn is_runtime_abort(&self) -> bool {
        matches!(
            self,
            Error::Positivity { .. } | Error::PositivityFailure { .. } | Error::Overflow { .. }
        )
    }
}
