use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Coarse failure classes, used by the command line front end to pick an
/// exit code.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    InvalidConfig,
    Audit,
    Solver,
    Io,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid order: need p >= 2, 0 < s < 1 and p*s < 1 (got p = {p}, s = {s})")]
    InvalidOrder { p: f64, s: f64 },

    #[error("invalid domain ({a}, {b}): need a < b")]
    InvalidDomain { a: f64, b: f64 },

    #[error("invalid node count {0}: need at least 2 nodes")]
    InvalidNodeCount(usize),

    #[error("grid function has {found} values, grid has {expected} nodes")]
    GridMismatch { expected: usize, found: usize },

    #[error("non-finite value {value} at node {node}")]
    NonFinite { node: usize, value: f64 },

    #[error("parameter constraint violated: {0}")]
    ParameterConstraint(String),

    #[error("no sign change of f on [{lo}, {hi}]")]
    NoSignChange { lo: f64, hi: f64 },

    #[error("ordering violated at node {node}: lower {lower} > upper {upper}")]
    Ordering { node: usize, lower: f64, upper: f64 },

    #[error("invalid eigenvalue weight: {0}")]
    InvalidWeight(String),

    #[error("{method} did not converge in {iterations} iterations (residual {residual:e})")]
    NonConvergence {
        method: &'static str,
        iterations: usize,
        residual: f64,
    },

    #[error("energy evaluation produced a non-finite value")]
    EnergyNaN,

    #[error("mountain pass precondition failed: {0}")]
    NoBarrier(String),

    #[error("mountain pass collapsed: {0}")]
    Collapse(String),

    #[error("monotone iteration left the order interval at node {node} (iterate {value}, bounds [{lower}, {upper}]); c2 too small?")]
    OrderIntervalExit {
        node: usize,
        value: f64,
        lower: f64,
        upper: f64,
    },

    #[error("barrier failure: {0}")]
    Barrier(String),

    #[error("solution {label} is trivial (max norm {norm:e})")]
    Trivial { label: String, norm: f64 },

    #[error("mountain pass point does not change sign (min {min:e}, max {max:e})")]
    NonNodal { min: f64, max: f64 },

    #[error("hypothesis audit failed: {0}")]
    AuditFailed(String),

    #[error("{branch}: {source}")]
    Branch {
        branch: &'static str,
        #[source]
        source: Box<Error>,
    },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
}

impl Error {
    pub fn class(&self) -> ErrorClass {
        match self {
            Error::InvalidOrder { .. }
            | Error::InvalidDomain { .. }
            | Error::InvalidNodeCount(_)
            | Error::GridMismatch { .. }
            | Error::NonFinite { .. }
            | Error::ParameterConstraint(_)
            | Error::InvalidWeight(_)
            | Error::Ordering { .. }
            | Error::NoSignChange { .. }
            | Error::Config(_) => ErrorClass::InvalidConfig,
            Error::AuditFailed(_) => ErrorClass::Audit,
            Error::Io { .. } | Error::Json { .. } => ErrorClass::Io,
            Error::Branch { source, .. } => source.class(),
            _ => ErrorClass::Solver,
        }
    }

    pub(crate) fn in_branch(self, branch: &'static str) -> Error {
        Error::Branch {
            branch,
            source: Box::new(self),
        }
    }
}
