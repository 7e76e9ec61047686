use std::path::PathBuf;

use thiserror::Error;

/// Errors produced anywhere in the solver.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A coefficient profile was queried outside its tabulated range.
    #[error("time {t} outside profile domain [{lo}, {hi}]")]
    Domain { t: f64, lo: f64, hi: f64 },

    /// The group element left the cell where the ordered
    /// `exp(K+) exp(K0) exp(K-)` factorization exists.
    #[error("singular-decomposition: {0}")]
    SingularDecomposition(String),

    #[error("singular-flow at t={t}: {reason}")]
    SingularFlow { t: f64, reason: String },

    #[error("no stationary point: {0}")]
    NoStationaryPoint(String),

    #[error("stiffness: step size underflow at t={t} (h={h:e})")]
    Stiffness { t: f64, h: f64 },

    #[error("truncation-contaminated at t={t}: {reason}")]
    TruncationContaminated { t: f64, reason: String },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("undefined: {0}")]
    Undefined(String),

    #[error("file not found: {}", .0.display())]
    FileNotFound(PathBuf),

    #[error("parse error in {path} at line {line}, column {column}: {msg}")]
    Parse {
        path: String,
        line: usize,
        column: usize,
        msg: String,
    },

    #[error("validation error in `{field}`: {msg}")]
    Validation { field: String, msg: String },

    /// An error raised while evaluating at a specific time along a run.
    #[error("at t={t}: {source}")]
    AtTime {
        t: f64,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub(crate) fn validation(field: impl Into<String>, msg: impl Into<String>) -> Self {
        Error::Validation {
            field: field.into(),
            msg: msg.into(),
        }
    }

    /// Attach the evaluation time unless the error already carries one.
    pub(crate) fn at_time(self, t: f64) -> Self {
        match self {
            e @ (Error::SingularFlow { .. }
            | Error::AtTime { .. }
            | Error::Stiffness { .. }
            | Error::TruncationContaminated { .. }) => e,
            other => Error::AtTime {
                t,
                source: Box::new(other),
            },
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
