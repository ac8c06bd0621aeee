use std::fmt;

/// Errors raised anywhere in the library.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// An argument lies outside the mathematical domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A structural invariant of a value was violated.
    #[error("invariant violated: {0}")]
    Invariant(String),

    /// Truncated sampling over an interval carrying (numerically) no mass.
    #[error("degenerate truncation interval {interval}: mass {mass:e} below 1e-300")]
    Degenerate { interval: Interval, mass: f64 },

    #[error("integration failed: {0}")]
    Integration(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("conditioning on R = {requested} leaves {found} draws (need at least {needed})")]
    Conditioning {
        requested: usize,
        found: usize,
        needed: usize,
    },

    #[error("{context}: {source}")]
    Context {
        context: String,
        #[source]
        source: Box<Error>,
    },

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),

    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn invariant(msg: impl Into<String>) -> Self {
        Error::Invariant(msg.into())
    }

    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub fn context(self, context: impl Into<String>) -> Self {
        Error::Context {
            context: context.into(),
            source: Box::new(self),
        }
    }

    /// True for failures of the numerics (as opposed to bad inputs or IO).
    pub fn is_numerical(&self) -> bool {
        match self {
            Error::Degenerate { .. } | Error::Integration(_) => true,
            Error::Context { source, .. } => source.is_numerical(),
            _ => false,
        }
    }
}

/// A half-open interval `(lo, hi]` in whatever scale the caller works in.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}]", self.lo, self.hi)
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
