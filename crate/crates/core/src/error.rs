use thiserror::Error;

/// Errors surfaced by the statistics core, profile codec, builder,
/// verifier and simulator.
///
/// Each variant carries a stable kebab-case code in its display form so
/// callers (and the CLI) can match on failures without string-scraping
/// free-form text.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("empty-sample: operation requires at least one observation")]
    EmptySample,

    #[error("insufficient-observations: need at least 2 observations, got {got}")]
    InsufficientObservations { got: usize },

    #[error("not-symmetric: matrix entry ({row},{col}) differs from its transpose by {delta:e}")]
    NotSymmetric { row: usize, col: usize, delta: f64 },

    #[error("no-convergence: {what} did not converge within {iterations} iterations")]
    NoConvergence {
        what: &'static str,
        iterations: usize,
    },

    #[error("bad-degrees-of-freedom: d1={d1}, d2={d2}")]
    BadDegreesOfFreedom { d1: usize, d2: usize },

    #[error("degenerate-variance: {context}")]
    DegenerateVariance { context: &'static str },

    #[error("insufficient-group: group {index} has {len} values, need at least 2")]
    InsufficientGroup { index: usize, len: usize },

    #[error(
        "quantile-no-convergence: studentized range quantile search failed for k={k}, df={df}"
    )]
    QuantileNoConvergence { k: usize, df: usize },

    #[error("empty-path: call path must be non-empty")]
    EmptyPath,

    #[error("empty-vector: operation requires a non-empty vector")]
    EmptyVector,

    #[error("bad-digest: expected 40 lowercase hex chars, got {got:?}")]
    BadDigest { got: String },

    #[error("parse-error: line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("non-monotone-sample: timestamp {timestamp} precedes previous {previous}")]
    NonMonotoneSample { timestamp: i64, previous: i64 },

    #[error("profile-identity-mismatch: expected {expected:?}, got {got:?}")]
    ProfileIdentityMismatch { expected: String, got: String },

    #[error("no-such-node: {node}")]
    NoSuchNode { node: String },

    #[error("no-intrusion: consensus outcome is clean, nothing to report")]
    NoIntrusion,

    #[error("invalid-parameter: {0}")]
    InvalidParameter(String),

    #[error("node {node}: {source}")]
    AtNode {
        node: String,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn parse(line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            line,
            message: message.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
