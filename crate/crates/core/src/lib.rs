//! Residual verifiers for geodesic mappings of pseudo-Riemannian metrics.
//!
//! Metrics and fields are written as expressions over chart coordinates
//! ([`dsl`]); all derivatives are symbolic, so every check reports residuals
//! at floating-point roundoff level when the underlying identity holds.

pub mod catalog;
pub mod cone;
pub mod dsl;
pub mod fields;
pub mod files;
pub mod geometry;
pub mod jordan;
pub mod linalg;
pub mod quadrature;
pub mod report;

use thiserror::Error;

pub use report::ResidualReport;

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Parse(#[from] dsl::ParseError),
    #[error("evaluation failed at {point:?}: {source}")]
    Eval {
        point: Vec<f64>,
        #[source]
        source: dsl::EvalError,
    },
    #[error("singular metric at {point:?}")]
    SingularMetric { point: Vec<f64> },
    #[error("unknown variable `{0}`")]
    UnknownVariable(String),
    #[error("{0}")]
    Invalid(String),
    #[error("line {line}: {message}")]
    Format { line: usize, message: String },
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("degenerate input: {0}")]
    Degenerate(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
