//! Error type shared by the whole crate.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// A sample on which estimation is impossible (constant, or variance
    /// collapsing to zero within machine precision).
    #[error("degenerate sample: {0}")]
    DegenerateSample(&'static str),

    /// An argument outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Adaptive quadrature exhausted its subdivision budget.
    #[error("quadrature did not converge: residual error {residual:.3e} exceeds tolerance {tol:.3e}")]
    QuadratureNonConvergence { residual: f64, tol: f64 },

    /// A data file could not be ingested; carries the 1-based line number.
    #[error("{path}:{line}: {msg}")]
    Ingest {
        path: String,
        line: usize,
        msg: String,
    },

    /// Invalid command-line usage.
    #[error("{0}")]
    Usage(String),

    /// The bootstrap redraw budget (10 * b) was exhausted.
    #[error("bootstrap redraw cap exceeded after {0} redraws")]
    RedrawCap(usize),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
