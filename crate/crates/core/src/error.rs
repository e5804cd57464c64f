//! Error type shared by every module of the crate.

use thiserror::Error;

/// Failures reported by the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the domain of a function (e.g. modulus `p >= 1`).
    #[error("domain error: {0}")]
    Domain(String),
    /// An integrand has a pole on the integration path.
    #[error("singular integral: {0}")]
    Singular(String),
    /// A finite-difference stencil cannot be formed.
    #[error("stencil error: {0}")]
    Stencil(String),
    /// The discrete curve is not immersed (repeated nodes, non-positive height, ...).
    #[error("degenerate curve: {0}")]
    Degenerate(String),
    /// Inconsistent or out-of-range model parameters.
    #[error("parameter error: {0}")]
    Parameter(String),
    /// A root finder or iteration failed to converge.
    #[error("solver error: {0}")]
    Solver(String),
    /// A curve that should close does not.
    #[error("closure error: {0}")]
    Closure(String),
    /// A geometric construction has no admissible solution.
    #[error("geometry error: {0}")]
    Geometry(String),
    /// A time step could not be completed.
    #[error("step error: {0}")]
    Step(String),
    /// The curve left the half-plane during a step.
    #[error("blow-up: {0}")]
    BlowUp(String),
    /// Reading or writing a file failed.
    #[error("io error: {0}")]
    Io(String),
}

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Io(e.to_string())
    }
}
