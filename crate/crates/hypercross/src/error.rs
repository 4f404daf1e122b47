//! Crate-wide error type.

use thiserror::Error;

/// Errors surfaced by majorant validation, lattice enumeration, quadrature
/// and the experiment drivers.
#[derive(Debug, Error)]
pub enum Error {
    /// Input violates a domain precondition (wrong dimension, non-dyadic
    /// point for a table majorant, empty index layer, ...).
    #[error("domain error: {0}")]
    Domain(String),

    /// A parameter set fails validation (p/q/theta/alpha constraints,
    /// malformed majorant spec, unknown config fields).
    #[error("configuration error: {0}")]
    Config(String),

    /// Shell-wise tail summation failed to converge within the shell cap.
    #[error("convergence error: {0}")]
    Convergence(String),

    /// A quadrature grid cannot resolve the fastest oscillation present.
    #[error("resolution error: {0}")]
    Resolution(String),

    /// A certified bracket came out wider than the requested tolerance.
    #[error("accuracy error: {what} (value {value}, certificate width {width}, requested {requested})")]
    Accuracy {
        what: String,
        value: f64,
        width: f64,
        requested: f64,
    },

    /// A norm computation ran out of budget; carries the partial lower
    /// approximation accumulated so far (all terms are nonnegative).
    #[error("budget exhausted: {what} (partial lower approximation {partial})")]
    Budget { what: String, partial: f64 },

    /// Degenerate input (zero function where a ratio is required, empty
    /// data for a fit).
    #[error("degenerate input: {0}")]
    Degenerate(String),
}

pub type Result<T> = std::result::Result<T, Error>;
