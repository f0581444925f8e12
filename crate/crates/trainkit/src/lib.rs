//! Symbolic-numeric toolkit for "function trains": infinite series of compactly
//! supported pieces (triangles, power-law triangles, smooth bumps) laid out on a
//! unit lattice with dyadically shrinking widths.
//!
//! Trains are lazy and exact: pieces are materialized on demand from closed-form
//! geometry, series tails are bounded analytically, and every reported norm or
//! distance carries a certified error bound. On top of the core sit constructive
//! approximation routines (polygonal compression with a budgeted certificate) and
//! a deterministic verification suite with a machine-readable report.

pub mod approx;
pub mod cli;
pub mod families;
pub mod metrics;
pub mod piecewise;
pub mod verify;

pub use metrics::{MetricValue, ToleranceConfig};
pub use piecewise::{CombinedFunction, FinitePiecewise, Interval, LazyTrain, Piece, PieceKind};

/// Errors surfaced by construction, evaluation and analysis entry points.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// Input outside the domain of the operation (negative abscissa, NaN, ...).
    #[error("domain error: {0}")]
    Domain(String),

    /// A structurally invalid parameter (bad tolerance, empty combination, ...).
    #[error("invalid parameter: {0}")]
    Parameter(String),

    /// The operation is defined only for a narrower class of inputs.
    #[error("unsupported operation: {0}")]
    Unsupported(String),

    /// An integer computation left the representable range.
    #[error("overflow: {0}")]
    Overflow(String),

    /// An iterative routine exhausted its work budget before certifying its goal.
    #[error("budget exhausted: {0}")]
    Budget(String),

    /// Malformed textual input (family specs, CLI ranges).
    #[error("parse error: {0}")]
    Parse(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
