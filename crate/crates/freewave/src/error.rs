//! Error types shared across the crate.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Failure modes surfaced by packet construction, quadrature, and the
/// long-time analysis routines.
#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// The sampled momentum window truncates the packet.
    #[error("momentum grid too narrow: |amplitude({k})| = {amplitude:.3e} exceeds {limit:.1e} at the boundary")]
    GridTooNarrow { k: f64, amplitude: f64, limit: f64 },

    /// Every derivative coefficient up to the probe cap sits below threshold.
    #[error("small-momentum order undetectable: all derivative coefficients up to j = {cap} lie below threshold")]
    OrderUndetectable { cap: usize },

    #[error("not applicable: {0}")]
    NotApplicable(String),

    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    /// The position-space integration window truncates the packet.
    #[error("integration window too narrow: {0}")]
    WindowTooNarrow(String),

    /// Momentum sampling too coarse for the requested oscillatory phase.
    #[error("momentum sampling violates the resolution rule: need at least {required} grid intervals, have {actual}")]
    Aliasing { required: usize, actual: usize },

    /// A vanishing-derivative precondition fails at the named order.
    #[error("derivative coefficient at j = {j} is not negligible (|value| = {magnitude:.3e}); coefficients below the leading order must vanish")]
    Precondition { j: usize, magnitude: f64 },

    #[error("numerical failure: {0}")]
    NumericalFailure(String),

    #[error("domain error: {0}")]
    Domain(String),
}
