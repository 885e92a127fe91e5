use thiserror::Error;

/// Errors shared by every numerical layer of the crate.
#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("quadrature did not converge over [{lo:.6e}, {hi:.6e}] while {context}")]
    QuadratureNonConvergent { context: String, lo: f64, hi: f64 },

    #[error("tail of the integral diverges while {0}")]
    DivergentTail(String),

    #[error("{value:.6e} outside the attainable range [{lo:.6e}, {hi:.6e}] of {what}")]
    RangeError {
        what: String,
        value: f64,
        lo: f64,
        hi: f64,
    },

    #[error("operation requires an unbounded scaling profile (Assumption regime (ii)), got {0}")]
    UnsupportedRegime(String),

    #[error("kernel is only {available}-times differentiable, order {requested} requested")]
    InsufficientDifferentiability { requested: usize, available: usize },

    #[error("t = {t:.6e} too small: frequency cutoff {cutoff:.3e} exceeds {limit:.1e}")]
    TimeTooSmall { t: f64, cutoff: f64, limit: f64 },

    #[error("truncation remainder {remainder:.3e} exceeds {share:.0}% of the accumulated value {value:.3e}")]
    RemainderTooLarge {
        remainder: f64,
        value: f64,
        share: f64,
    },

    #[error("cube {0} exceeds the sampled box")]
    CubeOutOfBox(String),

    #[error("need at least {needed} time slices, got {got}")]
    TooFewSlices { needed: usize, got: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("unsupported dimension d = {0} for this operation")]
    UnsupportedDimension(usize),

    #[error("principal-value layer did not converge: last change {change:.3e}")]
    EpsilonLimitNonConvergent { change: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
