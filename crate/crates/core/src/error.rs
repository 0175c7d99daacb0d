use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// A model parameter violates its invariant.
    #[error("invalid parameter {field}: {message}")]
    InvalidParam {
        field: &'static str,
        message: String,
    },

    /// An operation was called outside its mathematical domain.
    #[error("domain error: {0}")]
    Domain(String),

    /// The surplus is indistinguishable from zero, so the measured
    /// temperature would be unbounded.
    #[error("temperature unbounded: surplus indistinguishable from zero")]
    UnboundedTemperature,

    /// The self-consistency iteration did not converge within its budget.
    #[error(
        "self-consistency iteration failed to converge after {evaluations} \
         evaluations (final bracket [{lo}, {hi}])"
    )]
    NonConvergence {
        evaluations: usize,
        lo: f64,
        hi: f64,
    },

    /// Exhaustive enumeration was requested for a system above the cap.
    #[error("system too large: N = {n} exceeds the enumeration cap of {max}")]
    TooLarge { n: usize, max: usize },

    /// The operation does not apply to this configuration.
    #[error("{0}")]
    Misuse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
