use alloc::string::String;

/// Errors raised by the numerical kernels.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// An argument lies outside the domain where the quantity is defined.
    #[error("domain error: {0}")]
    Domain(String),
    /// An exhaustive enumeration would exceed the configured cap.
    #[error("resource limit: {requested} items requested, cap is {cap}")]
    Resource { requested: u128, cap: u128 },
    /// A series did not reach its tolerance within the hard term cap.
    #[error("series did not converge after {terms} terms: {context}")]
    Divergence { terms: usize, context: String },
    /// The requested accuracy is not attainable with the given budget.
    #[error("accuracy {requested:e} not reached (achieved {achieved:e}): {context}")]
    Accuracy {
        requested: f64,
        achieved: f64,
        context: String,
    },
    /// Finite digit precision cannot resolve the answer.
    #[error("precision exhausted: {0}")]
    Precision(String),
    /// Probability outside the sampling window exceeds the allowed bound.
    #[error("window too small: clipped mass {clipped:e} exceeds {bound:e}")]
    WindowTooSmall { clipped: f64, bound: f64 },
    /// A constructive procedure has no valid output for these inputs.
    #[error("construction failed: {0}")]
    Construction(String),
}

pub type Result<T> = core::result::Result<T, Error>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}
