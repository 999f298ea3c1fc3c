//! Error type shared across the crate.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// A float sign decision landed inside the epsilon band.
    #[error("indeterminate sign decision: {context}")]
    Indeterminate { context: String },

    /// Parameter value at which the requested construction degenerates
    /// (k = 0, -2 or 1 depending on the operation).
    #[error("degenerate parameter k = {k}: {context}")]
    DegenerateParameter { k: String, context: String },

    /// A trilinear form was required to be integral but is not.
    #[error("non-integral trilinear coefficients at {offending:?}")]
    IntegralityError { offending: Vec<String> },

    /// Gradient vanishes at the point, so there is no tangent line.
    #[error("singular point on curve at ({0}, {1}, {2})")]
    SingularPoint(String, String, String),

    /// The requested branch label does not exist in the active regime.
    #[error("branch {branch} not available for regime {regime}")]
    InvalidBranch { branch: String, regime: String },

    /// Curve continuation failed to converge.
    #[error("trace corrector diverged: {0}")]
    TraceError(String),

    /// The curve is singular, so the component count is undefined.
    #[error("singular curve: {0}")]
    SingularCurveError(String),

    /// The polar matrix has rank <= 1, so the Steinian image is undefined.
    #[error("degenerate Steinian image: {0}")]
    DegenerateSteinian(String),

    /// The second polar of the point is the zero line.
    #[error("degenerate polar line at ({0}, {1}, {2})")]
    DegeneratePolar(String, String, String),

    /// A stated precondition does not hold.
    #[error("precondition violated: {0}")]
    Precondition(String),

    /// Input validation failure (CLI surface, file formats).
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

impl Error {
    pub fn precondition(msg: impl Into<String>) -> Self {
        Error::Precondition(msg.into())
    }

    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    pub fn is_indeterminate(&self) -> bool {
        matches!(self, Error::Indeterminate { .. })
    }
}
