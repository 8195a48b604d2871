use thiserror::Error;

use crate::lsq::FitResult;

/// Which stage of a stretched fit produced an error.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    Transition,
    Final,
}

impl std::fmt::Display for Stage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Stage::Transition => f.write_str("transition (stage 2)"),
            Stage::Final => f.write_str("final (stage 3)"),
        }
    }
}

#[derive(Debug, Error)]
pub enum Error {
    /// A constructor argument violated an invariant.
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    /// An argument lies outside the mathematical domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A caller-side precondition was not met (lengths, counts, ...).
    #[error("contract violation: {0}")]
    Contract(String),

    #[error("finite-difference step {step} is not smaller than the distance to the origin {distance}")]
    StepTooLarge { step: f64, distance: f64 },

    #[error("degenerate scale: input has zero spread")]
    DegenerateScale,

    #[error("sampler failure: no acceptance after {proposals} proposals")]
    SamplerFailure { proposals: u64 },

    #[error("singular fit: {0}")]
    Singular(String),

    #[error("numeric failure: {0}")]
    Numeric(String),

    /// Every start of an iterative fit stopped without meeting the tolerance.
    /// Carries the lowest-SSE result found.
    #[error("fit did not converge (best sse = {})", .0.sse)]
    NonConvergence(Box<FitResult>),

    #[error("{stage} fit failed: {source}")]
    Stage {
        stage: Stage,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    /// Strips any stage tagging and returns the underlying error.
    pub fn root(&self) -> &Error {
        match self {
            Error::Stage { source, .. } => source.root(),
            other => other,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
