use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("n_max = {n_max} captures only {captured:.9} of the coherent state (need at least 1 - 1e-6)")]
    ClippedInitialState { n_max: usize, captured: f64 },

    #[error("norm drifted by {drift:.3e} at t = {t} (step size too large?)")]
    NormDrift { t: f64, drift: f64 },

    #[error("population {tail:.3e} reached the top Fock indices at t = {t} (n_max too small?)")]
    TruncationOverflow { t: f64, tail: f64 },

    #[error("dense propagation needs n_max <= {limit}, got {n_max}")]
    DenseTooLarge { n_max: usize, limit: usize },

    #[error("dense eigendecomposition failed: {0}")]
    Eigensolver(String),
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    /// True for failures of the integration itself, as opposed to bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::NormDrift { .. } | Error::TruncationOverflow { .. } | Error::Eigensolver(_)
        )
    }
}
