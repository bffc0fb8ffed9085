use num_complex::Complex64;
use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Everything that can go wrong inside the library.
///
/// Variants split into two groups: input validation (caller's fault, see
/// [`Error::is_validation`]) and numerical failures (the algorithm could not
/// deliver the requested accuracy).
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("non-finite argument {0}")]
    NonFinite(Complex64),

    #[error("overflow while evaluating {what} at {arg}")]
    Overflow { what: &'static str, arg: Complex64 },

    #[error("root solver did not converge for {family} k={k} from seed {seed}")]
    RootNotConverged { family: String, k: usize, seed: Complex64 },

    #[error("duplicate root {root} in {family} (k={k})")]
    DuplicateRoot { family: String, k: usize, root: Complex64 },

    #[error("no poles exist at beta = 0; use the inertial closed forms")]
    InertialNoPoles,

    #[error("pole term {index} could not be evaluated: {source}")]
    PoleTerm {
        index: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("pole sum tail {tail:.3e} above tolerance {tol:.3e} at k_max={k_max}")]
    TailNotConverged { tail: f64, tol: f64, k_max: usize },

    #[error("quadrature failed: {0}")]
    Quadrature(String),

    #[error("epsilon extrapolation failed: {0}")]
    Extrapolation(String),

    #[error("integrator failed at t={t}: {reason}")]
    Integration { t: f64, reason: String },

    #[error("invalid density matrix: {0}")]
    InvalidState(String),

    #[error("corpus line {line}: {reason}")]
    Corpus { line: usize, reason: String },
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    /// True for errors caused by bad input rather than by the numerics.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::InvalidParameter { .. }
                | Error::NonFinite(_)
                | Error::InertialNoPoles
                | Error::InvalidState(_)
                | Error::Corpus { .. }
        )
    }
}
