use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Boxed error produced by a user-supplied objective.
pub type ObjectiveError = Box<dyn std::error::Error + Send + Sync + 'static>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error(
        "cholesky factorization of a {size}x{size} matrix failed with jitter up to {jitter:e} \
         (diagonal in [{min_diag:e}, {max_diag:e}], ratio {ratio:e})"
    )]
    Factorization {
        size: usize,
        jitter: f64,
        min_diag: f64,
        max_diag: f64,
        ratio: f64,
    },

    #[error("objective failed in round {round}: {source}")]
    Objective {
        round: usize,
        #[source]
        source: ObjectiveError,
    },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}

pub(crate) fn check_dim(expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, got })
    }
}
