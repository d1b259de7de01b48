use std::fmt;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Why an unpenalized point-process fit was judged not to have a maximizer.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DivergenceKind {
    /// Iterates pressed against the boundary of the parameter space.
    Boundary,
    /// Parameter norm grew without bound while the objective kept increasing.
    Unbounded,
    /// No events and no penalty: the objective has no maximizer.
    NoData,
}

impl fmt::Display for DivergenceKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DivergenceKind::Boundary => f.write_str("iterates approach the boundary of the parameter space"),
            DivergenceKind::Unbounded => f.write_str("parameters diverge to infinity"),
            DivergenceKind::NoData => f.write_str("no events and zero penalty"),
        }
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid data: {0}")]
    InvalidData(String),

    #[error("both classes are required, found {ones} positive and {zeros} negative rows")]
    SingleClass { ones: usize, zeros: usize },

    #[error("support is contained in a hyperplane (affine rank {rank} < dimension {dim})")]
    DegenerateSupport { rank: usize, dim: usize },

    #[error("event point {index} does not belong to the support of the covariate distribution")]
    PointOutsideSupport { index: usize },

    #[error("perfect separation: objective unbounded (parameter norm {norm:.3e} after {iterations} iterations)")]
    PerfectSeparation { iterations: usize, norm: f64 },

    #[error("divergence detected: {kind}; the maximum likelihood estimate may not exist")]
    Divergence { kind: DivergenceKind, iterations: usize },

    #[error("root solver did not converge: {0}")]
    RootNotConverged(String),

    #[error("unknown link family `{0}`")]
    UnknownLink(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn invalid_arg(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub(crate) fn invalid_data(msg: impl Into<String>) -> Self {
        Error::InvalidData(msg.into())
    }

    /// True for problems with user-supplied data files and values.
    pub fn is_data_error(&self) -> bool {
        matches!(
            self,
            Error::InvalidData(_)
                | Error::SingleClass { .. }
                | Error::DegenerateSupport { .. }
                | Error::PointOutsideSupport { .. }
                | Error::Csv(_)
        )
    }

    pub fn is_divergence(&self) -> bool {
        matches!(self, Error::PerfectSeparation { .. } | Error::Divergence { .. })
    }
}
