use thiserror::Error;

/// Errors raised while building, classifying or sampling a constrained normal.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("covariance is not symmetric: |S[{row},{col}] - S[{col},{row}]| = {gap:e}")]
    NotSymmetric { row: usize, col: usize, gap: f64 },

    #[error("covariance is not positive semi-definite: eigenvalue {eigenvalue:e}")]
    NotPsd { eigenvalue: f64 },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("non-finite entry in {0}")]
    NonFinite(&'static str),

    #[error("equality Gram matrix C*Sigma*C^T is singular after removing redundant rows")]
    SingularEqualityGram,

    #[error(
        "feasible region is lower-dimensional but not a single point \
         (widest coordinate range {width:e}); it has zero Gaussian measure"
    )]
    DegenerateRegion { width: f64 },

    #[error("feasible arc set is numerically empty at a feasible chain state")]
    EmptyArcSet,

    #[error("chain state violates the inequalities (minimum slack {slack:e})")]
    InfeasibleChainState { slack: f64 },

    #[error("simplex iteration cap of {0} reached")]
    CyclingGuardExceeded(usize),

    #[error("all samples are identical; moments of a point mass have no standard error")]
    DegenerateSamples,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;
