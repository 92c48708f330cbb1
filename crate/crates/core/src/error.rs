use thiserror::Error;

/// Failure modes shared by all modules of the crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("undefined roots: zero polynomial")]
    UndefinedRoots,
    #[error("root residual {residual:e} exceeds tolerance")]
    RootResidual { residual: f64 },
    #[error("pole at s = {re} + {im}i")]
    Pole { re: f64, im: f64 },
    #[error("invalid parameter: {0}")]
    Parameter(String),
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("port signature mismatch: {0}")]
    Signature(String),
    #[error("singular interconnection: {0}")]
    SingularInterconnection(String),
    #[error("ideal limit undefined: {0}")]
    IdealUndefined(String),
    #[error("Nyquist precondition violated: {0}")]
    NyquistPrecondition(String),
    #[error("non-real coefficients")]
    NonReal,
    #[error("singular matrix")]
    Singular,
    #[error("eigenvalue iteration did not converge")]
    NoConvergence,
    #[error("CARE not solvable: {0}")]
    CareNotSolvable(String),
    #[error("conditioning guard: {0}")]
    ConditioningGuard(String),
    #[error("internal consistency: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;
