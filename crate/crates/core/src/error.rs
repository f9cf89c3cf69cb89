use thiserror::Error;

/// Errors raised by the solver toolkit.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("matrix is singular to working precision")]
    SingularMatrix,

    #[error("precision of {0} digits is below the minimum of 16")]
    InvalidPrecision(u32),

    #[error("cannot parse {0:?} as a decimal number")]
    Parse(String),

    #[error("unknown problem {0:?}")]
    UnknownProblem(String),

    #[error("unknown problem parameter {0:?}")]
    UnknownParameter(String),

    #[error("no branch pattern yields a feasible solution of the inclusion")]
    NoSolution,

    #[error("non-finite value encountered in {0}")]
    NonFinite(&'static str),

    #[error("derivative vanishes at the current point")]
    ZeroDerivative,

    #[error("majorant parameters not admissible: eta = {eta} is not below {threshold}")]
    NotAdmissible { eta: String, threshold: String },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("solver failed: {0}")]
    SolverFailure(String),
}

pub type Result<T> = std::result::Result<T, Error>;
