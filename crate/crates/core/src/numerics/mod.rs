//! Arbitrary-precision scalars and the small dense linear algebra the solvers
//! need. Scalars are backed by MPFR; every value carries at least the
//! context's number of significant decimal digits.

mod linalg;
mod scalar;

pub use linalg::{euclidean_norm, solve_linear, Matrix, Vector};
pub use scalar::{PrecisionContext, Scalar};
