//! Josephy–Newton and Josephy–Halley iterations for generalized equations
//! `0 ∈ f(x) + F(x)` in arbitrary-precision arithmetic, with a
//! Kantorovich-type majorant certificate and a benchmark harness.
//!
//! ```
//! use genequ::prelude::*;
//!
//! let ctx = PrecisionContext::new(60).unwrap();
//! let problem = builtin("ex2i", ctx).unwrap();
//! let mut cfg = SolveConfig::with_digits(Method::Halley, 60);
//! cfg.tol = ctx.pow10(-50);
//! let trace = run(&problem, problem.default_start.as_ref().unwrap(), &cfg).unwrap();
//! assert!(trace.converged());
//! ```

pub mod bench;
pub mod error;
pub mod kantorovich;
pub mod numerics;
pub mod problems;
pub mod rates;
pub mod solver;
pub mod subproblem;

pub use error::{Error, Result};

pub mod prelude {
    pub use crate::error::{Error, Result};
    pub use crate::numerics::{euclidean_norm, solve_linear, Matrix, PrecisionContext, Scalar, Vector};
    pub use crate::problems::{builtin, BranchKind, ProblemInstance, Residual, SetValuedMap, SmoothMap};
    pub use crate::solver::{classical_halley_step, run, IterationTrace, Method, SolveConfig, Status};
}
