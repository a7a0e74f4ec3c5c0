//! Approximate matrix multiplication through a probe system.
//!
//! Given square `A` and `B`, the product `C = AB` is constrained only through
//! `Cv = A(Bv)` for one probe vector `v`. The resulting underdetermined system
//! is turned into the regularized positive definite system
//! `(V^T V + eps I) c = V^T u`, solved by steepest descent with an `O(n^2)`
//! matrix-free operator, and reshaped into the estimate `C'`.
//!
//! The [`harness`] module measures the outcome against the exact product and
//! against a column/row sampling baseline.

pub mod error;
pub mod harness;
pub mod io;
pub mod matrix;
pub mod norms;
pub mod pipeline;
pub mod probe;
pub mod solver;

pub use error::{Error, Result};
pub use matrix::{gen_matrix, matmul_exact, matvec, DenseMatrix, Distribution, GenSpec, Vector};
pub use pipeline::{approx_multiply, flatten, reshape_solution, ApproxConfig, ApproxResult, SolverChoice};
pub use probe::{
    build_probe, compute_rhs, condition_bound, dense_gram, gram_matvec, ImplicitGram, ProbeSchedule,
    ProbeSystem, ProbeVector,
};
pub use solver::{
    closed_form_solve, steepest_descent, LinearOperator, SolverConfig, SolverReport, StepRule,
    Termination,
};
