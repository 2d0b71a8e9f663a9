//! Recurrence relations solved as triangular systems of equations.
//!
//! A feedforward computation `s_t = h_t(u, s_1..s_{t-1})`, `1 <= t <= T`,
//! is the unique zero of the triangular system `h_t(u, s_{1:t-1}) - s_t = 0`,
//! so iterative equation solvers can replace sequential evaluation. Jacobi
//! sweeps update every state in parallel and converge bit-exactly within
//! `T` sweeps; Gauss-Seidel sweeps are feedforward computation itself; the
//! block hybrids interpolate between the two. Systems whose dependency
//! graph is shallow converge in far fewer sweeps than `T`, which is where
//! the parallel speedup comes from.
//!
//! Module map:
//!
//! - [`system`] — the recurrence contract, ground-truth evaluation,
//!   residuals, forward differences, and mask validation;
//! - [`solver`] — the four sweep schemes with tracing and early stopping;
//! - [`dag`] — dependency-depth analysis and the idealized cost simulator;
//! - [`zoo`] — concrete systems to run the solvers on;
//! - [`partition`] — block partitions for the hybrid methods.

pub mod dag;
pub mod error;
pub mod partition;
pub mod solver;
pub mod system;
pub mod zoo;

pub use error::{Error, Result};
pub use partition::BlockPartition;
pub use solver::{
    exact_convergence_sweep, solve_gauss_seidel, solve_gs_jacobi, solve_jacobi, solve_jacobi_gs,
    Initializer, IterationTrace, Method, SolveResult, SolverConfig, StoppingReason, SweepRecord,
};
pub use system::{
    check_triangularity, feedforward_evaluate, forward_difference, residual, NormKind,
    RecurrenceSystem, StateSequence, TriangularityReport,
};
