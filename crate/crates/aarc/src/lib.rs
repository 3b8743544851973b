//! Adaptive cubic-regularized Newton methods with estimate-sequence acceleration,
//! plus first-order companions, for unconstrained convex minimization.
//!
//! The crate is organized around a small number of building blocks:
//!
//! - [`objective`]: the [`Objective`](objective::Objective) trait, a regularized
//!   logistic-regression objective over dense datasets, and synthetic test
//!   functions with known constants (`quadratic`, `log_sum_exp`,
//!   `separable_convex_quartic`).
//! - [`libsvm`]: a strict LIBSVM-format reader/writer (plain or gzip) and
//!   feature normalization.
//! - [`subproblem`]: the cubic-regularized model `f + s'g + s'Hs/2 + sigma/3 |s|^3`,
//!   a dense eigendecomposition-based solver for it, and a Lanczos (Krylov)
//!   solver that only needs Hessian-vector products.
//! - [`fdhess`]: finite-difference Hessian approximations built from gradient
//!   probes, and the coupled step/step-size search used by the derivative-free
//!   second-order solver.
//! - [`estimate`]: the cubic and quadratic estimate-sequence state driving the
//!   accelerated phase.
//! - [`solver`]: the two-phase accelerated solvers (`AARC`, `AARC-Q`, `AAGD`),
//!   their classical baselines (`ARC`, `AGD`), the hybrid variant, and the
//!   restart wrapper, all emitting per-iteration traces.
//! - [`datagen`]: deterministic, seeded stand-ins for the classic binary
//!   classification benchmark sets, with the published shapes.
//!
//! # Parallelism
//!
//! With the default `parallel` feature the per-sample reductions (objective
//! values, gradients, Hessian-vector products) and finite-difference column
//! builds run on rayon. Reductions are chunked with a fixed chunk size and the
//! per-chunk partials are folded in chunk order, so the parallel and
//! sequential builds produce bit-identical floating-point results and
//! re-running a solve reproduces its trace exactly.

pub mod datagen;
pub mod estimate;
pub mod fdhess;
pub mod libsvm;
pub mod objective;
pub mod parallel;
pub mod solver;
pub mod subproblem;

pub use objective::{Capabilities, Dataset, Evaluation, Objective, TestFunctionMeta};
pub use solver::{RunStatus, SolverConfig, SolverRun, TraceRecord};
