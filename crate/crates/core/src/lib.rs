//! Sparse signal recovery with ADMM and the minimax concave penalty (MCP).
//!
//! The crate solves the sparsity-constrained least-squares problem
//!
//! ```text
//! minimize ||b - A x||^2   subject to   ||x||_0 <= tau
//! ```
//!
//! by relaxing the constraint with MCP and splitting `x = u` under ADMM.
//! Alongside the MCP solver it carries a hard-thresholding ADMM variant and
//! the IHT / NIHT baselines, plus a seeded instance generator so every
//! experiment is a pure function of its seed.
//!
//! Everything here is `no_std` + `alloc`. File formats, the sweep driver
//! and the command line live in the `admm-mcp` companion crate.

#![no_std]
#![forbid(unsafe_code)]
#![allow(clippy::needless_range_loop, clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod error;
pub mod experiments;
pub mod linalg;
pub mod penalties;
pub mod problem;
pub mod rng;
pub mod solvers;

pub use error::{Error, Result};
pub use experiments::{capture_trace, generate_instance, is_success, relative_error};
pub use linalg::{spectral_norm_sq, DenseMatrix, XUpdateCache};
pub use penalties::{PenaltyFamily, PenaltyParams, ProxBranch, ProxResult};
pub use problem::ProblemInstance;
pub use solvers::{
    run_solver, run_solver_from, run_solver_observed, Algorithm, IterationTrace, LambdaStrategy, RhoMode, Solution,
    SolverConfig, SolverState, TraceRecord,
};
