//! Synthetic instances, the success criterion and trace capture.
//!
//! Instances follow the standard compressed-sensing benchmark: `A` has
//! independent entries `±1/√M`, `x0` has `τ` nonzeros of value `±1` on a
//! uniformly random support, and `b = A x0 + e` with `e ~ N(0, σ²)`.
//! Each ingredient draws from its own substream of the seed, so changing `σ`
//! never reshuffles `A` or `x0`.

use alloc::vec::Vec;

use crate::error::{check_len, Error, Result};
use crate::linalg::{dist2, norm2, DenseMatrix};
use crate::problem::ProblemInstance;
use crate::rng::SplitMix64;
use crate::solvers::{run_solver, IterationTrace, SolverConfig};

/// Success threshold on `‖x0 − x̂‖/‖x0‖`.
pub const DEFAULT_SUCCESS_TOL: f64 = 0.01;

const STREAM_MATRIX: u64 = 1;
const STREAM_SUPPORT: u64 = 2;
const STREAM_SIGNS: u64 = 3;
const STREAM_NOISE: u64 = 4;

/// Draws a seeded benchmark instance. Requires `1 ≤ τ ≤ M < N` and `σ ≥ 0`.
pub fn generate_instance(n: usize, m: usize, tau: usize, sigma: f64, seed: u64) -> Result<ProblemInstance> {
    if tau == 0 {
        return Err(Error::InvalidInput("tau must be at least 1".into()));
    }
    if tau > m {
        return Err(Error::InvalidInput(alloc::format!("tau <= m violated: tau = {tau}, m = {m}")));
    }
    if m >= n {
        return Err(Error::InvalidInput(alloc::format!("m < n violated: m = {m}, n = {n}")));
    }
    if !(sigma >= 0.0) || !sigma.is_finite() {
        return Err(Error::InvalidParameter {
            name: "sigma",
            value: sigma,
            reason: "noise level must be finite and non-negative",
        });
    }

    let scale = 1.0 / libm::sqrt(m as f64);
    let mut rng = SplitMix64::substream(seed, STREAM_MATRIX);
    let a = DenseMatrix::from_fn(m, n, |_, _| scale * rng.next_sign())?;

    // Partial Fisher-Yates: the first τ slots are a uniform τ-subset.
    let mut rng = SplitMix64::substream(seed, STREAM_SUPPORT);
    let mut perm: Vec<usize> = (0..n).collect();
    for i in 0..tau {
        let j = i + rng.next_below((n - i) as u64) as usize;
        perm.swap(i, j);
    }
    let mut support = perm[..tau].to_vec();
    support.sort_unstable();

    let mut rng = SplitMix64::substream(seed, STREAM_SIGNS);
    let mut x0 = alloc::vec![0.0; n];
    for &i in &support {
        x0[i] = rng.next_sign();
    }

    let mut b = a.mul_vec_unchecked(&x0);
    if sigma > 0.0 {
        let mut rng = SplitMix64::substream(seed, STREAM_NOISE);
        for bi in b.iter_mut() {
            *bi += sigma * rng.next_gaussian();
        }
    }

    Ok(ProblemInstance { a, b, x0: Some(x0), sigma, tau, seed })
}

/// `‖x0 − x̂‖₂ / ‖x0‖₂`.
pub fn relative_error(x0: &[f64], x_hat: &[f64]) -> Result<f64> {
    check_len("recovered signal", x0.len(), x_hat.len())?;
    let nrm = norm2(x0);
    if nrm == 0.0 {
        return Err(Error::InvalidInput("relative error against a zero ground truth".into()));
    }
    Ok(dist2(x0, x_hat) / nrm)
}

/// Exact-recovery test: relative error at most `tol` (inclusive).
pub fn is_success(x0: &[f64], x_hat: &[f64], tol: f64) -> Result<bool> {
    Ok(relative_error(x0, x_hat)? <= tol)
}

/// Runs the solver and returns its per-iteration trace. A diverged run comes
/// back as [`Error::Diverged`] holding the partial trace.
pub fn capture_trace(problem: &ProblemInstance, config: &SolverConfig) -> Result<IterationTrace> {
    run_solver(problem, config).map(|s| s.trace)
}
