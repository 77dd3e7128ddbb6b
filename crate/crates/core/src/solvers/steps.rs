//! Single iterations of each algorithm and the augmented Lagrangian.

use alloc::boxed::Box;
use alloc::vec::Vec;

use crate::error::{check_len, Error, Result};
use crate::linalg::{dist2, dot, DenseMatrix, XUpdateCache};
use crate::penalties::{
    hard_threshold, mcp_prox_exact_raw, mcp_prox_unified_raw, penalty_value_vec, top_k_indices, PenaltyFamily,
    PenaltyParams,
};
use crate::solvers::{IterationTrace, SolverState};

/// Which MCP proximal map drives the u-update.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProxKind {
    /// Exact global minimizer, three cases on `ρ` vs `1/γ`.
    Exact,
    /// The `ρ`-free unified approximation.
    Unified,
}

/// `‖b − Ax‖² + P(u) + wᵀ(x − u) + (ρ/2)‖x − u‖²`.
///
/// `penalty = None` stands for the ℓ0 indicator, which is zero on every
/// iterate the hard-thresholding variant produces.
pub fn augmented_lagrangian(
    state: &SolverState,
    a: &DenseMatrix,
    b: &[f64],
    penalty: Option<&PenaltyParams>,
    rho: f64,
) -> Result<f64> {
    let n = a.cols();
    check_len("x", n, state.x.len())?;
    check_len("u", n, state.u.len())?;
    check_len("w", n, state.w.len())?;
    check_len("observation b", a.rows(), b.len())?;
    Ok(lagrangian_unchecked(state, a, b, penalty, rho))
}

pub(crate) fn lagrangian_unchecked(
    state: &SolverState,
    a: &DenseMatrix,
    b: &[f64],
    penalty: Option<&PenaltyParams>,
    rho: f64,
) -> f64 {
    let fit = residual_sq(a, b, &state.x);
    let pen = penalty.map_or(0.0, |p| penalty_value_vec(&state.u, p));
    let mut coupling = 0.0;
    let mut gap_sq = 0.0;
    for i in 0..state.x.len() {
        let d = state.x[i] - state.u[i];
        coupling += state.w[i] * d;
        gap_sq += d * d;
    }
    fit + pen + coupling + 0.5 * rho * gap_sq
}

/// `‖b − Ax‖²`.
pub fn residual_sq(a: &DenseMatrix, b: &[f64], x: &[f64]) -> f64 {
    let ax = a.mul_vec_unchecked(x);
    ax.iter().zip(b).map(|(p, q)| (q - p) * (q - p)).sum()
}

/// Change in the augmented Lagrangian caused by the u-update alone,
/// `L(xᵏ, uᵏ⁺¹, wᵏ) − L(xᵏ, uᵏ, wᵏ)`. The data-fit term cancels, so this is O(N).
pub(crate) fn u_step_change(before: &SolverState, u_next: &[f64], params: &PenaltyParams, rho: f64) -> f64 {
    let mut delta = penalty_value_vec(u_next, params) - penalty_value_vec(&before.u, params);
    for i in 0..before.x.len() {
        let (x, w) = (before.x[i], before.w[i]);
        let (new, old) = (x - u_next[i], x - before.u[i]);
        delta += w * (new - old) + 0.5 * rho * (new * new - old * old);
    }
    delta
}

fn check_state(state: &SolverState, n: usize) -> Result<()> {
    check_len("x", n, state.x.len())?;
    check_len("u", n, state.u.len())?;
    check_len("w", n, state.w.len())
}

/// The u-update argument `xᵏ + wᵏ/ρ`.
pub(crate) fn shifted(state: &SolverState, rho: f64) -> Vec<f64> {
    state.x.iter().zip(&state.w).map(|(x, w)| x + w / rho).collect()
}

/// x-update then multiplier update, given the fresh `u`.
fn finish_admm_step(state: &SolverState, cache: &XUpdateCache<'_>, u: Vec<f64>) -> Result<SolverState> {
    let rho = cache.rho();
    let x = cache.solve_x_update(&u, &state.w)?;
    let w: Vec<f64> = state.w.iter().zip(x.iter().zip(&u)).map(|(w, (x, u))| w + rho * (x - u)).collect();
    let next = SolverState { x, u, w, k: state.k + 1 };
    if next.is_finite() {
        Ok(next)
    } else {
        Err(Error::Diverged { iteration: next.k, trace: Box::new(IterationTrace::default()) })
    }
}

/// One ADMM-MCP iteration: `u ← prox(x + w/ρ)` elementwise, then the cached
/// x-solve, then `w ← w + ρ(x − u)`.
pub fn admm_mcp_step(
    state: &SolverState,
    cache: &XUpdateCache<'_>,
    params: &PenaltyParams,
    prox: ProxKind,
) -> Result<SolverState> {
    check_state(state, cache.matrix().cols())?;
    if params.family() != PenaltyFamily::Mcp {
        return Err(Error::InvalidInput("ADMM-MCP step needs MCP parameters".into()));
    }
    let rho = cache.rho();
    let (lambda, gamma) = (params.lambda(), params.gamma());
    let u: Vec<f64> = shifted(state, rho)
        .into_iter()
        .map(|s| match prox {
            ProxKind::Exact => mcp_prox_exact_raw(s, lambda, gamma, rho).value,
            ProxKind::Unified => mcp_prox_unified_raw(s, lambda, gamma).value,
        })
        .collect();
    finish_admm_step(state, cache, u)
}

/// One hard-thresholding ADMM iteration: `u ← H_τ(x + w/ρ)`, then the same x-
/// and w-updates as ADMM-MCP.
pub fn admm_l0_step(state: &SolverState, cache: &XUpdateCache<'_>, tau: usize) -> Result<SolverState> {
    let n = cache.matrix().cols();
    check_state(state, n)?;
    check_tau(tau, n)?;
    let u = hard_threshold(&shifted(state, cache.rho()), tau)?;
    finish_admm_step(state, cache, u)
}

pub(crate) fn check_tau(tau: usize, n: usize) -> Result<()> {
    if tau >= 1 && tau <= n {
        Ok(())
    } else {
        Err(Error::InvalidInput(alloc::format!("tau = {tau} must lie in 1..={n}")))
    }
}

/// `Aᵀ(b − Ax)`.
fn neg_half_gradient(a: &DenseMatrix, b: &[f64], x: &[f64]) -> Vec<f64> {
    let ax = a.mul_vec_unchecked(x);
    let r: Vec<f64> = b.iter().zip(&ax).map(|(b, p)| b - p).collect();
    a.tr_mul_vec_unchecked(&r)
}

fn check_iht(x: &[f64], a: &DenseMatrix, b: &[f64], tau: usize) -> Result<()> {
    check_len("x", a.cols(), x.len())?;
    check_len("observation b", a.rows(), b.len())?;
    check_tau(tau, a.cols())
}

/// `H_τ(x + Aᵀ(b − Ax))`.
pub fn iht_step(x: &[f64], a: &DenseMatrix, b: &[f64], tau: usize) -> Result<Vec<f64>> {
    check_iht(x, a, b, tau)?;
    let g = neg_half_gradient(a, b, x);
    let z: Vec<f64> = x.iter().zip(&g).map(|(x, g)| x + g).collect();
    hard_threshold(&z, tau)
}

/// Normalized IHT: `H_τ(x + μ g)` with `g = Aᵀ(b − Ax)` and
/// `μ = ‖g_Γ‖² / ‖A g_Γ‖²`, where `Γ` is the top-τ support of `x` (of `g` when
/// `x = 0`). Falls back to `μ = 1` when `A g_Γ = 0`.
pub fn niht_step(x: &[f64], a: &DenseMatrix, b: &[f64], tau: usize) -> Result<Vec<f64>> {
    check_iht(x, a, b, tau)?;
    let g = neg_half_gradient(a, b, x);
    let support = if x.iter().all(|&v| v == 0.0) { top_k_indices(&g, tau) } else { top_k_indices(x, tau) };
    let mut g_support = alloc::vec![0.0; g.len()];
    for &i in &support {
        g_support[i] = g[i];
    }
    let num = dot(&g_support, &g_support);
    let ag = a.mul_vec_unchecked(&g_support);
    let den = dot(&ag, &ag);
    let mu = if den > 0.0 { num / den } else { 1.0 };
    let z: Vec<f64> = x.iter().zip(&g).map(|(x, g)| x + mu * g).collect();
    hard_threshold(&z, tau)
}

/// Norms of the three per-iteration increments.
pub(crate) fn increments(before: &SolverState, after: &SolverState) -> (f64, f64, f64) {
    (dist2(&after.x, &before.x), dist2(&after.u, &before.u), dist2(&after.w, &before.w))
}
