//! Choosing `λ` (fixed, adaptive, grid) and `ρ` (paper, theory, explicit).

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::linalg::{norm_inf, spectral_norm_sq, DenseMatrix};
use crate::penalties::kth_largest_magnitude;
use crate::problem::ProblemInstance;
use crate::solvers::steps::check_tau;
use crate::solvers::{run_with_lambda, Algorithm, RhoMode, Solution, SolverConfig};

/// Lower bound returned by [`adaptive_lambda`] when the τ-th largest entry is 0.
pub const LAMBDA_FLOOR: f64 = 1e-12;

/// `ρ` used by the reference experiments.
pub const PAPER_RHO: f64 = 0.1;

/// Safety factor on the convergence lower bound for [`RhoMode::Theory`].
pub const THEORY_RHO_FACTOR: f64 = 1.05;

/// Entries with `|x̂ᵢ| > SPARSITY_RTOL · max(1, ‖x̂‖∞)` count as nonzero.
pub const SPARSITY_RTOL: f64 = 1e-6;

pub const GRID_LEN: usize = 20;

/// `λ = z_τ / γ`, where `z_τ` is the τ-th largest entry of `|x + w/ρ|`.
pub fn adaptive_lambda(x: &[f64], w: &[f64], rho: f64, tau: usize, gamma: f64) -> Result<f64> {
    crate::error::check_len("w", x.len(), w.len())?;
    check_tau(tau, x.len())?;
    if !(gamma > 1.0) {
        return Err(Error::InvalidParameter { name: "gamma", value: gamma, reason: "MCP requires gamma > 1" });
    }
    let s: Vec<f64> = x.iter().zip(w).map(|(x, w)| x + w / rho).collect();
    let z_tau = kth_largest_magnitude(&s, tau)?;
    Ok(if z_tau > 0.0 { z_tau / gamma } else { LAMBDA_FLOOR })
}

/// `ρ` for the configured mode.
///
/// The theory preset is `1.05 · max{1/γ, √2·l, l}` with `l = 2σ_max(A)²`, the
/// Lipschitz constant of `∇‖b − Ax‖²`.
pub fn resolve_rho(a: &DenseMatrix, config: &SolverConfig) -> Result<f64> {
    match config.rho_mode {
        RhoMode::Paper => Ok(PAPER_RHO),
        RhoMode::Explicit(rho) if rho > 0.0 && rho.is_finite() => Ok(rho),
        RhoMode::Explicit(rho) => {
            Err(Error::InvalidParameter { name: "rho", value: rho, reason: "must be positive and finite" })
        }
        RhoMode::Theory => Ok(theory_rho(spectral_norm_sq(a)?, config.gamma)),
    }
}

/// Theory preset from a known `σ_max(A)²`.
pub fn theory_rho(sigma_max_sq: f64, gamma: f64) -> f64 {
    let lipschitz = 2.0 * sigma_max_sq;
    let bound = f64::max(1.0 / gamma, f64::max(core::f64::consts::SQRT_2 * lipschitz, lipschitz));
    THEORY_RHO_FACTOR * bound
}

/// `[10^-2, 10^-1.9, …, 10^-0.1]`.
pub fn lambda_grid() -> [f64; GRID_LEN] {
    core::array::from_fn(|i| libm::pow(10.0, -2.0 + 0.1 * i as f64))
}

/// Number of numerically nonzero entries.
pub fn sparsity_count(x: &[f64]) -> usize {
    let cutoff = SPARSITY_RTOL * f64::max(1.0, norm_inf(x));
    x.iter().filter(|v| v.abs() > cutoff).count()
}

/// Picks the grid index with the sparsest solution. Ties go to the candidate
/// whose grid neighbours differ least in sparsity (`|s(prev) − s(next)|`, or
/// `|s(self) − s(neighbour)|` at the ends of the grid), then to the lowest
/// index. `None` entries are diverged runs; they are never chosen and do not
/// count as neighbours.
pub fn select_grid_index(sparsities: &[Option<usize>]) -> Option<usize> {
    let best = sparsities.iter().flatten().min()?;
    let candidates: Vec<usize> = (0..sparsities.len()).filter(|&i| sparsities[i] == Some(*best)).collect();
    if candidates.len() == 1 {
        return Some(candidates[0]);
    }
    let at = |i: Option<usize>| i.and_then(|i| sparsities.get(i).copied().flatten());
    let neighbour_gap = |i: usize| -> usize {
        let prev = at(i.checked_sub(1));
        let next = at(Some(i + 1));
        let own = *best;
        match (prev, next) {
            (Some(p), Some(q)) => p.abs_diff(q),
            (Some(p), None) => p.abs_diff(own),
            (None, Some(q)) => q.abs_diff(own),
            (None, None) => 0,
        }
    };
    candidates.into_iter().min_by_key(|&i| (neighbour_gap(i), i))
}

/// Outcome of one grid run.
#[derive(Debug, Clone, PartialEq)]
pub struct GridPoint {
    pub lambda: f64,
    /// `None` when the run diverged.
    pub sparsity: Option<usize>,
    pub converged: bool,
    pub iterations: usize,
}

#[derive(Debug, Clone)]
pub struct GridSelection {
    pub lambda: f64,
    pub index: usize,
    pub points: Vec<GridPoint>,
    /// The full solution at the selected `λ`.
    pub solution: Solution,
}

/// Runs the solver once per grid `λ` (as a fixed `λ`) and keeps the sparsest
/// solution, see [`select_grid_index`].
pub fn lambda_grid_select(problem: &ProblemInstance, config: &SolverConfig) -> Result<GridSelection> {
    if !config.algorithm.uses_lambda() {
        return Err(Error::InvalidInput(alloc::format!(
            "lambda grid selection does not apply to {}",
            config.algorithm.tag()
        )));
    }
    config.validate()?;
    problem.validate()?;
    let rho = resolve_rho(&problem.a, config)?;
    let cache = crate::linalg::XUpdateCache::build(&problem.a, &problem.b, rho)?;
    let grid = lambda_grid();
    let mut points = Vec::with_capacity(GRID_LEN);
    let mut solutions: Vec<Option<Solution>> = Vec::with_capacity(GRID_LEN);
    for &lambda in &grid {
        match run_with_lambda(problem, config, rho, Some(&cache), Some(lambda), None, &mut |_| {}) {
            Ok(sol) => {
                points.push(GridPoint {
                    lambda,
                    sparsity: Some(sparsity_count(&sol.x_hat)),
                    converged: sol.converged,
                    iterations: sol.iterations,
                });
                solutions.push(Some(sol));
            }
            Err(Error::Diverged { iteration, .. }) => {
                points.push(GridPoint { lambda, sparsity: None, converged: false, iterations: iteration });
                solutions.push(None);
            }
            Err(e) => return Err(e),
        }
    }
    let sparsities: Vec<Option<usize>> = points.iter().map(|p| p.sparsity).collect();
    let index = select_grid_index(&sparsities).ok_or_else(|| Error::GridExhausted(points.clone()))?;
    let mut solution = solutions[index].take().expect("selected run converged or stopped");
    solution.final_lambda = Some(grid[index]);
    Ok(GridSelection { lambda: grid[index], index, points, solution })
}

impl Algorithm {
    /// Whether the algorithm is driven by an MCP `λ`.
    pub fn uses_lambda(self) -> bool {
        matches!(self, Algorithm::AdmmMcpExact | Algorithm::AdmmMcpUnified)
    }
}
