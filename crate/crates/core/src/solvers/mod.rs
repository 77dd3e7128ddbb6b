//! ADMM-MCP, hard-thresholding ADMM, IHT and NIHT, with a shared driver.
//!
//! Every algorithm starts from `x = u = w = 0` (a warm start can be injected
//! through [`run_solver_from`]) and stops once
//! `max(‖xᵏ⁺¹ − xᵏ‖, ‖xᵏ⁺¹ − uᵏ⁺¹‖) ≤ tol · (1 + ‖xᵏ⁺¹‖)` or `max_iter` is hit.
//! The ADMM variants update `u`, then `x`, then `w`.

mod lambda;
mod steps;

use alloc::boxed::Box;
use alloc::vec;
use alloc::vec::Vec;

pub use lambda::{
    adaptive_lambda, lambda_grid, lambda_grid_select, resolve_rho, select_grid_index, sparsity_count, theory_rho,
    GridPoint, GridSelection, GRID_LEN, LAMBDA_FLOOR, PAPER_RHO, SPARSITY_RTOL, THEORY_RHO_FACTOR,
};
pub use steps::{admm_l0_step, admm_mcp_step, augmented_lagrangian, iht_step, niht_step, residual_sq, ProxKind};

use crate::error::{Error, Result};
use crate::linalg::{dist2, norm2, XUpdateCache};
use crate::penalties::PenaltyParams;
use crate::problem::ProblemInstance;

pub const DEFAULT_GAMMA: f64 = 1.5;
pub const DEFAULT_TOL: f64 = 1e-3;
pub const DEFAULT_MAX_ITER: usize = 500;
/// Runs abort once `‖xᵏ‖` exceeds this.
pub const DIVERGENCE_LIMIT: f64 = 1e12;
/// Slack for counting u-steps that increase the augmented Lagrangian.
pub const PROX_DESCENT_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Algorithm {
    AdmmMcpExact,
    AdmmMcpUnified,
    AdmmL0,
    Iht,
    Niht,
}

impl Algorithm {
    pub const ALL: [Algorithm; 5] =
        [Algorithm::AdmmMcpUnified, Algorithm::AdmmMcpExact, Algorithm::AdmmL0, Algorithm::Iht, Algorithm::Niht];

    /// Stable tag used on the command line and in CSV output.
    pub fn tag(self) -> &'static str {
        match self {
            Algorithm::AdmmMcpUnified => "admm-mcp",
            Algorithm::AdmmMcpExact => "admm-mcp-exact",
            Algorithm::AdmmL0 => "admm-l0",
            Algorithm::Iht => "iht",
            Algorithm::Niht => "niht",
        }
    }

    pub fn from_tag(tag: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|a| a.tag() == tag)
    }

    pub fn is_admm(self) -> bool {
        !matches!(self, Algorithm::Iht | Algorithm::Niht)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LambdaStrategy {
    Fixed(f64),
    /// Full solve per grid value, sparsest solution wins.
    Grid,
    /// `λ = z_τ/γ` recomputed from `xᵏ + wᵏ/ρ` at the start of every iteration.
    Adaptive,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RhoMode {
    /// `ρ = 0.1`.
    Paper,
    /// Smallest `ρ` (times 1.05) satisfying the convergence conditions.
    Theory,
    Explicit(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub algorithm: Algorithm,
    pub rho_mode: RhoMode,
    /// MCP concavity; ignored by the non-MCP algorithms.
    pub gamma: f64,
    pub lambda_strategy: LambdaStrategy,
    pub max_iter: usize,
    pub tol: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            algorithm: Algorithm::AdmmMcpUnified,
            rho_mode: RhoMode::Paper,
            gamma: DEFAULT_GAMMA,
            lambda_strategy: LambdaStrategy::Adaptive,
            max_iter: DEFAULT_MAX_ITER,
            tol: DEFAULT_TOL,
        }
    }
}

impl SolverConfig {
    pub fn for_algorithm(algorithm: Algorithm) -> Self {
        Self { algorithm, ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0) {
            return Err(Error::InvalidParameter { name: "tol", value: self.tol, reason: "must be positive" });
        }
        if self.max_iter == 0 {
            return Err(Error::InvalidInput("max_iter must be at least 1".into()));
        }
        if self.algorithm.uses_lambda() {
            if !(self.gamma > 1.0) || !self.gamma.is_finite() {
                return Err(Error::InvalidParameter {
                    name: "gamma",
                    value: self.gamma,
                    reason: "MCP requires gamma > 1",
                });
            }
            if let LambdaStrategy::Fixed(l) = self.lambda_strategy {
                PenaltyParams::mcp(l, self.gamma)?;
            }
        }
        if let RhoMode::Explicit(rho) = self.rho_mode {
            if !(rho > 0.0) || !rho.is_finite() {
                return Err(Error::InvalidParameter { name: "rho", value: rho, reason: "must be positive and finite" });
            }
        }
        Ok(())
    }
}

/// The ADMM triple and iteration counter. IHT/NIHT keep `u = x`, `w = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverState {
    pub x: Vec<f64>,
    pub u: Vec<f64>,
    pub w: Vec<f64>,
    pub k: usize,
}

impl SolverState {
    pub fn zeros(n: usize) -> Self {
        Self { x: vec![0.0; n], u: vec![0.0; n], w: vec![0.0; n], k: 0 }
    }

    pub fn is_finite(&self) -> bool {
        self.x.iter().chain(&self.u).chain(&self.w).all(|v| v.is_finite())
    }
}

/// Diagnostics for one iteration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRecord {
    /// 1-based iteration number.
    pub iter: usize,
    pub dx_norm: f64,
    pub du_norm: f64,
    pub dw_norm: f64,
    /// Augmented Lagrangian at the new iterate; `‖b − Ax‖²` for IHT/NIHT.
    pub lagrangian: f64,
    /// `‖x0 − xᵏ‖/‖x0‖` when ground truth is known.
    pub rel_err: Option<f64>,
    /// `λ` used in this iteration; `None` for algorithms without one.
    pub lambda: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct IterationTrace {
    records: Vec<TraceRecord>,
}

impl IterationTrace {
    pub fn records(&self) -> &[TraceRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn last(&self) -> Option<&TraceRecord> {
        self.records.last()
    }

    pub fn push(&mut self, record: TraceRecord) {
        self.records.push(record);
    }
}

#[derive(Debug, Clone)]
pub struct Solution {
    pub x_hat: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    pub trace: IterationTrace,
    pub final_lambda: Option<f64>,
    /// `None` for IHT/NIHT.
    pub rho: Option<f64>,
    /// Iterations whose u-update raised the augmented Lagrangian by more than
    /// [`PROX_DESCENT_SLACK`]. Always 0 for the exact prox.
    pub prox_descent_violations: usize,
    pub final_state: SolverState,
}

/// What an observer sees after each accepted iteration.
#[derive(Debug)]
pub struct StepEvent<'s> {
    pub before: &'s SolverState,
    pub after: &'s SolverState,
    pub lambda: Option<f64>,
    pub rho: Option<f64>,
}

/// Runs the configured algorithm from the zero state.
pub fn run_solver(problem: &ProblemInstance, config: &SolverConfig) -> Result<Solution> {
    run_solver_observed(problem, config, None, &mut |_| {})
}

/// Runs the configured algorithm from an arbitrary starting state.
pub fn run_solver_from(problem: &ProblemInstance, config: &SolverConfig, init: SolverState) -> Result<Solution> {
    run_solver_observed(problem, config, Some(init), &mut |_| {})
}

/// Full driver. `observer` is called after every accepted iteration; grid
/// selection runs without it.
pub fn run_solver_observed(
    problem: &ProblemInstance,
    config: &SolverConfig,
    init: Option<SolverState>,
    observer: &mut dyn FnMut(&StepEvent<'_>),
) -> Result<Solution> {
    config.validate()?;
    problem.validate()?;
    if config.algorithm.uses_lambda() && config.lambda_strategy == LambdaStrategy::Grid {
        if init.is_some() {
            return Err(Error::InvalidInput("grid selection does not take a warm start".into()));
        }
        return lambda_grid_select(problem, config).map(|g| g.solution);
    }
    if !config.algorithm.is_admm() {
        return run_with_lambda(problem, config, f64::NAN, None, None, init, observer);
    }
    let rho = resolve_rho(&problem.a, config)?;
    let cache = XUpdateCache::build(&problem.a, &problem.b, rho)?;
    let fixed = match config.lambda_strategy {
        LambdaStrategy::Fixed(l) => Some(l),
        _ => None,
    };
    run_with_lambda(problem, config, rho, Some(&cache), fixed, init, observer)
}

/// Inner loop. `fixed_lambda = None` means adaptive for the MCP algorithms.
pub(crate) fn run_with_lambda(
    problem: &ProblemInstance,
    config: &SolverConfig,
    rho: f64,
    cache: Option<&XUpdateCache<'_>>,
    fixed_lambda: Option<f64>,
    init: Option<SolverState>,
    observer: &mut dyn FnMut(&StepEvent<'_>),
) -> Result<Solution> {
    let n = problem.n();
    let (a, b, tau) = (&problem.a, problem.b.as_slice(), problem.tau);
    let algorithm = config.algorithm;
    if !algorithm.uses_lambda() || fixed_lambda.is_none() {
        steps::check_tau(tau, n)?;
    }
    let mut state = match init {
        Some(s) => {
            crate::error::check_len("initial x", n, s.x.len())?;
            crate::error::check_len("initial u", n, s.u.len())?;
            crate::error::check_len("initial w", n, s.w.len())?;
            s
        }
        None => SolverState::zeros(n),
    };
    let x0_norm = problem.x0.as_deref().map(norm2).filter(|v| *v > 0.0);
    let mut trace = IterationTrace::default();
    let mut violations = 0usize;
    let mut converged = false;
    let mut last_lambda = None;
    let admm_cache = || cache.expect("ADMM algorithms run with a cache");

    for _ in 0..config.max_iter {
        let mut params = None;
        let step = match algorithm {
            Algorithm::AdmmMcpExact | Algorithm::AdmmMcpUnified => {
                let lambda = match fixed_lambda {
                    Some(l) => l,
                    None => adaptive_lambda(&state.x, &state.w, rho, tau, config.gamma)?,
                };
                let p = PenaltyParams::mcp(lambda, config.gamma)?;
                params = Some(p);
                let prox = if algorithm == Algorithm::AdmmMcpExact { ProxKind::Exact } else { ProxKind::Unified };
                admm_mcp_step(&state, admm_cache(), &p, prox)
            }
            Algorithm::AdmmL0 => admm_l0_step(&state, admm_cache(), tau),
            Algorithm::Iht | Algorithm::Niht => {
                let next_x = if algorithm == Algorithm::Iht {
                    iht_step(&state.x, a, b, tau)?
                } else {
                    niht_step(&state.x, a, b, tau)?
                };
                Ok(SolverState { u: next_x.clone(), w: vec![0.0; n], x: next_x, k: state.k + 1 })
            }
        };
        let next = match step {
            Ok(next) if next.is_finite() && norm2(&next.x) <= DIVERGENCE_LIMIT => next,
            Ok(_) | Err(Error::Diverged { .. }) => {
                return Err(Error::Diverged { iteration: state.k + 1, trace: Box::new(trace) })
            }
            Err(e) => return Err(e),
        };

        if let Some(p) = &params {
            if steps::u_step_change(&state, &next.u, p, rho) > PROX_DESCENT_SLACK {
                violations += 1;
            }
        }
        let (dx, du, dw) = steps::increments(&state, &next);
        let lagrangian = if algorithm.is_admm() {
            steps::lagrangian_unchecked(&next, a, b, params.as_ref(), rho)
        } else {
            residual_sq(a, b, &next.x)
        };
        let rel_err = match (&problem.x0, x0_norm) {
            (Some(x0), Some(nrm)) => Some(dist2(x0, &next.x) / nrm),
            _ => None,
        };
        let lambda = params.map(|p| p.lambda());
        last_lambda = lambda;
        trace.push(TraceRecord { iter: next.k, dx_norm: dx, du_norm: du, dw_norm: dw, lagrangian, rel_err, lambda });
        observer(&StepEvent { before: &state, after: &next, lambda, rho: cache.map(|c| c.rho()) });

        let gap = dist2(&next.x, &next.u);
        let done = f64::max(dx, gap) <= config.tol * (1.0 + norm2(&next.x));
        state = next;
        if done {
            converged = true;
            break;
        }
    }

    Ok(Solution {
        x_hat: state.x.clone(),
        iterations: trace.len(),
        converged,
        trace,
        final_lambda: last_lambda,
        rho: cache.map(|c| c.rho()),
        prox_descent_violations: violations,
        final_state: state,
    })
}
