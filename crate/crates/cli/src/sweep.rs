//! Phase-transition sweeps: many seeded trials per (M, algorithm) cell.

use std::time::Instant;

use admm_mcp_core::experiments::DEFAULT_SUCCESS_TOL;
use admm_mcp_core::{generate_instance, is_success, run_solver, Error, SolverConfig};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRecord {
    pub n: usize,
    pub m: usize,
    pub tau: usize,
    pub sigma: f64,
    pub algorithm: String,
    pub trials: usize,
    pub successes: usize,
    pub success_rate: f64,
    pub mean_iterations: f64,
    pub mean_wall_ms: f64,
    pub base_seed: u64,
}

#[derive(Debug, Clone)]
pub struct SweepPlan {
    pub n: usize,
    pub tau: usize,
    pub sigma: f64,
    pub m_list: Vec<usize>,
    pub trials: usize,
    /// Each config is run on every generated instance.
    pub configs: Vec<SolverConfig>,
    pub base_seed: u64,
    /// Worker count; 0 lets rayon decide.
    pub threads: usize,
}

#[derive(Debug, Clone, Copy)]
struct TrialOutcome {
    success: bool,
    iterations: usize,
    wall_ms: f64,
}

impl SweepPlan {
    pub fn validate(&self) -> CliResult<()> {
        if self.trials == 0 {
            return Err(CliError::Usage("trials must be at least 1".into()));
        }
        if self.m_list.is_empty() {
            return Err(CliError::Usage("m-list must not be empty".into()));
        }
        if self.configs.is_empty() {
            return Err(CliError::Usage("at least one algorithm is required".into()));
        }
        for config in &self.configs {
            config.validate()?;
        }
        // Fail on bad dimensions before spending time on any trial.
        for &m in &self.m_list {
            generate_instance(self.n, m, self.tau, self.sigma, self.base_seed)?;
        }
        Ok(())
    }

    pub fn trial_seed(&self, trial: usize) -> u64 {
        self.base_seed.wrapping_add(trial as u64)
    }
}

fn run_trial(plan: &SweepPlan, m: usize, trial: usize) -> CliResult<Vec<TrialOutcome>> {
    let problem = generate_instance(plan.n, m, plan.tau, plan.sigma, plan.trial_seed(trial))?;
    let x0 = problem.x0.as_deref().expect("generated instances carry x0");
    let mut outcomes = Vec::with_capacity(plan.configs.len());
    for config in &plan.configs {
        let start = Instant::now();
        let result = run_solver(&problem, config);
        let wall_ms = start.elapsed().as_secs_f64() * 1e3;
        let outcome = match result {
            Ok(sol) => TrialOutcome {
                success: is_success(x0, &sol.x_hat, DEFAULT_SUCCESS_TOL)?,
                iterations: sol.iterations,
                wall_ms,
            },
            Err(Error::Diverged { iteration, .. }) => TrialOutcome { success: false, iterations: iteration, wall_ms },
            Err(Error::GridExhausted(points)) => TrialOutcome {
                success: false,
                iterations: points.iter().map(|p| p.iterations).max().unwrap_or(0),
                wall_ms,
            },
            Err(e) => return Err(e.into()),
        };
        outcomes.push(outcome);
    }
    Ok(outcomes)
}

/// Runs every trial of the plan and aggregates one record per (M, config),
/// ordered by M and then by the config order of the plan.
pub fn run_sweep(plan: &SweepPlan) -> CliResult<Vec<SweepRecord>> {
    plan.validate()?;
    let jobs: Vec<(usize, usize)> = plan.m_list.iter().flat_map(|&m| (0..plan.trials).map(move |t| (m, t))).collect();

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(plan.threads)
        .build()
        .map_err(|e| CliError::Usage(format!("cannot start worker pool: {e}")))?;
    let outcomes: Vec<Vec<TrialOutcome>> =
        pool.install(|| jobs.par_iter().map(|&(m, t)| run_trial(plan, m, t)).collect::<CliResult<_>>())?;

    let mut records = Vec::with_capacity(plan.m_list.len() * plan.configs.len());
    for (mi, &m) in plan.m_list.iter().enumerate() {
        let cell = &outcomes[mi * plan.trials..(mi + 1) * plan.trials];
        for (ci, config) in plan.configs.iter().enumerate() {
            let successes = cell.iter().filter(|o| o[ci].success).count();
            let trials = plan.trials as f64;
            records.push(SweepRecord {
                n: plan.n,
                m,
                tau: plan.tau,
                sigma: plan.sigma,
                algorithm: config.algorithm.tag().to_owned(),
                trials: plan.trials,
                successes,
                success_rate: successes as f64 / trials,
                mean_iterations: cell.iter().map(|o| o[ci].iterations as f64).sum::<f64>() / trials,
                mean_wall_ms: cell.iter().map(|o| o[ci].wall_ms).sum::<f64>() / trials,
                base_seed: plan.base_seed,
            });
        }
    }
    Ok(records)
}
