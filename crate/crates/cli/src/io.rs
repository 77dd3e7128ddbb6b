//! On-disk formats: the JSON instance document, trace and sweep CSVs, and
//! the solution document.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::Path;

use admm_mcp_core::{DenseMatrix, IterationTrace, ProblemInstance, Solution};
use serde::{de::DeserializeOwned, Deserialize, Serialize};

use crate::error::{CliError, CliResult};
use crate::sweep::SweepRecord;

pub const INSTANCE_FORMAT_VERSION: u32 = 1;

pub const TRACE_HEADER: &str = "iter,dx_norm,du_norm,dw_norm,lagrangian,rel_err,lambda";
pub const SWEEP_HEADER: &str =
    "n,m,tau,sigma,algorithm,trials,successes,success_rate,mean_iterations,mean_wall_ms,base_seed";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceDocument {
    pub version: u32,
    pub n: usize,
    pub m: usize,
    pub tau: usize,
    pub sigma: f64,
    pub seed: u64,
    pub a_row_major: Vec<f64>,
    pub x0: Option<Vec<f64>>,
    pub b: Vec<f64>,
}

impl InstanceDocument {
    pub fn from_problem(problem: &ProblemInstance) -> Self {
        InstanceDocument {
            version: INSTANCE_FORMAT_VERSION,
            n: problem.n(),
            m: problem.m(),
            tau: problem.tau,
            sigma: problem.sigma,
            seed: problem.seed,
            a_row_major: problem.a.data().to_vec(),
            x0: problem.x0.clone(),
            b: problem.b.clone(),
        }
    }

    pub fn into_problem(self) -> CliResult<ProblemInstance> {
        if self.version != INSTANCE_FORMAT_VERSION {
            return Err(CliError::Usage(format!(
                "unsupported instance version {} (expected {})",
                self.version, INSTANCE_FORMAT_VERSION
            )));
        }
        let a = DenseMatrix::new(self.m, self.n, self.a_row_major)?;
        let mut problem = ProblemInstance::new(a, self.b, self.tau)?;
        problem.x0 = self.x0;
        problem.sigma = self.sigma;
        problem.seed = self.seed;
        problem.validate()?;
        Ok(problem)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolutionDocument {
    pub algorithm: String,
    pub converged: bool,
    pub iterations: usize,
    pub rel_err: Option<f64>,
    pub final_lambda: Option<f64>,
    pub rho: Option<f64>,
    pub prox_descent_violations: usize,
    pub x_hat: Vec<f64>,
}

impl SolutionDocument {
    pub fn new(algorithm: &str, solution: &Solution, rel_err: Option<f64>) -> Self {
        SolutionDocument {
            algorithm: algorithm.to_owned(),
            converged: solution.converged,
            iterations: solution.iterations,
            rel_err,
            final_lambda: solution.final_lambda,
            rho: solution.rho,
            prox_descent_violations: solution.prox_descent_violations,
            x_hat: solution.x_hat.clone(),
        }
    }
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> CliResult<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(CliError::json(path))?;
    text.push('\n');
    write_bytes(path, text.as_bytes())
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> CliResult<T> {
    let text = fs::read_to_string(path).map_err(CliError::io(path))?;
    serde_json::from_str(&text).map_err(CliError::json(path))
}

pub fn read_instance(path: &Path) -> CliResult<ProblemInstance> {
    read_json::<InstanceDocument>(path)?.into_problem()
}

pub fn write_instance(path: &Path, problem: &ProblemInstance) -> CliResult<()> {
    write_json(path, &InstanceDocument::from_problem(problem))
}

fn write_bytes(path: &Path, bytes: &[u8]) -> CliResult<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(CliError::io(parent))?;
    }
    let file = File::create(path).map_err(CliError::io(path))?;
    let mut out = BufWriter::new(file);
    out.write_all(bytes).map_err(CliError::io(path))?;
    out.flush().map_err(CliError::io(path))
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn write_csv(path: &Path, header: &str, rows: impl Iterator<Item = Vec<String>>) -> CliResult<()> {
    let mut writer = csv::WriterBuilder::new().has_headers(false).from_writer(Vec::new());
    writer.write_record(header.split(',')).map_err(CliError::csv(path))?;
    for row in rows {
        writer.write_record(&row).map_err(CliError::csv(path))?;
    }
    let bytes = writer.into_inner().map_err(|e| CliError::io(path)(e.into_error()))?;
    write_bytes(path, &bytes)
}

/// Writes one row per iteration; optional columns are left empty.
pub fn write_trace_csv(path: &Path, trace: &IterationTrace) -> CliResult<()> {
    let rows = trace.records().iter().map(|r| {
        vec![
            r.iter.to_string(),
            r.dx_norm.to_string(),
            r.du_norm.to_string(),
            r.dw_norm.to_string(),
            r.lagrangian.to_string(),
            fmt_opt(r.rel_err),
            fmt_opt(r.lambda),
        ]
    });
    write_csv(path, TRACE_HEADER, rows)
}

pub fn write_sweep_csv(path: &Path, records: &[SweepRecord]) -> CliResult<()> {
    let rows = records.iter().map(|r| {
        vec![
            r.n.to_string(),
            r.m.to_string(),
            r.tau.to_string(),
            r.sigma.to_string(),
            r.algorithm.clone(),
            r.trials.to_string(),
            r.successes.to_string(),
            r.success_rate.to_string(),
            r.mean_iterations.to_string(),
            r.mean_wall_ms.to_string(),
            r.base_seed.to_string(),
        ]
    });
    write_csv(path, SWEEP_HEADER, rows)
}
