//! Subcommand definitions, flag resolution and run manifests.

use std::path::{Path, PathBuf};

use admm_mcp_core::experiments::relative_error;
use admm_mcp_core::solvers::{DEFAULT_GAMMA, DEFAULT_MAX_ITER, DEFAULT_TOL};
use admm_mcp_core::{
    generate_instance, run_solver, Algorithm, Error as CoreError, LambdaStrategy, ProblemInstance, RhoMode,
    SolverConfig,
};
use clap::{
    builder::{PossibleValuesParser, TypedValueParser},
    Args, Parser, Subcommand, ValueEnum,
};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};
use crate::io::{self, SolutionDocument};
use crate::sweep::{run_sweep, SweepPlan};

pub const ARTIFACT_VERSION: &str = concat!("admm-mcp ", env!("CARGO_PKG_VERSION"));

#[derive(Debug, Parser)]
#[command(name = "admm-mcp", version, about = "Sparse recovery with ADMM and nonconvex penalties")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a random instance and write it as JSON.
    Gen(GenArgs),
    /// Solve one instance, writing trace.csv, solution.json and manifest.json.
    Solve(SolveArgs),
    /// Run a success-rate sweep over measurement counts.
    Sweep(SweepArgs),
    /// Re-run the command recorded in a manifest.
    Replay(ReplayArgs),
}

#[derive(Debug, Clone, Args)]
pub struct InstanceFlags {
    #[arg(long, default_value_t = 512)]
    pub n: usize,
    #[arg(long, default_value_t = 150)]
    pub m: usize,
    #[arg(long, default_value_t = 15)]
    pub tau: usize,
    #[arg(long, default_value_t = 0.001)]
    pub sigma: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Clone, Args)]
pub struct GenArgs {
    #[command(flatten)]
    pub instance: InstanceFlags,
    #[arg(long, default_value = "instance.json")]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RhoModeArg {
    Paper,
    Theory,
    Explicit,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LambdaModeArg {
    Adaptive,
    Grid,
    Fixed,
}

fn algo_parser() -> impl TypedValueParser<Value = Algorithm> {
    PossibleValuesParser::new(Algorithm::ALL.map(Algorithm::tag))
        .map(|tag: String| Algorithm::from_tag(&tag).expect("restricted to known tags"))
}

#[derive(Debug, Clone, Args)]
pub struct SolverFlags {
    #[arg(long = "rho-mode", value_enum)]
    pub rho_mode: Option<RhoModeArg>,
    /// Penalty parameter; implies --rho-mode explicit.
    #[arg(long)]
    pub rho: Option<f64>,
    #[arg(long = "lambda-mode", value_enum)]
    pub lambda_mode: Option<LambdaModeArg>,
    /// Regularization weight; implies --lambda-mode fixed.
    #[arg(long)]
    pub lambda: Option<f64>,
    #[arg(long, default_value_t = DEFAULT_GAMMA)]
    pub gamma: f64,
    #[arg(long = "max-iter", default_value_t = DEFAULT_MAX_ITER)]
    pub max_iter: usize,
    #[arg(long, default_value_t = DEFAULT_TOL)]
    pub tol: f64,
}

#[derive(Debug, Clone, Args)]
pub struct SolveArgs {
    /// Instance JSON; when absent the instance flags generate one.
    #[arg(long, conflicts_with_all = ["n", "m", "tau", "sigma", "seed"])]
    pub instance: Option<PathBuf>,
    #[command(flatten)]
    pub generate: InstanceFlags,
    #[arg(long, default_value = "admm-mcp", value_parser = algo_parser())]
    pub algo: Algorithm,
    #[command(flatten)]
    pub solver: SolverFlags,
    /// Output directory.
    #[arg(long, default_value = "solve-out")]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    #[arg(long, default_value_t = 512)]
    pub n: usize,
    #[arg(long, default_value_t = 15)]
    pub tau: usize,
    #[arg(long, default_value_t = 0.001)]
    pub sigma: f64,
    #[arg(long = "m-list", value_delimiter = ',', default_value = "60,90,120,150")]
    pub m_list: Vec<usize>,
    #[arg(long, default_value_t = 100)]
    pub trials: usize,
    #[arg(long, value_delimiter = ',', default_value = "admm-mcp,admm-l0", value_parser = algo_parser())]
    pub algos: Vec<Algorithm>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Worker threads, 0 for one per core.
    #[arg(long, default_value_t = 0)]
    pub threads: usize,
    #[command(flatten)]
    pub solver: SolverFlags,
    #[arg(long, default_value = "sweep.csv")]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct ReplayArgs {
    #[arg(long)]
    pub manifest: PathBuf,
    /// Write outputs here instead of the recorded location.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenSpec {
    pub n: usize,
    pub m: usize,
    pub tau: usize,
    pub sigma: f64,
    pub seed: u64,
}

impl From<&InstanceFlags> for GenSpec {
    fn from(f: &InstanceFlags) -> Self {
        GenSpec { n: f.n, m: f.m, tau: f.tau, sigma: f.sigma, seed: f.seed }
    }
}

impl GenSpec {
    fn generate(&self) -> CliResult<ProblemInstance> {
        Ok(generate_instance(self.n, self.m, self.tau, self.sigma, self.seed)?)
    }
}

/// Solver settings with every default filled in.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverSpec {
    pub rho_mode: RhoModeArg,
    pub rho: Option<f64>,
    pub lambda_mode: LambdaModeArg,
    pub lambda: Option<f64>,
    pub gamma: f64,
    pub max_iter: usize,
    pub tol: f64,
}

impl SolverSpec {
    pub fn resolve(f: &SolverFlags) -> CliResult<Self> {
        let rho_mode = match (f.rho_mode, f.rho) {
            (None, None) => RhoModeArg::Paper,
            (None, Some(_)) | (Some(RhoModeArg::Explicit), Some(_)) => RhoModeArg::Explicit,
            (Some(RhoModeArg::Explicit), None) => {
                return Err(CliError::Usage("--rho-mode explicit requires --rho".into()))
            }
            (Some(mode), None) => mode,
            (Some(_), Some(_)) => return Err(CliError::Usage("--rho is only valid with --rho-mode explicit".into())),
        };
        let lambda_mode = match (f.lambda_mode, f.lambda) {
            (None, None) => LambdaModeArg::Adaptive,
            (None, Some(_)) | (Some(LambdaModeArg::Fixed), Some(_)) => LambdaModeArg::Fixed,
            (Some(LambdaModeArg::Fixed), None) => {
                return Err(CliError::Usage("--lambda-mode fixed requires --lambda".into()))
            }
            (Some(mode), None) => mode,
            (Some(_), Some(_)) => {
                return Err(CliError::Usage("--lambda is only valid with --lambda-mode fixed".into()))
            }
        };
        Ok(SolverSpec {
            rho_mode,
            rho: f.rho,
            lambda_mode,
            lambda: f.lambda,
            gamma: f.gamma,
            max_iter: f.max_iter,
            tol: f.tol,
        })
    }

    pub fn config(&self, algorithm: Algorithm) -> CliResult<SolverConfig> {
        let missing = |flag: &str| CliError::Usage(format!("manifest lacks {flag}"));
        let rho_mode = match self.rho_mode {
            RhoModeArg::Paper => RhoMode::Paper,
            RhoModeArg::Theory => RhoMode::Theory,
            RhoModeArg::Explicit => RhoMode::Explicit(self.rho.ok_or_else(|| missing("rho"))?),
        };
        let lambda_strategy = match self.lambda_mode {
            LambdaModeArg::Adaptive => LambdaStrategy::Adaptive,
            LambdaModeArg::Grid => LambdaStrategy::Grid,
            LambdaModeArg::Fixed => LambdaStrategy::Fixed(self.lambda.ok_or_else(|| missing("lambda"))?),
        };
        let config = SolverConfig {
            algorithm,
            rho_mode,
            gamma: self.gamma,
            lambda_strategy,
            max_iter: self.max_iter,
            tol: self.tol,
        };
        config.validate()?;
        Ok(config)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum InstanceSource {
    File { path: PathBuf },
    Generated(GenSpec),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveSpec {
    pub source: InstanceSource,
    pub algorithm: String,
    pub solver: SolverSpec,
    pub out_dir: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub n: usize,
    pub tau: usize,
    pub sigma: f64,
    pub m_list: Vec<usize>,
    pub trials: usize,
    pub algorithms: Vec<String>,
    pub base_seed: u64,
    pub threads: usize,
    pub solver: SolverSpec,
    pub out: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "subcommand", content = "config")]
pub enum ManifestCommand {
    Gen { spec: GenSpec, out: PathBuf },
    Solve(SolveSpec),
    Sweep(SweepSpec),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub version: String,
    #[serde(flatten)]
    pub command: ManifestCommand,
    pub seeds: Vec<u64>,
    pub outputs: Vec<PathBuf>,
}

impl RunManifest {
    fn new(command: ManifestCommand, seeds: Vec<u64>, outputs: Vec<PathBuf>) -> Self {
        RunManifest { version: ARTIFACT_VERSION.to_owned(), command, seeds, outputs }
    }
}

/// Manifest path written next to a single output file.
pub fn sidecar_manifest_path(out: &Path) -> PathBuf {
    let mut name = out.file_name().map(|n| n.to_os_string()).unwrap_or_default();
    name.push(".manifest.json");
    out.with_file_name(name)
}

fn parse_tag(tag: &str) -> CliResult<Algorithm> {
    Algorithm::from_tag(tag).ok_or_else(|| {
        let valid: Vec<_> = Algorithm::ALL.iter().map(|a| a.tag()).collect();
        CliError::Usage(format!("unknown algorithm '{tag}'; valid tags: {}", valid.join(", ")))
    })
}

pub fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Gen(args) => exec(ManifestCommand::Gen { spec: (&args.instance).into(), out: args.out }),
        Command::Solve(args) => {
            let source = match args.instance {
                Some(path) => InstanceSource::File { path },
                None => InstanceSource::Generated((&args.generate).into()),
            };
            exec(ManifestCommand::Solve(SolveSpec {
                source,
                algorithm: args.algo.tag().to_owned(),
                solver: SolverSpec::resolve(&args.solver)?,
                out_dir: args.out,
            }))
        }
        Command::Sweep(args) => exec(ManifestCommand::Sweep(SweepSpec {
            n: args.n,
            tau: args.tau,
            sigma: args.sigma,
            m_list: args.m_list,
            trials: args.trials,
            algorithms: args.algos.iter().map(|a| a.tag().to_owned()).collect(),
            base_seed: args.seed,
            threads: args.threads,
            solver: SolverSpec::resolve(&args.solver)?,
            out: args.out,
        })),
        Command::Replay(args) => {
            let manifest: RunManifest = io::read_json(&args.manifest)?;
            let mut command = manifest.command;
            if let Some(out) = args.out {
                match &mut command {
                    ManifestCommand::Gen { out: o, .. } => *o = out,
                    ManifestCommand::Solve(spec) => spec.out_dir = out,
                    ManifestCommand::Sweep(spec) => spec.out = out,
                }
            }
            exec(command)
        }
    }
}

/// Executes a fully resolved command and writes its outputs and manifest.
pub fn exec(command: ManifestCommand) -> CliResult<()> {
    match &command {
        ManifestCommand::Gen { spec, out } => {
            let problem = spec.generate()?;
            io::write_instance(out, &problem)?;
            let manifest_path = sidecar_manifest_path(out);
            let manifest = RunManifest::new(command.clone(), vec![spec.seed], vec![out.clone()]);
            io::write_json(&manifest_path, &manifest)?;
            println!("wrote {}", out.display());
            Ok(())
        }
        ManifestCommand::Solve(spec) => exec_solve(spec, &command),
        ManifestCommand::Sweep(spec) => {
            let configs = spec
                .algorithms
                .iter()
                .map(|t| parse_tag(t).and_then(|a| spec.solver.config(a)))
                .collect::<CliResult<Vec<_>>>()?;
            let plan = SweepPlan {
                n: spec.n,
                tau: spec.tau,
                sigma: spec.sigma,
                m_list: spec.m_list.clone(),
                trials: spec.trials,
                configs,
                base_seed: spec.base_seed,
                threads: spec.threads,
            };
            let records = run_sweep(&plan)?;
            io::write_sweep_csv(&spec.out, &records)?;
            let seeds = (0..spec.trials).map(|t| plan.trial_seed(t)).collect();
            let manifest = RunManifest::new(command.clone(), seeds, vec![spec.out.clone()]);
            io::write_json(&sidecar_manifest_path(&spec.out), &manifest)?;
            for r in &records {
                println!("m={} {}: {}/{} recovered", r.m, r.algorithm, r.successes, r.trials);
            }
            Ok(())
        }
    }
}

fn exec_solve(spec: &SolveSpec, command: &ManifestCommand) -> CliResult<()> {
    let algorithm = parse_tag(&spec.algorithm)?;
    let config = spec.solver.config(algorithm)?;
    let problem = match &spec.source {
        InstanceSource::File { path } => io::read_instance(path)?,
        InstanceSource::Generated(gen) => gen.generate()?,
    };
    let trace_path = spec.out_dir.join("trace.csv");
    let solution_path = spec.out_dir.join("solution.json");
    let manifest_path = spec.out_dir.join("manifest.json");
    let manifest =
        RunManifest::new(command.clone(), vec![problem.seed], vec![trace_path.clone(), solution_path.clone()]);

    match run_solver(&problem, &config) {
        Ok(solution) => {
            let rel_err = problem.x0.as_deref().map(|x0| relative_error(x0, &solution.x_hat)).transpose()?;
            io::write_trace_csv(&trace_path, &solution.trace)?;
            io::write_json(&solution_path, &SolutionDocument::new(algorithm.tag(), &solution, rel_err))?;
            io::write_json(&manifest_path, &manifest)?;
            println!("converged: {}", solution.converged);
            println!("iterations: {}", solution.iterations);
            if let Some(e) = rel_err {
                println!("rel_err: {e}");
            }
            Ok(())
        }
        Err(CoreError::Diverged { iteration, trace }) => {
            io::write_trace_csv(&trace_path, &trace)?;
            io::write_json(&manifest_path, &manifest)?;
            Err(CoreError::Diverged { iteration, trace }.into())
        }
        Err(e) => Err(e.into()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn flags(rho_mode: Option<RhoModeArg>, rho: Option<f64>) -> SolverFlags {
        SolverFlags {
            rho_mode,
            rho,
            lambda_mode: None,
            lambda: None,
            gamma: DEFAULT_GAMMA,
            max_iter: DEFAULT_MAX_ITER,
            tol: DEFAULT_TOL,
        }
    }

    #[test]
    fn rho_flags_resolve() {
        assert_eq!(SolverSpec::resolve(&flags(None, None)).unwrap().rho_mode, RhoModeArg::Paper);
        assert_eq!(SolverSpec::resolve(&flags(None, Some(2.0))).unwrap().rho_mode, RhoModeArg::Explicit);
        assert!(SolverSpec::resolve(&flags(Some(RhoModeArg::Explicit), None)).is_err());
        assert!(SolverSpec::resolve(&flags(Some(RhoModeArg::Theory), Some(1.0))).is_err());
        let spec = SolverSpec::resolve(&flags(Some(RhoModeArg::Theory), None)).unwrap();
        let cfg = spec.config(Algorithm::AdmmMcpExact).unwrap();
        assert_eq!(cfg.rho_mode, RhoMode::Theory);
        assert_eq!(cfg.lambda_strategy, LambdaStrategy::Adaptive);
    }

    #[test]
    fn unknown_tag_lists_valid_ones() {
        let err = parse_tag("lasso").unwrap_err();
        assert_eq!(err.exit_code(), 2);
        let msg = err.to_string();
        for a in Algorithm::ALL {
            assert!(msg.contains(a.tag()), "{msg}");
        }
    }

    #[test]
    fn manifest_round_trips_through_json() {
        let m = RunManifest::new(
            ManifestCommand::Gen { spec: GenSpec { n: 8, m: 4, tau: 2, sigma: 0.0, seed: 1 }, out: "x.json".into() },
            vec![1],
            vec!["x.json".into()],
        );
        let text = serde_json::to_string(&m).unwrap();
        assert!(text.contains("\"subcommand\":\"gen\""), "{text}");
        assert_eq!(serde_json::from_str::<RunManifest>(&text).unwrap(), m);
    }

    #[test]
    fn sidecar_path_appends_suffix() {
        assert_eq!(sidecar_manifest_path(Path::new("d/run.csv")), PathBuf::from("d/run.csv.manifest.json"));
    }
}
