//! Command-line front end: parses flags and JSON config files, dispatches
//! to the solver library, and persists manifests plus CSV/JSON outputs.
//!
//! Exit codes: 0 success, 1 validation failure, 2 usage error, 3 numerical
//! failure.

mod commands;

use clap::{Parser, Subcommand};
use serde_json::{Map, Value};
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use spherics::io::{write_file, RunManifest};

#[derive(Parser)]
#[command(
    name = "spherics",
    version,
    about = "Spectral bifurcation, shooting and conformal-map numerics on spheres"
)]
struct Cli {
    /// RNG seed for all stochastic sampling.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory; created if missing.
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,
    /// JSON config file supplying defaults for any parameter; CLI flags win.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Worker budget for independent sub-runs (recorded in the manifest).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Eigenbasis tables: eigenvalues, quadrature rule, nodal zeros.
    Eig {
        /// Sphere dimension N >= 2.
        #[arg(long = "N")]
        sphere_dim: Option<usize>,
        /// Number of basis modes.
        #[arg(long = "K")]
        modes: Option<usize>,
        /// Number of quadrature nodes (default 2K).
        #[arg(long = "M")]
        nodes: Option<usize>,
    },
    /// Continue the k-th nonconstant solution branch up to --lambda-max.
    Branch {
        /// Sphere dimension N >= 2.
        #[arg(long = "N")]
        sphere_dim: Option<usize>,
        /// Nonlinearity exponent, 1 < p < (N+2)/(N-2).
        #[arg(long)]
        p: Option<f64>,
        /// Branch index k >= 1.
        #[arg(long)]
        k: Option<usize>,
        /// Continuation target for the parameter.
        #[arg(long, allow_negative_numbers = true)]
        lambda_max: Option<f64>,
    },
    /// Integrate one shooting trajectory, or sweep a start grid with --grid.
    Shoot {
        /// Ambient dimension n >= 3.
        #[arg(long)]
        n: Option<usize>,
        /// Autonomous family parameter (mutually exclusive with --beta).
        #[arg(long, allow_negative_numbers = true)]
        c: Option<f64>,
        /// Perturbed family parameter (mutually exclusive with --c).
        #[arg(long, allow_negative_numbers = true)]
        beta: Option<f64>,
        /// Initial value w(0).
        #[arg(long, allow_negative_numbers = true)]
        a: Option<f64>,
        /// Initial slope w'(0) (default 0).
        #[arg(long, allow_negative_numbers = true)]
        b: Option<f64>,
        /// Half-width of the time interval [-T, T] (default 30).
        #[arg(long = "T")]
        t_max: Option<f64>,
        /// Run the 20x20 start-grid sweep instead of a single trajectory.
        #[arg(long)]
        grid: bool,
    },
    /// Apply the power-form conformal reflection to a smooth test profile.
    Kelvin {
        /// Ambient dimension n >= 3.
        #[arg(long)]
        n: Option<usize>,
        /// Reflection parameter in (0, pi/2].
        #[arg(long)]
        lambda: Option<f64>,
        /// Transform pole: north or south (default north).
        #[arg(long)]
        pole: Option<String>,
        /// Spectral resolution for the invariance residual (default 64).
        #[arg(long = "K")]
        modes: Option<usize>,
    },
    /// Search for nonradial solutions of the Hardy-term radial equation.
    Veron {
        /// Ambient dimension n >= 3.
        #[arg(long)]
        n: Option<usize>,
        /// Hardy coefficient.
        #[arg(long, allow_negative_numbers = true)]
        c: Option<f64>,
    },
    /// Run property suites and report pass/fail.
    Verify {
        /// Suite selector: eig, kelvin, shoot, symmetry, or all (default).
        #[arg(long)]
        suite: Option<String>,
    },
}

/// Error carrying its process exit code.
#[derive(Debug)]
pub enum CliError {
    /// Bad flags or parameter domain: exit 2.
    Usage(String),
    /// A verification or solution check failed: exit 1.
    Validation(String),
    /// Solver non-convergence, blowup, or I/O failure: exit 3.
    Numerical(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Validation(_) => 1,
            CliError::Usage(_) => 2,
            CliError::Numerical(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Usage(m) | CliError::Validation(m) | CliError::Numerical(m) => m,
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Numerical(format!("i/o failure: {e}"))
    }
}

/// Shared run state: resolved globals plus the list of data files written,
/// which the closing manifest must name exhaustively.
pub struct Ctx {
    pub cfg: Map<String, Value>,
    pub out: PathBuf,
    pub seed: u64,
    pub threads: usize,
    outputs: Vec<String>,
    started: Instant,
}

impl Ctx {
    pub fn write(&mut self, name: &str, contents: &str) -> Result<(), CliError> {
        write_file(&self.out.join(name), contents)?;
        self.outputs.push(name.to_string());
        Ok(())
    }

    /// Writes the single manifest naming every data file in the directory.
    pub fn finish(
        self,
        command: &str,
        params: Value,
        tolerances: Value,
    ) -> Result<(), CliError> {
        let manifest = RunManifest {
            command: command.to_string(),
            params,
            seed: self.seed,
            tolerances,
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            outputs: self.outputs.clone(),
            wall_time: self.started.elapsed().as_secs_f64(),
        };
        write_file(&self.out.join("manifest.json"), &manifest.to_json())?;
        Ok(())
    }
}

fn load_config(path: Option<&PathBuf>) -> Result<Map<String, Value>, CliError> {
    let Some(path) = path else {
        return Ok(Map::new());
    };
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
    match serde_json::from_str::<Value>(&text) {
        Ok(Value::Object(map)) => Ok(map),
        Ok(_) => Err(CliError::Usage(format!(
            "config {} must be a JSON object",
            path.display()
        ))),
        Err(e) => Err(CliError::Usage(format!(
            "config {} is not valid JSON: {e}",
            path.display()
        ))),
    }
}

// Parameter resolution: CLI flag > config key > built-in default. A
// parameter still unset after both layers is a usage error.

pub fn opt_f64(cli: Option<f64>, cfg: &Map<String, Value>, key: &str) -> Option<f64> {
    cli.or_else(|| cfg.get(key).and_then(Value::as_f64))
}

pub fn opt_usize(cli: Option<usize>, cfg: &Map<String, Value>, key: &str) -> Option<usize> {
    cli.or_else(|| cfg.get(key).and_then(Value::as_u64).map(|v| v as usize))
}

pub fn opt_string(cli: Option<String>, cfg: &Map<String, Value>, key: &str) -> Option<String> {
    cli.or_else(|| cfg.get(key).and_then(Value::as_str).map(str::to_string))
}

pub fn req_f64(cli: Option<f64>, cfg: &Map<String, Value>, key: &str) -> Result<f64, CliError> {
    opt_f64(cli, cfg, key).ok_or_else(|| CliError::Usage(format!("missing parameter --{key}")))
}

pub fn req_usize(
    cli: Option<usize>,
    cfg: &Map<String, Value>,
    key: &str,
) -> Result<usize, CliError> {
    opt_usize(cli, cfg, key).ok_or_else(|| CliError::Usage(format!("missing parameter --{key}")))
}

fn run(cli: Cli) -> Result<(), CliError> {
    let cfg = load_config(cli.config.as_ref())?;
    let seed = cli
        .seed
        .or_else(|| cfg.get("seed").and_then(Value::as_u64))
        .unwrap_or(0);
    let threads = opt_usize(cli.threads, &cfg, "threads").unwrap_or(1);
    if threads == 0 {
        return Err(CliError::Usage("--threads must be at least 1".into()));
    }
    let out = cli
        .out
        .or_else(|| cfg.get("out").and_then(Value::as_str).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("out"));
    let ctx = Ctx {
        cfg,
        out,
        seed,
        threads,
        outputs: Vec::new(),
        started: Instant::now(),
    };

    match cli.cmd {
        Cmd::Eig {
            sphere_dim,
            modes,
            nodes,
        } => commands::cmd_eig(ctx, sphere_dim, modes, nodes),
        Cmd::Branch {
            sphere_dim,
            p,
            k,
            lambda_max,
        } => commands::cmd_branch(ctx, sphere_dim, p, k, lambda_max),
        Cmd::Shoot {
            n,
            c,
            beta,
            a,
            b,
            t_max,
            grid,
        } => commands::cmd_shoot(ctx, n, c, beta, a, b, t_max, grid),
        Cmd::Kelvin {
            n,
            lambda,
            pole,
            modes,
        } => commands::cmd_kelvin(ctx, n, lambda, pole, modes),
        Cmd::Veron { n, c } => commands::cmd_veron(ctx, n, c),
        Cmd::Verify { suite } => commands::cmd_verify(ctx, suite),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.code())
        }
    }
}
