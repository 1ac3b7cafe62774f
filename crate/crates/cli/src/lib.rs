//! `aqm` command-line front end: config resolution, sweeps and CSV output.
//!
//! Exit codes: 0 success, 1 I/O failure, 2 invalid input, 3 numerical failure.

pub mod commands;
pub mod config;
pub mod output;
pub mod validate;

use std::ffi::OsString;
use std::fs;
use std::io;
use std::path::PathBuf;

use aqm_core::rgflow::{BoundaryRule, RefreshMode};
use clap::{Parser, ValueEnum};
use thiserror::Error;

pub use commands::{run_command, Outcome};
pub use config::{Command, Grid, RunConfig};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Validation(String),
    #[error("{0}")]
    Numerical(String),
    #[error("i/o: {0}")]
    Io(#[from] io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io(_) => 1,
            CliError::Validation(_) => 2,
            CliError::Numerical(_) => 3,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum RefreshArg {
    Auto,
    Always,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum RuleArg {
    Re,
    Abs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct QuadArg(pub usize, pub usize, pub usize);

fn parse_quad(s: &str) -> Result<QuadArg, String> {
    let parts: Vec<usize> = s
        .split(',')
        .map(|p| p.trim().parse::<usize>())
        .collect::<Result<_, _>>()
        .map_err(|_| format!("expected nR,nchi,ntheta (got {s:?})"))?;
    match parts.as_slice() {
        &[a, b, c] => Ok(QuadArg(a, b, c)),
        _ => Err(format!("expected three node counts nR,nchi,ntheta (got {s:?})")),
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "aqm",
    version,
    about = "Phase diagrams, fixed-point coefficients and trajectory simulations"
)]
pub struct Cli {
    /// Subcommand; may instead come from the config file.
    #[arg(value_enum)]
    pub command: Option<Command>,
    /// JSON run configuration. Flags override its entries.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Worker threads; output bytes do not depend on it.
    #[arg(long, env = "MF_THREADS")]
    pub threads: Option<usize>,
    /// Seed of the trajectory ensemble.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Quadrature node counts of the f integrals.
    #[arg(long, value_name = "nR,nchi,ntheta", value_parser = parse_quad)]
    pub quad: Option<QuadArg>,
    #[arg(long)]
    pub ellmax: Option<f64>,
    #[arg(long, value_enum)]
    pub refresh_f: Option<RefreshArg>,
    #[arg(long, value_enum)]
    pub boundary_rule: Option<RuleArg>,
    /// g_s grid, lo:hi:n or a single value.
    #[arg(long, allow_hyphen_values = true)]
    pub gs: Option<Grid>,
    /// γ/v_F grid, lo:hi:n or a single value.
    #[arg(long, allow_hyphen_values = true)]
    pub gamma: Option<Grid>,
    /// Separation grid for `correlations`.
    #[arg(long, allow_hyphen_values = true)]
    pub x: Option<Grid>,
    #[arg(long)]
    pub sites: Option<usize>,
    #[arg(long)]
    pub n_traj: Option<usize>,
    #[arg(long)]
    pub t_final: Option<f64>,
    #[arg(long)]
    pub dt: Option<f64>,
}

/// Config file, then flags. A single-valued --gs/--gamma also sets the
/// physical point used by point commands.
pub fn resolve(cli: &Cli) -> Result<RunConfig, CliError> {
    let mut cfg = match &cli.config {
        Some(path) => {
            let text = fs::read_to_string(path)
                .map_err(|e| CliError::Validation(format!("config {}: {e}", path.display())))?;
            serde_json::from_str(&text).map_err(|e| CliError::Validation(format!("config {}: {e}", path.display())))?
        }
        None => RunConfig::default(),
    };
    if cli.command.is_some() {
        cfg.command = cli.command;
    }
    if let Some(out) = &cli.out {
        cfg.out = out.clone();
    }
    if let Some(seed) = cli.seed {
        cfg.lattice.seed = seed;
    }
    if let Some(QuadArg(n_r, n_chi, n_theta)) = cli.quad {
        cfg.flow.quad.n_r = n_r;
        cfg.flow.quad.n_chi = n_chi;
        cfg.flow.quad.n_theta = n_theta;
    }
    if let Some(ell) = cli.ellmax {
        cfg.flow.ell_max = ell;
    }
    if let Some(r) = cli.refresh_f {
        cfg.flow.refresh = match r {
            RefreshArg::Auto => RefreshMode::Auto,
            RefreshArg::Always => RefreshMode::Always,
        };
    }
    if let Some(r) = cli.boundary_rule {
        cfg.boundary_rule = match r {
            RuleArg::Re => BoundaryRule::Re,
            RuleArg::Abs => BoundaryRule::Abs,
        };
    }
    if let Some(g) = cli.gs {
        cfg.grid.g_s = g;
        if g.is_single() {
            cfg.physical.g_s = g.lo;
        }
    }
    if let Some(g) = cli.gamma {
        cfg.grid.gamma = g;
        if g.is_single() {
            cfg.physical.gamma = g.lo;
        }
    }
    if let Some(x) = cli.x {
        cfg.grid.x = x;
    }
    if let Some(v) = cli.sites {
        cfg.lattice.sites = v;
    }
    if let Some(v) = cli.n_traj {
        cfg.lattice.n_traj = v;
    }
    if let Some(v) = cli.t_final {
        cfg.lattice.t_final = v;
    }
    if let Some(v) = cli.dt {
        cfg.lattice.dt = v;
    }
    Ok(cfg)
}

/// Input checks that do not need any numerics.
pub fn check_config(cfg: &RunConfig) -> Result<Command, CliError> {
    fn bad<T>(m: String) -> Result<T, CliError> {
        Err(CliError::Validation(m))
    }
    let Some(cmd) = cfg.command else {
        return bad("no command given (positional argument or \"command\" in the config)".into());
    };
    let physical_point = |g_s, gamma| {
        aqm_core::params::PhysicalParams {
            g_s,
            gamma,
            ..cfg.physical
        }
        .validate()
        .map_err(|e| CliError::Validation(format!("params: {e}")))
    };
    let check_flow = || -> Result<(), CliError> {
        cfg.flow
            .quad
            .validate()
            .map_err(|e| CliError::Validation(format!("rgflow: {e}")))?;
        if !(cfg.flow.ell_max > 0.0 && cfg.flow.ell_max.is_finite()) {
            return bad(format!("rgflow: ell_max must be positive (got {})", cfg.flow.ell_max));
        }
        Ok(())
    };
    let check_grid = || -> Result<(), CliError> {
        for g in cfg.grid.g_s.values() {
            for y in cfg.grid.gamma.values() {
                physical_point(g, y)?;
            }
        }
        Ok(())
    };
    match cmd {
        Command::PhaseDiagram => {
            check_flow()?;
            check_grid()?;
        }
        Command::Boundary => {
            check_flow()?;
            check_grid()?;
            if !(cfg.boundary_tol > 0.0) {
                return bad(format!("boundary_tol must be positive (got {})", cfg.boundary_tol));
            }
        }
        Command::Coefficients => check_grid()?,
        Command::Correlations => {
            physical_point(cfg.physical.g_s, cfg.physical.gamma)?;
            if cfg.grid.x.values().contains(&0.0) {
                return bad("correlations: separations must be nonzero".into());
            }
        }
        Command::Xi => {
            if cfg.xi.k_tilde.is_empty() || cfg.xi.m_lambda.is_empty() {
                return bad("xi: k_tilde and m_lambda must be non-empty".into());
            }
            if cfg.xi.alpha.abs() != 1 {
                return bad(format!("xi: alpha must be ±1 (got {})", cfg.xi.alpha));
            }
            if cfg.xi.m_lambda.iter().any(|m| !(m.is_finite() && *m > 0.0)) {
                return bad("xi: masses must be positive".into());
            }
        }
        Command::Trajectory => {
            cfg.lattice
                .validate()
                .map_err(|e| CliError::Validation(format!("lattice: {e}")))?;
            if cfg.lattice.n_traj == 0 {
                return bad("lattice: n_traj must be at least 1".into());
            }
        }
        Command::Validate => {}
    }
    Ok(cmd)
}

/// Validates, writes the manifest and runs the command on a pool of
/// `threads` workers (rayon's default when `None`).
pub fn run(cfg: &RunConfig, threads: Option<usize>) -> Result<Outcome, CliError> {
    let cmd = check_config(cfg)?;
    let mut builder = rayon::ThreadPoolBuilder::new();
    match threads {
        Some(0) => return Err(CliError::Validation("--threads must be at least 1".into())),
        Some(n) => builder = builder.num_threads(n),
        None => {}
    }
    let pool = builder.build().map_err(|e| CliError::Io(io::Error::other(e)))?;
    fs::create_dir_all(&cfg.out)?;
    let manifest = output::write_manifest(cfg, &cfg.out)?;
    let mut outcome = pool.install(|| run_command(cmd, cfg, &cfg.out))?;
    outcome.files.insert(0, manifest);
    Ok(outcome)
}

/// Full command-line entry point; returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let result = resolve(&cli).and_then(|cfg| run(&cfg, cli.threads));
    match result {
        Ok(outcome) => {
            for f in &outcome.files {
                println!("wrote {}", f.display());
            }
            if outcome.failures > 0 {
                eprintln!("error: {} point(s) failed; see failures report", outcome.failures);
                3
            } else {
                0
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
