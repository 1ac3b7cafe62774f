//! One runner per subcommand. Each writes its CSVs into `dir` and reports
//! how many sweep points failed.

use std::path::{Path, PathBuf};

use aqm_core::gfp::{correlation_length, correlation_matrix, fitted_length, six_coefficients, C, OBSERVABLES};
use aqm_core::lattice::run_ensemble;
use aqm_core::params::{bare_couplings, PhysicalParams};
use aqm_core::rgflow::{analytic_boundary, numeric_boundary, phase_diagram_scan, FlowError, Phase};
use rayon::prelude::*;

use crate::config::{Command, RunConfig};
use crate::output::{num, opt, Table};
use crate::validate::validation_suite;
use crate::CliError;

#[derive(Debug, Default)]
pub struct Outcome {
    pub files: Vec<PathBuf>,
    pub failures: usize,
}

impl Outcome {
    fn emit(&mut self, dir: &Path, name: &str, table: &Table) -> Result<(), CliError> {
        let path = dir.join(name);
        table.write(&path)?;
        self.files.push(path);
        Ok(())
    }

    fn emit_failures(&mut self, dir: &Path, table: &Table) -> Result<(), CliError> {
        self.failures = table.len();
        if !table.is_empty() {
            self.emit(dir, "failures.csv", table)?;
        }
        Ok(())
    }
}

pub fn run_command(cmd: Command, cfg: &RunConfig, dir: &Path) -> Result<Outcome, CliError> {
    match cmd {
        Command::PhaseDiagram => phase_diagram(cfg, dir),
        Command::Boundary => boundary(cfg, dir),
        Command::Coefficients => coefficients(cfg, dir),
        Command::Correlations => correlations(cfg, dir),
        Command::Xi => xi(cfg, dir),
        Command::Trajectory => trajectory(cfg, dir),
        Command::Validate => validate(cfg, dir),
    }
}

fn at(base: &PhysicalParams, g_s: f64, gamma: f64) -> PhysicalParams {
    PhysicalParams { g_s, gamma, ..*base }
}

fn grid_points(cfg: &RunConfig) -> Vec<(f64, f64)> {
    let gammas = cfg.grid.gamma.values();
    cfg.grid
        .g_s
        .values()
        .into_iter()
        .flat_map(|g| gammas.iter().map(move |&y| (g, y)))
        .collect()
}

fn phase_diagram(cfg: &RunConfig, dir: &Path) -> Result<Outcome, CliError> {
    let base = &cfg.physical;
    let scan = phase_diagram_scan(base, &cfg.grid.g_s.values(), &cfg.grid.gamma.values(), &cfg.flow);
    let rows: Vec<Result<Vec<String>, (f64, f64, String)>> = scan
        .into_par_iter()
        .map(|point| {
            let point = point.map_err(|f| (f.g_s, f.gamma, format!("rgflow: {}", f.error)))?;
            let delta_sc = match point.phase {
                Phase::Algebraic => {
                    let p = at(base, point.g_s, point.gamma);
                    let coeffs = bare_couplings(&p)
                        .map_err(|e| format!("params: {e}"))
                        .and_then(|c| six_coefficients(&c, p.v_f).map_err(|e| format!("gfp: {e}")))
                        .map_err(|e| (point.g_s, point.gamma, e))?;
                    Some(coeffs.delta_sc)
                }
                Phase::ShortRange => None,
            };
            Ok(vec![
                num(point.g_s),
                num(point.gamma),
                point.phase.code().to_string(),
                num(point.lambda_ratio),
                opt(delta_sc),
            ])
        })
        .collect();

    let mut table = Table::new(&["g_s", "gamma", "phase", "lambda_ratio", "delta_sc"]);
    let mut failed = Table::new(&["g_s", "gamma", "error"]);
    for row in rows {
        match row {
            Ok(r) => table.push(r),
            Err((g, y, e)) => failed.push(vec![num(g), num(y), e]),
        }
    }
    let mut out = Outcome::default();
    out.emit(dir, "phase_diagram.csv", &table)?;
    out.emit_failures(dir, &failed)?;
    Ok(out)
}

fn boundary(cfg: &RunConfig, dir: &Path) -> Result<Outcome, CliError> {
    let base = &cfg.physical;
    let gammas = cfg.grid.gamma.values();
    let gamma_max = *gammas.last().expect("grids are non-empty");
    type Row = (f64, Result<(Option<f64>, Option<f64>), String>);
    let rows: Vec<Row> = cfg
        .grid
        .g_s
        .values()
        .into_par_iter()
        .map(|g| {
            let numeric = numeric_boundary(base, g, &gammas, &cfg.flow, cfg.boundary_tol);
            let analytic = match analytic_boundary(base, g, cfg.boundary_rule, gamma_max) {
                Ok(v) => Ok(Some(v)),
                Err(FlowError::NoRoot { .. }) => Ok(None),
                Err(e) => Err(e),
            };
            let row = numeric
                .and_then(|n| analytic.map(|a| (n, a)))
                .map_err(|e| format!("rgflow: {e}"));
            (g, row)
        })
        .collect();

    let mut table = Table::new(&["g_s", "gamma_c_numeric", "gamma_c_analytic"]);
    let mut failed = Table::new(&["g_s", "error"]);
    for (g, row) in rows {
        match row {
            Ok((n, a)) => table.push(vec![num(g), opt(n), opt(a)]),
            Err(e) => failed.push(vec![num(g), e]),
        }
    }
    let mut out = Outcome::default();
    out.emit(dir, "boundary.csv", &table)?;
    out.emit_failures(dir, &failed)?;
    Ok(out)
}

fn coefficients(cfg: &RunConfig, dir: &Path) -> Result<Outcome, CliError> {
    let base = &cfg.physical;
    let rows: Vec<_> = grid_points(cfg)
        .into_par_iter()
        .map(|(g, y)| {
            let p = at(base, g, y);
            let k = bare_couplings(&p)
                .map_err(|e| format!("params: {e}"))
                .and_then(|c| six_coefficients(&c, p.v_f).map_err(|e| format!("gfp: {e}")));
            (g, y, k)
        })
        .collect();

    let mut table = Table::new(&[
        "g_s",
        "gamma",
        "sigma_plus_c",
        "sigma_plus_s",
        "sigma_minus_c",
        "sigma_minus_s",
        "delta_cs",
        "delta_sc",
        "imag_leakage",
    ]);
    let mut failed = Table::new(&["g_s", "gamma", "error"]);
    for (g, y, k) in rows {
        match k {
            Ok(k) => table.push(vec![
                num(g),
                num(y),
                num(k.sigma_plus_c),
                num(k.sigma_plus_s),
                num(k.sigma_minus_c),
                num(k.sigma_minus_s),
                num(k.delta_cs),
                num(k.delta_sc),
                num(k.imag_leakage),
            ]),
            Err(e) => failed.push(vec![num(g), num(y), e]),
        }
    }
    let mut out = Outcome::default();
    out.emit(dir, "coefficients.csv", &table)?;
    out.emit_failures(dir, &failed)?;
    Ok(out)
}

fn correlations(cfg: &RunConfig, dir: &Path) -> Result<Outcome, CliError> {
    let p = &cfg.physical;
    let cpl = bare_couplings(p).map_err(|e| CliError::Validation(format!("params: {e}")))?;
    let k = six_coefficients(&cpl, p.v_f).map_err(|e| CliError::Numerical(format!("gfp: {e}")))?;
    let mut table = Table::new(&["x", "a", "b", "value"]);
    for x in cfg.grid.x.values() {
        let m = correlation_matrix(&k, p.v_f, x).map_err(|e| CliError::Validation(format!("gfp: {e}")))?;
        for (i, a) in OBSERVABLES.iter().enumerate() {
            for (j, b) in OBSERVABLES.iter().enumerate() {
                table.push(vec![num(x), a.to_string(), b.to_string(), num(m[i][j])]);
            }
        }
    }
    let mut out = Outcome::default();
    out.emit(dir, "correlations.csv", &table)?;
    Ok(out)
}

fn xi(cfg: &RunConfig, dir: &Path) -> Result<Outcome, CliError> {
    let v_f = cfg.physical.v_f;
    let points: Vec<(C, f64)> = cfg
        .xi
        .k_tilde
        .iter()
        .flat_map(|&[re, im]| cfg.xi.m_lambda.iter().map(move |&m| (C::new(re, im), m)))
        .collect();
    let rows: Vec<_> = points
        .into_par_iter()
        .map(|(k, m)| {
            let row = correlation_length(k, k, m, v_f)
                .and_then(|l| fitted_length(k, m, v_f, cfg.xi.alpha).map(|(_, fit)| (l.xi_nu, 1.0 / fit.rate)))
                .map_err(|e| format!("gfp: {e}"));
            (k, m, row)
        })
        .collect();

    let mut table = Table::new(&["k_re", "k_im", "m_lambda", "xi_formula", "xi_fit"]);
    let mut failed = Table::new(&["k_re", "k_im", "m_lambda", "error"]);
    for (k, m, row) in rows {
        match row {
            Ok((formula, fit)) => table.push(vec![num(k.re), num(k.im), num(m), num(formula), num(fit)]),
            Err(e) => failed.push(vec![num(k.re), num(k.im), num(m), e]),
        }
    }
    let mut out = Outcome::default();
    out.emit(dir, "xi.csv", &table)?;
    out.emit_failures(dir, &failed)?;
    Ok(out)
}

fn trajectory(cfg: &RunConfig, dir: &Path) -> Result<Outcome, CliError> {
    let res = run_ensemble(&cfg.lattice).map_err(|e| CliError::Numerical(format!("lattice: {e}")))?;
    let mut purity = Table::new(&["time", "purity", "stderr"]);
    for s in &res.purity {
        purity.push(vec![num(s.time), num(s.purity), num(s.stderr)]);
    }
    let mut corr = Table::new(&["A", "B", "x", "value", "stderr"]);
    for e in &res.correlators.entries {
        corr.push(vec![
            e.a.label().to_string(),
            e.b.label().to_string(),
            e.x.to_string(),
            num(e.value),
            num(e.stderr),
        ]);
    }
    let mut out = Outcome::default();
    out.emit(dir, "purity.csv", &purity)?;
    out.emit(dir, "trajectory_correlators.csv", &corr)?;
    Ok(out)
}

fn validate(cfg: &RunConfig, dir: &Path) -> Result<Outcome, CliError> {
    let checks = validation_suite(cfg);
    let mut table = Table::new(&["check", "value", "tolerance", "status"]);
    let mut failed = 0;
    for c in &checks {
        let status = if c.pass { "PASS" } else { "FAIL" };
        println!("{status} {}: {:e} (tolerance {:e})", c.name, c.value, c.tolerance);
        failed += usize::from(!c.pass);
        table.push(vec![
            c.name.to_string(),
            num(c.value),
            num(c.tolerance),
            status.to_string(),
        ]);
    }
    let mut out = Outcome::default();
    out.emit(dir, "validate.csv", &table)?;
    out.failures = failed;
    Ok(out)
}
