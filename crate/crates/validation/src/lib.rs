//! End-to-end acceptance criteria. Each criterion runs its own workload and
//! returns a verdict made of one or more sub-checks.

use std::f64::consts::PI;
use std::fs;
use std::time::{Duration, Instant};

use aqm_cli::{Command, RunConfig};
use aqm_core::gfp::{
    correlation_length, fitted_length, six_coefficients, solve_fixed_point, CorrelationCoefficients, C,
};
use aqm_core::lattice::{
    build_operators, completeness_defect, dense, kraus_pair, lindblad_identity_check, run_ensemble,
    two_replica_correlator, Boundary, LatticeParams,
};
use aqm_core::ode::StepSpec;
use aqm_core::params::{bare_couplings, PhysicalParams};
use aqm_core::rgflow::{
    analytic_boundary, evaluate_point, integrate_flow, numeric_boundary, phase_diagram_scan, BoundaryRule, FIntegrator,
    FMode, FlowOptions, Phase, QuadSpec,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone)]
pub struct SubCheck {
    pub label: String,
    pub pass: bool,
    pub detail: String,
}

#[derive(Debug, Clone)]
pub struct Verdict {
    pub name: &'static str,
    pub checks: Vec<SubCheck>,
    pub elapsed: Duration,
}

impl Verdict {
    pub fn pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }
}

struct Builder {
    name: &'static str,
    start: Instant,
    checks: Vec<SubCheck>,
}

impl Builder {
    fn new(name: &'static str) -> Self {
        Self {
            name,
            start: Instant::now(),
            checks: Vec::new(),
        }
    }

    fn check(&mut self, label: impl Into<String>, pass: bool, detail: impl Into<String>) {
        self.checks.push(SubCheck {
            label: label.into(),
            pass,
            detail: detail.into(),
        });
    }

    fn runtime(&mut self, limit: Duration) {
        let t = self.start.elapsed();
        self.check(format!("runtime < {limit:?}"), t < limit, format!("{t:.2?}"));
    }

    fn finish(self) -> Verdict {
        Verdict {
            name: self.name,
            elapsed: self.start.elapsed(),
            checks: self.checks,
        }
    }
}

fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| {
            if i + 1 == n {
                hi
            } else {
                lo + (hi - lo) * (i as f64 / (n - 1) as f64)
            }
        })
        .collect()
}

fn coefficients_at(g_s: f64, gamma: f64) -> Result<CorrelationCoefficients, String> {
    let p = PhysicalParams::new(g_s, gamma);
    let c = bare_couplings(&p).map_err(|e| e.to_string())?;
    six_coefficients(&c, p.v_f).map_err(|e| e.to_string())
}

/// First index where `xs` fails to move in the required direction.
fn first_violation(xs: &[f64], increasing: bool) -> Option<usize> {
    xs.windows(2)
        .position(|w| if increasing { !(w[1] > w[0]) } else { !(w[1] < w[0]) })
}

fn trend(label: &str, axis: &str, grid: &[f64], values: &[f64], increasing: bool) -> SubCheck {
    let dir = if increasing { "increasing" } else { "decreasing" };
    match first_violation(values, increasing) {
        None => SubCheck {
            label: format!("{label} strictly {dir} in {axis}"),
            pass: true,
            detail: format!(
                "{:.6e} → {:.6e} over {} points",
                values[0],
                values[values.len() - 1],
                values.len()
            ),
        },
        Some(i) => SubCheck {
            label: format!("{label} strictly {dir} in {axis}"),
            pass: false,
            detail: format!(
                "{:.6e} at {axis} = {:.4} then {:.6e} at {:.4}",
                values[i],
                grid[i],
                values[i + 1],
                grid[i + 1]
            ),
        },
    }
}

pub fn equilibrium_limit() -> Verdict {
    let mut b = Builder::new("equilibrium limit of the six coefficients");
    let p2 = PI * PI;
    let mut worst = 0.0f64;
    let mut error = None;
    for g_s in [1.0, 1.5, 2.0, 3.0] {
        match coefficients_at(g_s, 0.0) {
            Ok(k) => {
                let expect = [1.0 / p2, g_s / p2, 1.0 / p2, 1.0 / (g_s * p2), 0.0, 0.0];
                let got = [
                    k.sigma_plus_c,
                    k.sigma_plus_s,
                    k.sigma_minus_c,
                    k.sigma_minus_s,
                    k.delta_cs,
                    k.delta_sc,
                ];
                for (a, e) in got.iter().zip(expect) {
                    worst = worst.max((a - e).abs());
                }
            }
            Err(e) => error = Some(e),
        }
    }
    match error {
        Some(e) => b.check("all points solved", false, e),
        None => b.check("max deviation ≤ 1e-10", worst <= 1e-10, format!("{worst:.3e}")),
    }
    b.runtime(Duration::from_secs(1));
    b.finish()
}

pub fn algebraic_identities() -> Verdict {
    let mut b = Builder::new("pseudo-unitarity and vanishing identities on a 20×20 algebraic grid");
    let opts = FlowOptions::default();
    let (mut pu, mut vanish, mut leak) = (0.0f64, 0.0f64, 0.0f64);
    let (mut algebraic, mut errors) = (0, Vec::new());
    for g_s in linspace(1.5, 3.0, 20) {
        for gamma in linspace(0.05, 1.0, 20) {
            let p = PhysicalParams::new(g_s, gamma);
            let solved = evaluate_point(&p, &opts).map_err(|e| e.to_string()).and_then(|pt| {
                if pt.phase != Phase::Algebraic {
                    return Ok(None);
                }
                let c = bare_couplings(&p).map_err(|e| e.to_string())?;
                solve_fixed_point(&c, p.v_f).map(Some).map_err(|e| e.to_string())
            });
            match solved {
                Ok(Some(fp)) => {
                    algebraic += 1;
                    pu = pu.max(fp.transform.pseudo_unitarity);
                    vanish = vanish.max(fp.tables.vanishing_max());
                    leak = leak.max(fp.coefficients.imag_leakage);
                }
                Ok(None) => {}
                Err(e) => errors.push(format!("({g_s:.3}, {gamma:.3}): {e}")),
            }
        }
    }
    b.check(
        "all points solved",
        errors.is_empty(),
        format!(
            "{algebraic} algebraic of 400; {} errors {:?}",
            errors.len(),
            errors.first()
        ),
    );
    b.check("‖V†τ₃V − τ₃‖ < 1e-10", pu < 1e-10, format!("{pu:.3e}"));
    b.check("vanishing traces < 1e-10", vanish < 1e-10, format!("{vanish:.3e}"));
    b.check("imag_leakage < 1e-8", leak < 1e-8, format!("{leak:.3e}"));
    b.runtime(Duration::from_secs(60));
    b.finish()
}

pub fn frozen_flow_oracle() -> Verdict {
    let mut b = Builder::new("frozen-coupling flow against the exponential solution");
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let opts = FlowOptions {
        f_mode: FMode::Frozen,
        ell_max: 5.0,
        escape_ratio: f64::INFINITY,
        weak_ratio: 0.0,
        step: StepSpec {
            rtol: 1e-10,
            atol: 1e-20,
            ..StepSpec::default()
        },
        ..FlowOptions::default()
    };
    for _ in 0..5 {
        let angle = rng.random_range(0.05..PI / 2.0 - 0.05);
        let p = PhysicalParams {
            g_s: rng.random_range(1.0..3.0),
            gamma: rng.random_range(0.0..1.0),
            c_tilde: f64::cos(angle),
            s_tilde: f64::sin(angle),
            ..PhysicalParams::default()
        };
        let label = format!("g_s = {:.4}, γ = {:.4}, c̃ = {:.4}", p.g_s, p.gamma, p.c_tilde);
        let result = bare_couplings(&p).map_err(|e| e.to_string()).and_then(|c| {
            let t = integrate_flow(&c, &opts).map_err(|e| e.to_string())?;
            let dim = C::from(2.0) - c.k_c.sqrt().inv() - c.k_s.sqrt().inv();
            let exact = c.lambda * (dim * 5.0).exp();
            if t.last().ell != 5.0 {
                return Err(format!("flow stopped at ℓ = {}", t.last().ell));
            }
            Ok((t.last().lambda - exact).norm() / exact.norm())
        });
        match result {
            Ok(rel) => b.check(label, rel < 1e-8, format!("relative error {rel:.3e}")),
            Err(e) => b.check(label, false, e),
        }
    }
    b.finish()
}

pub fn f_integral() -> Verdict {
    let mut b = Builder::new("f integrals at the reference point");
    let c = match bare_couplings(&PhysicalParams::default()) {
        Ok(c) => c,
        Err(e) => {
            b.check("couplings", false, e.to_string());
            return b.finish();
        }
    };
    let l = [C::from(1.0); 2];
    let spec = QuadSpec::default();
    let eval = |s: QuadSpec| FIntegrator::new(s).and_then(|f| f.eval(l, c.k()));
    match (eval(spec), eval(spec.doubled())) {
        (Ok(f), Ok(g)) => {
            let rel = |a: C, b: C| (a - b).norm() / b.norm();
            let doubling = rel(f.f_t, g.f_t).max(rel(f.f_x, g.f_x));
            b.check("node doubling < 1e-5", doubling < 1e-5, format!("{doubling:.3e}"));
            let ratio = (g.f_t - g.f_x).norm() / g.f_t.norm();
            b.check(
                "|f_t − f_x|/|f_t| ≤ 0.1",
                ratio <= 0.1,
                format!("{ratio:.4} (f_t = {:.6}, f_x = {:.6})", g.f_t, g.f_x),
            );
            let (mt, mx) = (g.f_t.norm(), g.f_x.norm());
            let inside = |m: f64| (0.1..=10.0).contains(&m);
            b.check(
                "|f| in [0.1, 10]",
                inside(mt) && inside(mx),
                format!("|f_t| = {mt:.4}, |f_x| = {mx:.4}"),
            );
        }
        (Err(e), _) | (_, Err(e)) => b.check("quadrature", false, e.to_string()),
    }
    b.finish()
}

/// Bisected first algebraic→short-range crossing for each g_s, on a γ range
/// wide enough to contain it.
fn bisected_boundary(g_s: &[f64], opts: &FlowOptions) -> Vec<Result<Option<f64>, String>> {
    let base = PhysicalParams::default();
    let gammas = linspace(0.0, 2.5, 101);
    g_s.iter()
        .map(|&g| numeric_boundary(&base, g, &gammas, opts, 1e-3).map_err(|e| e.to_string()))
        .collect()
}

pub fn phase_diagram() -> Verdict {
    let mut b = Builder::new("phase-diagram structure on 41×41");
    let base = PhysicalParams::default();
    let opts = FlowOptions::default();
    let g_s = linspace(1.0, 3.0, 41);
    let gamma = linspace(0.0, 1.0, 41);

    let t = Instant::now();
    let scan = phase_diagram_scan(&base, &g_s, &gamma, &opts);
    let grid_time = t.elapsed();
    let failures = scan.iter().filter(|r| r.is_err()).count();
    b.check(
        "all 1681 points classified",
        failures == 0,
        format!("{failures} failures in {grid_time:.2?}"),
    );

    let column: Vec<f64> = gamma.iter().copied().filter(|&y| y >= 0.05).collect();
    let col = phase_diagram_scan(&base, &[1.01], &column, &opts);
    let algebraic: Vec<String> = col
        .iter()
        .filter_map(|r| match r {
            Ok(p) if p.phase == Phase::Algebraic => Some(format!("{:.3}", p.gamma)),
            Ok(_) => None,
            Err(f) => Some(format!("{:.3}(error)", f.gamma)),
        })
        .collect();
    b.check(
        "(i) g_s = 1.01 column short-range for γ ≥ 0.05",
        algebraic.is_empty(),
        format!(
            "{} of {} points not short-range: γ = {}",
            algebraic.len(),
            column.len(),
            algebraic.join(" ")
        ),
    );

    let boundary = bisected_boundary(&g_s, &opts);
    let in_window = boundary
        .iter()
        .filter(|r| matches!(r, Ok(Some(y)) if *y <= 1.0))
        .count();
    let values: Result<Vec<f64>, String> = boundary
        .iter()
        .zip(&g_s)
        .map(|(r, g)| match r {
            Ok(Some(y)) => Ok(*y),
            Ok(None) => Err(format!("no crossing below γ = 2.5 at g_s = {g}")),
            Err(e) => Err(format!("g_s = {g}: {e}")),
        })
        .collect();
    match &values {
        Ok(v) => {
            let mut sc = trend("(ii) numerical γ_c(g_s)", "g_s", &g_s, v, true);
            let (imax, vmax) = v
                .iter()
                .enumerate()
                .fold((0, f64::MIN), |m, (i, &y)| if y > m.1 { (i, y) } else { m });
            sc.detail = format!(
                "{}; peak γ_c = {vmax:.4} at g_s = {:.2}; {in_window} of 41 crossings lie inside γ ≤ 1",
                sc.detail, g_s[imax]
            );
            b.checks.push(sc);
        }
        Err(e) => b.check("(ii) numerical γ_c(g_s) monotone", false, e.clone()),
    }

    let mut ratios = Vec::new();
    let mut errors = Vec::new();
    for (i, &g) in g_s.iter().enumerate().filter(|(_, &g)| g >= 1.5 - 1e-12) {
        match (&boundary[i], analytic_boundary(&base, g, BoundaryRule::Re, 2.5)) {
            (Ok(Some(n)), Ok(a)) => ratios.push(n / a),
            (n, a) => errors.push(format!("g_s = {g}: numeric {n:?}, analytic {a:?}")),
        }
    }
    let (lo, hi) = ratios
        .iter()
        .fold((f64::MAX, f64::MIN), |(l, h), &r| (l.min(r), h.max(r)));
    b.check(
        "(iii) γ_c within [0.5, 2]× analytic for g_s ∈ [1.5, 3]",
        errors.is_empty() && lo >= 0.5 && hi <= 2.0,
        format!(
            "ratio range [{lo:.4}, {hi:.4}] over {} columns; {:?}",
            ratios.len(),
            errors.first()
        ),
    );
    b.runtime(Duration::from_secs(600));
    b.finish()
}

pub fn coefficient_trends() -> Verdict {
    let mut b = Builder::new("coefficient trends");
    let opts = FlowOptions::default();

    match bisected_boundary(&[2.0], &opts).remove(0) {
        Ok(Some(gamma_c)) => {
            let gammas: Vec<f64> = (0..).map(|i| 0.025 * i as f64).take_while(|&y| y < gamma_c).collect();
            match gammas
                .iter()
                .map(|&y| coefficients_at(2.0, y))
                .collect::<Result<Vec<_>, _>>()
            {
                Ok(ks) => {
                    let pick = |f: fn(&CorrelationCoefficients) -> f64| ks.iter().map(f).collect::<Vec<_>>();
                    b.checks
                        .push(trend("g_s = 2: Δ_sc", "γ", &gammas, &pick(|k| k.delta_sc), true));
                    b.checks
                        .push(trend("g_s = 2: Σ⁻_s", "γ", &gammas, &pick(|k| k.sigma_minus_s), true));
                    b.checks
                        .push(trend("g_s = 2: Σ⁺_s", "γ", &gammas, &pick(|k| k.sigma_plus_s), false));
                }
                Err(e) => b.check("g_s = 2 linecut", false, e),
            }
        }
        other => b.check("g_s = 2 boundary", false, format!("{other:?}")),
    }

    let mut g_s = Vec::new();
    let mut ks = Vec::new();
    for g in linspace(1.0, 3.0, 41) {
        let p = PhysicalParams::new(g, 0.5);
        match evaluate_point(&p, &opts) {
            Ok(pt) if pt.phase == Phase::Algebraic => match coefficients_at(g, 0.5) {
                Ok(k) => {
                    g_s.push(g);
                    ks.push(k);
                }
                Err(e) => b.check(format!("coefficients at g_s = {g}"), false, e),
            },
            Ok(_) => {}
            Err(e) => b.check(format!("flow at g_s = {g}"), false, e.to_string()),
        }
    }
    if ks.len() < 2 {
        b.check("γ = 0.5 linecut", false, "fewer than two algebraic points");
    } else {
        let pick = |f: fn(&CorrelationCoefficients) -> f64| ks.iter().map(f).collect::<Vec<_>>();
        b.checks
            .push(trend("γ = 0.5: Δ_sc", "g_s", &g_s, &pick(|k| k.delta_sc), true));
        b.checks
            .push(trend("γ = 0.5: Δ_cs", "g_s", &g_s, &pick(|k| k.delta_cs), false));
        b.checks
            .push(trend("γ = 0.5: Σ⁻_s", "g_s", &g_s, &pick(|k| k.sigma_minus_s), true));
        b.checks
            .push(trend("γ = 0.5: Σ⁺_s", "g_s", &g_s, &pick(|k| k.sigma_plus_s), false));
    }
    b.finish()
}

pub fn strong_coupling_decay() -> Verdict {
    let mut b = Builder::new("strong-coupling correlation length");
    let ks = [C::new(1.0, 0.0), C::new(0.5, -0.3), C::new(0.25, -0.15)];
    let ms = [0.5, 1.0, 2.0];
    for k in ks {
        for m in ms {
            let label = format!("k̃ = {k:.2}, m_λ = {m}: ξ_fit within 5%");
            match fitted_length(k, m, 1.0, 1) {
                Ok((xi, fit)) => {
                    let ratio = 1.0 / fit.rate / xi;
                    b.check(label, (ratio - 1.0).abs() <= 0.05, format!("ξ_fit/ξ = {ratio:.4}"));
                }
                Err(e) => b.check(label, false, e.to_string()),
            }
        }
    }
    let mut worst = 0.0f64;
    for k in ks {
        for m in ms {
            match (correlation_length(k, k, m, 1.0), correlation_length(k, k, 2.0 * m, 1.0)) {
                (Ok(a), Ok(d)) => worst = worst.max((2.0 * d.xi_nu / a.xi_nu - 1.0).abs()),
                _ => worst = f64::NAN,
            }
        }
    }
    b.check(
        "ξ(2m) = ξ(m)/2",
        worst <= f64::EPSILON,
        format!("max |2ξ(2m)/ξ(m) − 1| = {worst:.3e}"),
    );
    b.finish()
}

pub fn lattice_suite() -> Verdict {
    let mut b = Builder::new("lattice trajectories (L = 4, 200 trajectories)");
    let p = LatticeParams::default();
    let res = match run_ensemble(&p) {
        Ok(r) => r,
        Err(e) => {
            b.check("ensemble", false, e.to_string());
            return b.finish();
        }
    };
    b.check(
        "per-trajectory purity ≡ 1",
        res.max_trajectory_purity_defect < 1e-12,
        format!("max defect {:.3e}", res.max_trajectory_purity_defect),
    );
    let first = res.purity[0];
    let last = *res.purity.last().expect("at least one sample");
    let mixed = 1.0 / res.sector_dim as f64;
    b.check(
        "tr ρ₁² decays to 1/D within 2σ",
        first.purity > last.purity && (last.purity - mixed).abs() <= 2.0 * last.stderr,
        format!(
            "t = {}: {:.5} ± {:.5} vs 1/D = {mixed:.5} (D = {})",
            last.time, last.purity, last.stderr, res.sector_dim
        ),
    );
    match lindblad_identity_check(&p, Boundary::Ring) {
        Ok(r) => b.check("ring Lindblad identity < 1e-14", r < 1e-14, format!("{r:.3e}")),
        Err(e) => b.check("ring Lindblad identity", false, e.to_string()),
    }
    match build_operators(&p, Boundary::Ring) {
        Ok(ops) => {
            let ratios: Vec<f64> = ops
                .jumps
                .iter()
                .map(|j| {
                    let l = dense(&j.op);
                    let defect = |dt| {
                        let (k0, k1) = kraus_pair(&l, dt);
                        completeness_defect(&k0, &k1)
                    };
                    defect(p.dt) / defect(p.dt / 2.0)
                })
                .collect();
            let off = ratios.iter().fold(0.0f64, |m, r| m.max((r / 4.0 - 1.0).abs()));
            b.check(
                "Kraus defect ratio 4 ± 5%",
                off <= 0.05,
                format!("max |ratio/4 − 1| = {off:.3e}"),
            );
            let gap = res.correlators.entries.iter().fold(0.0f64, |m, e| {
                m.max((e.value - two_replica_correlator(&ops, &res.states, e.a, e.b, e.x)).abs())
            });
            b.check(
                "connected vs two-replica estimator ≤ 1e-12",
                gap <= 1e-12,
                format!("{gap:.3e}"),
            );
        }
        Err(e) => b.check("operators", false, e.to_string()),
    }
    b.runtime(Duration::from_secs(300));
    b.finish()
}

fn csv_bytes(cfg: &RunConfig, threads: usize, files: &[&str]) -> Result<Vec<Vec<u8>>, String> {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let cfg = RunConfig {
        out: dir.path().to_path_buf(),
        ..cfg.clone()
    };
    let outcome = aqm_cli::run(&cfg, Some(threads)).map_err(|e| e.to_string())?;
    if outcome.failures > 0 {
        return Err(format!("{} failed points", outcome.failures));
    }
    files
        .iter()
        .map(|f| fs::read(dir.path().join(f)).map_err(|e| e.to_string()))
        .collect()
}

pub fn determinism() -> Verdict {
    let mut b = Builder::new("thread-count determinism");
    let runs = [
        (Command::PhaseDiagram, vec!["phase_diagram.csv"]),
        (Command::Trajectory, vec!["purity.csv", "trajectory_correlators.csv"]),
    ];
    for (cmd, files) in runs {
        let cfg = RunConfig {
            command: Some(cmd),
            ..RunConfig::default()
        };
        let label = format!("{cmd:?}: 1 vs 8 threads byte-identical");
        match (csv_bytes(&cfg, 1, &files), csv_bytes(&cfg, 8, &files)) {
            (Ok(a), Ok(c)) => {
                let size: usize = a.iter().map(Vec::len).sum();
                b.check(label, a == c, format!("{} files, {size} bytes", files.len()));
            }
            (Err(e), _) | (_, Err(e)) => b.check(label, false, e),
        }
    }
    b.finish()
}

/// Every criterion in order.
pub fn all() -> Vec<fn() -> Verdict> {
    vec![
        equilibrium_limit,
        algebraic_identities,
        frozen_flow_oracle,
        f_integral,
        phase_diagram,
        coefficient_trends,
        strong_coupling_decay,
        lattice_suite,
        determinism,
    ]
}
