//! Invariant suite behind the `validate` command.

use std::f64::consts::PI;

use aqm_core::gfp::{correlation_length, six_coefficients, solve_fixed_point, C};
use aqm_core::lattice::{
    build_operators, completeness_defect, dense, kraus_pair, lindblad_identity_check, run_ensemble,
    two_replica_correlator, Boundary, LatticeParams, Sector,
};
use aqm_core::ode::StepSpec;
use aqm_core::params::{bare_couplings, PhysicalParams};
use aqm_core::rgflow::{integrate_flow, FMode, FlowOptions};

use crate::config::RunConfig;

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub value: f64,
    pub tolerance: f64,
    pub pass: bool,
}

fn check<E>(name: &'static str, tolerance: f64, value: Result<f64, E>) -> Check {
    let value = value.unwrap_or(f64::NAN);
    Check {
        name,
        value,
        tolerance,
        pass: value <= tolerance,
    }
}

fn max_of(values: impl IntoIterator<Item = f64>) -> f64 {
    values.into_iter().fold(
        0.0,
        |m: f64, v: f64| if m.is_nan() || v.is_nan() { f64::NAN } else { m.max(v) },
    )
}

/// Runs every check; the base physical parameters supply g_c, c̃, s̃ and v_F.
pub fn validation_suite(cfg: &RunConfig) -> Vec<Check> {
    let base = cfg.physical;
    let at = |g_s, gamma| PhysicalParams { g_s, gamma, ..base };
    let algebraic = [(1.5, 0.2), (2.0, 0.5), (3.0, 0.8)];
    let mut out = Vec::new();

    out.push(check(
        "equilibrium_limit",
        1e-10,
        (|| {
            let mut worst = 0.0f64;
            for g_s in [1.0, 1.5, 2.0, 3.0] {
                let p = at(g_s, 0.0);
                let k = six_coefficients(&bare_couplings(&p).map_err(|e| e.to_string())?, p.v_f)
                    .map_err(|e| e.to_string())?;
                let p2 = PI * PI;
                let expect = [p.g_c / p2, g_s / p2, 1.0 / (p.g_c * p2), 1.0 / (g_s * p2), 0.0, 0.0];
                let got = [
                    k.sigma_plus_c,
                    k.sigma_plus_s,
                    k.sigma_minus_c,
                    k.sigma_minus_s,
                    k.delta_cs,
                    k.delta_sc,
                ];
                worst = max_of(got.iter().zip(expect).map(|(a, b)| (a - b).abs()).chain([worst]));
            }
            Ok::<_, String>(worst)
        })(),
    ));

    let fixed_points: Vec<_> = algebraic
        .iter()
        .map(|&(g, y)| {
            let p = at(g, y);
            bare_couplings(&p)
                .map_err(|e| e.to_string())
                .and_then(|c| solve_fixed_point(&c, p.v_f).map_err(|e| e.to_string()))
        })
        .collect();
    let over_points = |f: &dyn Fn(&aqm_core::gfp::FixedPoint) -> f64| -> Result<f64, String> {
        let mut worst = 0.0f64;
        for fp in &fixed_points {
            worst = max_of([worst, f(fp.as_ref().map_err(Clone::clone)?)]);
        }
        Ok(worst)
    };
    out.push(check(
        "pseudo_unitarity",
        1e-10,
        over_points(&|fp| fp.transform.pseudo_unitarity),
    ));
    out.push(check(
        "vanishing_traces",
        1e-10,
        over_points(&|fp| fp.tables.vanishing_max()),
    ));
    out.push(check(
        "imag_leakage",
        1e-8,
        over_points(&|fp| fp.coefficients.imag_leakage),
    ));

    out.push(check(
        "frozen_flow_oracle",
        1e-8,
        (|| {
            let step = StepSpec {
                rtol: 1e-10,
                atol: 1e-20,
                ..cfg.flow.step
            };
            let opts = FlowOptions {
                f_mode: FMode::Frozen,
                ell_max: 5.0,
                step,
                ..cfg.flow
            };
            let mut worst = 0.0f64;
            for &(g, y) in &algebraic {
                let c = bare_couplings(&at(g, y)).map_err(|e| e.to_string())?;
                let trace = integrate_flow(&c, &opts).map_err(|e| e.to_string())?;
                let dim = C::from(2.0) - c.k_c.sqrt().inv() - c.k_s.sqrt().inv();
                let exact = c.lambda * (dim * 5.0).exp();
                worst = max_of([worst, (trace.last().lambda - exact).norm() / exact.norm()]);
            }
            Ok::<_, String>(worst)
        })(),
    ));

    out.push(check(
        "xi_mass_scaling",
        1e-15,
        (|| {
            let mut worst = 0.0f64;
            for k in [C::new(1.0, 0.0), C::new(0.5, -0.3)] {
                let xi = |m| correlation_length(k, k, m, base.v_f).map(|l| l.xi_nu);
                worst = max_of([worst, (2.0 * xi(1.4)? / xi(0.7)? - 1.0).abs()]);
            }
            Ok::<_, aqm_core::gfp::GfpError>(worst)
        })(),
    ));

    let ring = LatticeParams {
        sites: 3,
        sector: Sector::Spin { n_up: 2, n_dn: 1 },
        gamma: 0.9,
        jz: 0.7,
        ..LatticeParams::default()
    };
    out.push(check(
        "lindblad_identity_ring",
        1e-14,
        lindblad_identity_check(&ring, Boundary::Ring),
    ));

    out.push(check(
        "kraus_defect_ratio",
        0.05,
        (|| {
            let ops = build_operators(&ring, Boundary::Ring)?;
            let l = dense(&ops.jumps[0].op);
            let defect = |dt| {
                let (k0, k1) = kraus_pair(&l, dt);
                completeness_defect(&k0, &k1)
            };
            Ok::<_, aqm_core::lattice::LatticeError>((defect(1e-3) / defect(5e-4) / 4.0 - 1.0).abs())
        })(),
    ));

    let small = LatticeParams {
        sites: 2,
        sector: Sector::Spin { n_up: 1, n_dn: 1 },
        t_final: 0.5,
        n_traj: 4,
        samples: 2,
        ..ring
    };
    let ensemble = run_ensemble(&small);
    out.push(check(
        "trajectory_purity",
        1e-12,
        ensemble.as_ref().map(|r| r.max_trajectory_purity_defect),
    ));
    out.push(check(
        "estimator_identity",
        1e-12,
        (|| {
            let res = ensemble.as_ref().map_err(Clone::clone)?;
            let ops = build_operators(&small, Boundary::Ring)?;
            Ok::<_, aqm_core::lattice::LatticeError>(max_of(
                res.correlators
                    .entries
                    .iter()
                    .map(|e| (e.value - two_replica_correlator(&ops, &res.states, e.a, e.b, e.x)).abs()),
            ))
        })(),
    ));
    out
}
