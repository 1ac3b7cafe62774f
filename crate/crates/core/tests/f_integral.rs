//! The f integrals against a Bessel-function reduction evaluated in closed form.

use std::f64::consts::PI;

use aqm_core::params::{bare_couplings, PhysicalParams};
use aqm_core::rgflow::{f_coefficients, FIntegrator, FlowError, QuadSpec};
use num_complex::Complex64;
use proptest::prelude::*;

/// ∫₀^X R³ J_n(R) dR from the power series of J_n.
fn radial_moment(n: u32, x: f64) -> f64 {
    let mut sum = 0.0;
    let mut fact_m = 1.0;
    for m in 0..40u32 {
        if m > 0 {
            fact_m *= m as f64;
        }
        let fact_mn: f64 = (1..=(m + n)).map(|i| i as f64).product();
        let p = (2 * m + n) as i32;
        let term = (-1f64).powi(m as i32) / (fact_m * fact_mn * 2f64.powi(p)) * x.powi(p + 4) / (p + 4) as f64;
        sum += term;
        if term.abs() < 1e-18 {
            break;
        }
    }
    sum
}

/// ∫₀^{2π} dϑ / D and ∫₀^{2π} cos2ϑ dϑ / D with D = l cos²ϑ − k sin²ϑ, by residues.
fn angular_moments(l: Complex64, k: Complex64) -> (Complex64, Complex64) {
    let a = (l - k) * 0.5;
    let b = (l + k) * 0.5;
    let disc = (a * a - b * b).sqrt();
    let z1 = (-a + disc) / b;
    let z2 = (-a - disc) / b;
    let (zin, zout) = if z1.norm() < 1.0 { (z1, z2) } else { (z2, z1) };
    let i0 = Complex64::from(4.0 * PI) / (b * (zin - zout));
    let i2 = (Complex64::from(2.0 * PI) - a * i0) / b;
    (i0, i2)
}

fn oracle(l: [Complex64; 2], k: [Complex64; 2], cutoff: f64) -> (Complex64, Complex64) {
    let a0 = radial_moment(0, 1.0 / cutoff);
    let a2 = radial_moment(2, 1.0 / cutoff);
    let pre = -1.0 / (2.0 * cutoff.powi(4));
    let mut ft = Complex64::new(0.0, 0.0);
    let mut fx = Complex64::new(0.0, 0.0);
    for nu in 0..2 {
        let (i0, i2) = angular_moments(l[nu], k[nu]);
        ft += (i0 * a0 - i2 * a2) * PI;
        fx += (i0 * a0 + i2 * a2) * PI;
    }
    (ft * pre, fx * pre)
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn rel(a: Complex64, b: Complex64) -> f64 {
    (a - b).norm() / b.norm()
}

#[test]
fn matches_bessel_reduction_at_reference_point() {
    let cpl = bare_couplings(&PhysicalParams::new(2.0, 0.5)).unwrap();
    let l = [c(1.0, 0.0); 2];
    let f = f_coefficients(l, cpl.k(), QuadSpec::default()).unwrap();
    let (ft, fx) = oracle(l, cpl.k(), 1.0);
    assert!(rel(f.f_t, ft) < 1e-9, "{} vs {}", f.f_t, ft);
    assert!(rel(f.f_x, fx) < 1e-9, "{} vs {}", f.f_x, fx);
    // frozen from the oracle
    assert!((ft - c(-0.907_519_896_575_178_5, 5.980_142_916_016_161)).norm() < 1e-9);
    assert!((fx - c(-1.615_211_839_736_584_2, 5.516_768_886_243_74)).norm() < 1e-9);
}

#[test]
fn matches_bessel_reduction_with_flowed_l_and_cutoff() {
    let l = [c(1.2, 0.3), c(0.8, -0.1)];
    let k = [c(0.9, -0.05), c(0.2, -0.4)];
    for cutoff in [1.0, 0.7] {
        let spec = QuadSpec {
            lambda: cutoff,
            ..QuadSpec::default()
        };
        let f = f_coefficients(l, k, spec).unwrap();
        let (ft, fx) = oracle(l, k, cutoff);
        assert!(rel(f.f_t, ft) < 1e-8, "cutoff {cutoff}: {} vs {}", f.f_t, ft);
        assert!(rel(f.f_x, fx) < 1e-8, "cutoff {cutoff}: {} vs {}", f.f_x, fx);
    }
}

#[test]
fn near_real_pole_still_resolved() {
    let l = [c(1.0, 0.0); 2];
    let k = [c(0.5, -1e-4), c(0.25, -2e-3)];
    let f = f_coefficients(l, k, QuadSpec::default()).unwrap();
    let (ft, fx) = oracle(l, k, 1.0);
    assert!(rel(f.f_t, ft) < 1e-7, "{} vs {}", f.f_t, ft);
    assert!(rel(f.f_x, fx) < 1e-7);
}

#[test]
fn converged_between_default_and_doubled_nodes() {
    let cpl = bare_couplings(&PhysicalParams::new(1.5, 0.3)).unwrap();
    let l = [c(1.0, 0.0); 2];
    let a = FIntegrator::new(QuadSpec::new(24, 48, 48))
        .unwrap()
        .eval(l, cpl.k())
        .unwrap();
    let b = FIntegrator::new(QuadSpec::new(48, 96, 96))
        .unwrap()
        .eval(l, cpl.k())
        .unwrap();
    assert!(rel(a.f_t, b.f_t) < 1e-5);
    assert!(rel(a.f_x, b.f_x) < 1e-5);
}

#[test]
fn too_few_nodes_rejected() {
    assert!(matches!(
        FIntegrator::new(QuadSpec::new(4, 48, 48)),
        Err(FlowError::InvalidInput(_))
    ));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn agrees_with_oracle_off_axis(
        kr in 0.05f64..1.5, ki in -1.0f64..-0.01,
        kr2 in 0.05f64..1.5, ki2 in -1.0f64..-0.01,
    ) {
        let l = [c(1.0, 0.0); 2];
        let k = [c(kr, ki), c(kr2, ki2)];
        let f = FIntegrator::new(QuadSpec::default()).unwrap().eval(l, k).unwrap();
        let (ft, fx) = oracle(l, k, 1.0);
        prop_assert!(rel(f.f_t, ft) < 1e-7);
        prop_assert!(rel(f.f_x, fx) < 1e-7);
    }

    #[test]
    fn invariant_under_sector_exchange(
        kr in 0.05f64..1.5, ki in -1.0f64..-0.01,
        kr2 in 0.05f64..1.5, ki2 in -1.0f64..-0.01,
    ) {
        let l = [c(1.0, 0.0); 2];
        let integ = FIntegrator::new(QuadSpec::default()).unwrap();
        let a = integ.eval(l, [c(kr, ki), c(kr2, ki2)]).unwrap();
        let b = integ.eval(l, [c(kr2, ki2), c(kr, ki)]).unwrap();
        prop_assert!((a.f_t - b.f_t).norm() < 1e-12);
        prop_assert!((a.f_x - b.f_x).norm() < 1e-12);
    }
}
