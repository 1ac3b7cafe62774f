use aqm_core::gfp::{correlation_length, fit_decay, fitted_length, massive_correlator_f0};
use num_complex::Complex64 as C;
use std::f64::consts::PI;

/// Contribution of the simple pole of 1/Re ω on the positive imaginary axis,
/// q = i m/(v √|Im k̃|), where the two continued roots cancel.
fn pole_term(k: C, m: f64, v: f64, alpha: i32, x: f64) -> f64 {
    let p = m / (v * k.im.abs().sqrt());
    let qp = C::new(0.0, p);
    let mut w = (k * (v * v) * qp * qp - C::new(0.0, m * m)).sqrt();
    if w.im > 0.0 {
        w = -w;
    }
    // numerator of q (v q/|ω|)^α |ω|/Re ω continued: 2 v q²  or  2 ω ω̃ / v = −2 ω²/v
    let num = if alpha > 0 { 2.0 * v * qp * qp } else { -2.0 * w * w / v };
    let dsum = qp * (v * v) * (k - k.conj()) / w;
    let residue = num / dsum;
    (C::new(0.0, 2.0 * PI) * residue * (-p * x).exp() / (4.0 * PI)).re
}

fn samples(k: C, m: f64, alpha: i32, lo: f64, hi: f64, n: usize) -> (Vec<f64>, Vec<f64>, f64) {
    let xi = correlation_length(k, k, m, 1.0).unwrap().xi_nu;
    let xs: Vec<f64> = (0..n)
        .map(|i| xi * (lo + (hi - lo) * i as f64 / (n - 1) as f64))
        .collect();
    let fs = xs
        .iter()
        .map(|&x| massive_correlator_f0(k, m, 1.0, alpha, x).unwrap())
        .collect();
    (xs, fs, xi)
}

#[test]
fn fitted_length_scales_inversely_with_mass() {
    let k = C::new(0.8, -0.35);
    for alpha in [1, -1] {
        let (xi_a, fit_a) = fitted_length(k, 0.6, 1.0, alpha).unwrap();
        let (xi_b, fit_b) = fitted_length(k, 1.2, 1.0, alpha).unwrap();
        assert!((xi_b - xi_a / 2.0).abs() < 1e-14 * xi_a);
        assert!((fit_b.rate / fit_a.rate - 2.0).abs() < 1e-6, "alpha {alpha}");
        assert!(
            (fit_b.wavevector / fit_a.wavevector - 2.0).abs() < 1e-6,
            "alpha {alpha}"
        );
    }
}

#[test]
fn pole_term_is_not_negligible_at_short_range() {
    let k = C::new(0.5, -0.3);
    let (xs, fs, _) = samples(k, 1.0, 1, 2.0, 3.0, 3);
    for (x, f) in xs.iter().zip(&fs) {
        let p = pole_term(k, 1.0, 1.0, 1, *x);
        assert!(p.abs() > 0.1 * f.abs(), "pole term negligible at x = {x}");
    }
}

#[test]
fn branch_point_governs_late_decay() {
    let k = C::new(0.5, -0.3);
    let q0 = (C::new(0.0, 1.0) / k).sqrt();
    for alpha in [1, -1] {
        let (xs, fs, xi) = samples(k, 1.0, alpha, 9.0, 15.0, 241);
        let rest: Vec<f64> = xs
            .iter()
            .zip(&fs)
            .map(|(&x, &f)| f - pole_term(k, 1.0, 1.0, alpha, x))
            .collect();
        let fit = fit_decay(&xs, &rest, 40).unwrap();
        assert!((fit.wavevector / q0.re - 1.0).abs() < 0.02, "alpha {alpha}: {fit:?}");
        assert!((1.0 / (fit.rate * xi) - 1.0).abs() < 0.05, "alpha {alpha}: {fit:?}");
    }
}

#[test]
fn real_stiffness_has_no_pole_and_oscillates_at_the_decay_rate() {
    let k = C::new(1.0, 0.0);
    let (xs, fs, xi) = samples(k, 1.0, -1, 6.0, 14.0, 241);
    let fit = fit_decay(&xs, &fs, 40).unwrap();
    assert!((fit.wavevector * xi - 1.0).abs() < 0.05, "{fit:?}");
    assert!((1.0 / (fit.rate * xi) - 1.0).abs() < 0.05, "{fit:?}");
}
