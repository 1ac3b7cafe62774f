//! Strong-coupling fixed point: correlation lengths and the massive correlator.

use std::f64::consts::PI;

use nalgebra::{Matrix2, Matrix3, Vector2, Vector3};

use super::hamiltonian::dispersion;
use super::{GfpError, C};
use crate::quad::GaussLegendre;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Lengths {
    pub xi_nu: f64,
    pub xi_nu_prime: f64,
    pub xi_pair: f64,
}

/// Branch point of ω(q) in the upper half plane, √(i m²/k)/v.
fn branch_point(k: C, m_lambda: f64, v_f: f64) -> C {
    (C::new(0.0, m_lambda * m_lambda) / k).sqrt() / v_f
}

/// ξ = v_F / |Im √(i m²/k)| for both sectors; the pair decays with the longer one.
pub fn correlation_length(k_nu: C, k_nu_prime: C, m_lambda: f64, v_f: f64) -> Result<Lengths, GfpError> {
    if m_lambda == 0.0 || !m_lambda.is_finite() {
        return Err(GfpError::InvalidInput(
            "correlation length needs a finite nonzero mass".into(),
        ));
    }
    if k_nu.norm() == 0.0 || k_nu_prime.norm() == 0.0 {
        return Err(GfpError::InvalidInput("stiffness must be nonzero".into()));
    }
    let xi = |k: C| 1.0 / branch_point(k, m_lambda, v_f).im.abs();
    let (a, b) = (xi(k_nu), xi(k_nu_prime));
    Ok(Lengths {
        xi_nu: a,
        xi_nu_prime: b,
        xi_pair: a.max(b),
    })
}

const PANEL_ORDER: usize = 16;

/// The integrand q (v q/|ω|)^α |ω|/Re ω minus its large-q asymptote c q,
/// written without cancellation, together with c.
fn subtracted_kernel(k_tilde: C, m: f64, v_f: f64, alpha: i32) -> (impl Fn(f64) -> f64, f64) {
    let sk = k_tilde.sqrt();
    let rk = sk.re;
    let slope = if alpha > 0 { 1.0 / rk } else { k_tilde.norm() / rk };
    let f = move |q: f64| {
        let w = dispersion(k_tilde, q, m, v_f);
        let u = sk * (v_f * q);
        if u.norm() < 1e-3 * w.norm() {
            let full = if alpha > 0 {
                v_f * q * q / w.re
            } else {
                w.norm_sqr() / (v_f * w.re)
            };
            return full - slope * q;
        }
        // ω = u + δ with δ = −i m²/(u + ω)
        let d = C::new(0.0, -m * m) / (u + w);
        if alpha > 0 {
            -q * d.re / (w.re * rk)
        } else {
            let num = (2.0 * (u.conj() * d).re + d.norm_sqr()) * u.re - u.norm_sqr() * d.re;
            num / (v_f * q * v_f * w.re * rk)
        }
    };
    (f, slope)
}

/// ∫_Q^∞ cos(qx) q^{−n} dq by its asymptotic series in 1/(Qx).
fn power_tail(n: u32, q: f64, x: f64) -> f64 {
    let step = C::new(0.0, -1.0 / x);
    let mut term = C::new(0.0, 1.0 / x) * C::from_polar(1.0, q * x) * q.powi(-(n as i32));
    let mut sum = term;
    for k in 0..24 {
        term *= step * ((n + k) as f64 / q);
        sum += term;
        if term.norm() < 1e-18 * sum.norm() {
            break;
        }
    }
    sum.re
}

/// ∫₀^∞ cos(qx) h(q) dq for a smooth h with h(q) ~ A/q + B/q³ + C/q⁵ at large q:
/// Gauss–Legendre panels up to `q_max`, and the fitted expansion beyond it.
fn cosine_transform(h: &dyn Fn(f64) -> f64, x: f64, q_max: f64, fine_scale: f64, rule: &GaussLegendre) -> f64 {
    let mut breaks = Vec::new();
    let wave = PI / x;
    let n_wave = (q_max / wave).ceil() as usize;
    breaks.extend((0..=n_wave).map(|j| (j as f64 * wave).min(q_max)));
    if fine_scale > 0.0 {
        let step = fine_scale / 8.0;
        let mut q = step;
        while q < (40.0 * fine_scale).min(q_max) {
            breaks.push(q);
            q += step;
        }
    }
    breaks.sort_by(|a, b| a.partial_cmp(b).unwrap());
    breaks.dedup_by(|a, b| (*a - *b).abs() < 1e-14 * q_max);
    let mut body = 0.0;
    for w in breaks.windows(2) {
        body += rule.integrate(w[0], w[1], |q| (q * x).cos() * h(q));
    }
    // q·h(q) = A + B/q² + C/q⁴ sampled at Q, 2Q, 4Q
    let qs = [q_max, 2.0 * q_max, 4.0 * q_max];
    let m = Matrix3::from_fn(|i, j| (qs[i] / q_max).powi(-2 * j as i32));
    let rhs = Vector3::from_fn(|i, _| qs[i] * h(qs[i]));
    let coef = m.lu().solve(&rhs).unwrap_or_else(Vector3::zeros);
    let tail = coef[0] * power_tail(1, q_max, x)
        + coef[1] * q_max.powi(2) * power_tail(3, q_max, x)
        + coef[2] * q_max.powi(4) * power_tail(5, q_max, x);
    body + tail
}

/// F^{αα}(x) = ∫ dq/(4π) e^{iqx} q (v q/|ω|)^α |ω|/Re ω for the massive dispersion.
/// The integrand is even in q, so F is real.
pub fn massive_correlator_f0(k_tilde: C, m_lambda: f64, v_f: f64, alpha: i32, x: f64) -> Result<f64, GfpError> {
    if alpha != 1 && alpha != -1 {
        return Err(GfpError::InvalidInput(format!("alpha must be ±1 (got {alpha})")));
    }
    if x == 0.0 || !x.is_finite() {
        return Err(GfpError::InvalidInput(format!(
            "separation must be finite and nonzero (got {x})"
        )));
    }
    if m_lambda == 0.0 {
        return Err(GfpError::InvalidInput("massive correlator needs m_lambda ≠ 0".into()));
    }
    if !(k_tilde.sqrt().re > 0.0) {
        return Err(GfpError::InvalidInput(format!(
            "stiffness {k_tilde} has no positive-real root"
        )));
    }
    let x = x.abs();
    let (h, slope) = subtracted_kernel(k_tilde, m_lambda, v_f, alpha);
    let scale = branch_point(k_tilde, m_lambda, v_f).norm();
    let q_max = 40.0 * (1.0 / x).max(scale);
    let coarse = cosine_transform(&h, x, q_max, scale, &GaussLegendre::new(PANEL_ORDER));
    let fine = cosine_transform(&h, x, 2.0 * q_max, scale, &GaussLegendre::new(2 * PANEL_ORDER));
    let massless = -slope / (x * x);
    let tol = 1e-9 * massless.abs();
    if (coarse - fine).abs() > tol {
        return Err(GfpError::NonConvergence(format!(
            "refinement changed the transform by {:e} (tolerance {tol:e})",
            (coarse - fine).abs()
        )));
    }
    Ok((fine + massless) / (2.0 * PI))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayFit {
    /// Fitted exponential decay rate (inverse length).
    pub rate: f64,
    /// Fitted oscillation wavevector.
    pub wavevector: f64,
}

/// Fit z(x) = F(x) x^{3/2} on a uniform grid to a damped cosine via the
/// recurrence z(x+δ) = a₁ z(x) + a₂ z(x−δ), with δ = `lag` grid steps.
pub fn fit_decay(xs: &[f64], fs: &[f64], lag: usize) -> Result<DecayFit, GfpError> {
    if xs.len() != fs.len() || xs.len() < 2 * lag + 3 || lag == 0 {
        return Err(GfpError::InvalidInput("not enough samples for the decay fit".into()));
    }
    let delta = (xs[lag] - xs[0]).abs();
    let z: Vec<f64> = xs.iter().zip(fs).map(|(x, f)| f * x.abs().powf(1.5)).collect();
    let mut ata = Matrix2::<f64>::zeros();
    let mut atb = Vector2::<f64>::zeros();
    for n in lag..z.len() - lag {
        let row = Vector2::new(z[n], z[n - lag]);
        ata += row * row.transpose();
        atb += row * z[n + lag];
    }
    let sol = ata
        .lu()
        .solve(&atb)
        .ok_or_else(|| GfpError::NonConvergence("singular normal equations in decay fit".into()))?;
    let (a1, a2) = (sol[0], sol[1]);
    if !(a2 < 0.0) {
        return Err(GfpError::NonConvergence(format!("non-oscillatory fit (a₂ = {a2})")));
    }
    let r = (-a2).sqrt();
    let cos_theta = (a1 / (2.0 * r)).clamp(-1.0, 1.0);
    Ok(DecayFit {
        rate: -r.ln() / delta,
        wavevector: cos_theta.acos() / delta,
    })
}

/// Decay length fitted from F^{αα} sampled on [3ξ, 8ξ], ξ from the branch point.
pub fn fitted_length(k_tilde: C, m_lambda: f64, v_f: f64, alpha: i32) -> Result<(f64, DecayFit), GfpError> {
    let xi = correlation_length(k_tilde, k_tilde, m_lambda, v_f)?.xi_nu;
    let n = 201;
    let xs: Vec<f64> = (0..n).map(|i| xi * (3.0 + 5.0 * i as f64 / (n - 1) as f64)).collect();
    let fs = xs
        .iter()
        .map(|&x| massive_correlator_f0(k_tilde, m_lambda, v_f, alpha, x))
        .collect::<Result<Vec<_>, _>>()?;
    let fit = fit_decay(&xs, &fs, 20)?;
    Ok((xi, fit))
}
