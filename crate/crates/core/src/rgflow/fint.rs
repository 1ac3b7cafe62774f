//! The loop integrals f_t and f_x that drive the flow of l_ν and k_ν.
//!
//! The triple integral runs over R ∈ [0, 1/Λ], χ ∈ [0, 2π] and ϑ ∈ [0, 2π].
//! Two exact symmetries are used to reduce work without changing the rule:
//! χ → χ + π maps the phase e^{−iR cos(χ+ϑ)} to its conjugate while leaving
//! cos²χ and sin²χ unchanged, so the χ-sum is real when the χ rule is built
//! from two congruent panels; and the whole integrand is π-periodic in ϑ
//! after that sum, so ϑ is integrated over [0, π] and doubled.
//!
//! The ϑ denominator l cos²ϑ − k sin²ϑ has complex zeros that approach the
//! real axis as Im(lk) → 0. The ϑ rule is therefore a composite Gauss–Legendre
//! rule whose panels are graded geometrically toward the real part of each zero.

use std::f64::consts::{FRAC_PI_4, PI};

use num_complex::Complex64;

use super::{FlowError, QuadSpec};
use crate::quad::GaussLegendre;

/// Poles closer than this to the real ϑ axis make the integral singular.
pub const POLE_DISTANCE_MIN: f64 = 1e-10;
/// Relative change allowed under doubling of all node counts.
pub const CONVERGENCE_TOL: f64 = 1e-5;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FValues {
    pub f_t: Complex64,
    pub f_x: Complex64,
}

/// Precomputed rules for one `QuadSpec`.
#[derive(Debug, Clone)]
pub struct FIntegrator {
    spec: QuadSpec,
    r_nodes: Vec<(f64, f64)>,
    /// Taylor coefficients of Σ_R w R³ cos(R c) in c², when the series is short.
    radial_series: Option<Vec<f64>>,
    chi_nodes: Vec<(f64, f64, f64)>,
    theta_rule: GaussLegendre,
}

impl FIntegrator {
    pub fn new(spec: QuadSpec) -> Result<Self, FlowError> {
        spec.validate()?;
        let r_max = 1.0 / spec.lambda;
        let r_rule = GaussLegendre::new(spec.n_r);
        let r_nodes = r_rule
            .mapped(0.0, r_max)
            .map(|(r, w)| (r, w * r.powi(3)))
            .collect::<Vec<(f64, f64)>>();
        let radial_series = (r_max <= 2.0).then(|| radial_taylor(&r_nodes));
        // half of a two-panel rule on [0, 2π]; the partner node sits at χ + π
        let chi_rule = GaussLegendre::new(spec.n_chi.div_ceil(2));
        let chi_nodes = chi_rule
            .mapped(0.0, PI)
            .map(|(c, w)| (c, 2.0 * w * c.cos().powi(2), 2.0 * w * c.sin().powi(2)))
            .collect();
        let theta_rule = GaussLegendre::new((spec.n_theta / 4).max(4));
        Ok(Self {
            spec,
            r_nodes,
            radial_series,
            chi_nodes,
            theta_rule,
        })
    }

    pub fn spec(&self) -> QuadSpec {
        self.spec
    }

    /// Evaluate (f_t, f_x) for the given couplings.
    pub fn eval(&self, l: [Complex64; 2], k: [Complex64; 2]) -> Result<FValues, FlowError> {
        let mut poles = Vec::with_capacity(4);
        for nu in 0..2 {
            let pole = theta_pole(l[nu], k[nu])?;
            poles.push(pole);
        }
        let breaks = theta_breaks(&poles);
        let mut acc_t = Complex64::new(0.0, 0.0);
        let mut acc_x = Complex64::new(0.0, 0.0);
        for w in breaks.windows(2) {
            for (theta, wt) in self.theta_rule.mapped(w[0], w[1]) {
                let (gt, gx) = self.radial_angular(theta);
                let (s, c) = theta.sin_cos();
                let (s2, c2) = (s * s, c * c);
                let inv: Complex64 = (0..2).map(|nu| (l[nu] * c2 - k[nu] * s2).inv()).sum();
                acc_t += inv * (wt * gt);
                acc_x += inv * (wt * gx);
            }
        }
        // ϑ over [0, π] doubled; prefactor −1/(2Λ⁴)
        let pre = -2.0 / (2.0 * self.spec.lambda.powi(4));
        Ok(FValues {
            f_t: acc_t * pre,
            f_x: acc_x * pre,
        })
    }

    /// The (R, χ) part of the rule at fixed ϑ, weighted by cos²χ and sin²χ.
    fn radial_angular(&self, theta: f64) -> (f64, f64) {
        let mut gt = 0.0;
        let mut gx = 0.0;
        for &(chi, wc, ws) in &self.chi_nodes {
            let c = (chi + theta).cos();
            let radial: f64 = match &self.radial_series {
                Some(a) => {
                    let c2 = c * c;
                    a.iter().rev().fold(0.0, |acc, &an| acc * c2 + an)
                }
                None => self.r_nodes.iter().map(|&(r, w)| w * (r * c).cos()).sum(),
            };
            gt += wc * radial;
            gx += ws * radial;
        }
        (gt, gx)
    }
}

/// Coefficients a_n with Σ_R w R³ cos(R c) = Σ_n a_n c^{2n}, truncated at 1e-18.
fn radial_taylor(r_nodes: &[(f64, f64)]) -> Vec<f64> {
    let mut out = Vec::new();
    let mut fact = 1.0;
    for n in 0..40 {
        if n > 0 {
            fact *= ((2 * n - 1) * (2 * n)) as f64;
        }
        let moment: f64 = r_nodes.iter().map(|&(r, w)| w * r.powi(2 * n)).sum();
        let a = if n % 2 == 0 { moment } else { -moment } / fact;
        out.push(a);
        if a.abs() < 1e-18 {
            break;
        }
    }
    out
}

/// Location of the zero of l cos²ϑ − k sin²ϑ nearest the real axis, reduced to
/// (real part in [0, π), distance from the real axis).
fn theta_pole(l: Complex64, k: Complex64) -> Result<(f64, f64), FlowError> {
    let sum = l + k;
    if sum.norm() < 1e-14 {
        return Err(FlowError::SingularIntegrand {
            detail: format!("l + k = 0 (l = {l}, k = {k})"),
        });
    }
    // D = a + b cos 2ϑ with a = (l − k)/2, b = (l + k)/2
    let c = (k - l) / sum;
    let two_theta = c.acos();
    let re = (0.5 * two_theta.re).rem_euclid(PI);
    let dist = (0.5 * two_theta.im).abs();
    if dist < POLE_DISTANCE_MIN {
        return Err(FlowError::SingularIntegrand {
            detail: format!(
                "denominator vanishes on the real axis (l = {l}, k = {k}, Im(lk) = {:e})",
                (l * k).im
            ),
        });
    }
    Ok((re, dist))
}

/// Panel breakpoints on [0, π] graded toward ±Re ϑ₀ of each pole.
fn theta_breaks(poles: &[(f64, f64)]) -> Vec<f64> {
    let mut pts: Vec<f64> = (0..=4).map(|i| i as f64 * FRAC_PI_4).collect();
    for &(re, dist) in poles {
        for centre in [re, PI - re] {
            pts.push(centre);
            let mut h = dist;
            while h < FRAC_PI_4 {
                pts.push(centre + h);
                pts.push(centre - h);
                h *= 2.0;
            }
        }
    }
    let mut pts: Vec<f64> = pts.into_iter().map(|p| p.rem_euclid(PI)).collect();
    pts.push(0.0);
    pts.push(PI);
    pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    pts.dedup_by(|a, b| (*a - *b).abs() < 1e-13);
    pts
}

/// `f_coefficients`: evaluate and verify stability under doubling of all node counts.
pub fn f_coefficients(l: [Complex64; 2], k: [Complex64; 2], spec: QuadSpec) -> Result<FValues, FlowError> {
    let coarse = FIntegrator::new(spec)?.eval(l, k)?;
    let fine = FIntegrator::new(spec.doubled())?.eval(l, k)?;
    let rel = |a: Complex64, b: Complex64| (a - b).norm() / b.norm().max(f64::MIN_POSITIVE);
    let worst = rel(coarse.f_t, fine.f_t).max(rel(coarse.f_x, fine.f_x));
    if worst > CONVERGENCE_TOL {
        return Err(FlowError::NonConvergence {
            detail: format!("f integral changed by {worst:e} under node doubling"),
        });
    }
    Ok(coarse)
}
