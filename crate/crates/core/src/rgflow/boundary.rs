//! Location of the algebraic/short-range boundary along γ.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::flow::FlowOptions;
use super::scan::{evaluate_point, Phase};
use super::FlowError;
use crate::params::{bare_couplings, PhysicalParams};

/// Which scalar of Σ_ν k_ν^{−1/2} is compared against 2.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum BoundaryRule {
    /// Real part: sign of the real scaling dimension of λ.
    #[default]
    Re,
    /// Modulus.
    Abs,
}

/// Σ_ν k_ν^{−1/2} at the bare couplings.
pub fn analytic_sum(p: &PhysicalParams) -> Result<Complex64, FlowError> {
    let c = bare_couplings(p)?;
    Ok(c.k().iter().map(|k| k.sqrt().inv()).sum())
}

const SCAN_STEP: f64 = 1e-2;
const ROOT_TOL: f64 = 1e-10;

/// Smallest γ ∈ [0, gamma_max] where the chosen scalar of Σ_ν k_ν^{−1/2} reaches 2.
pub fn analytic_boundary(
    base: &PhysicalParams,
    g_s: f64,
    rule: BoundaryRule,
    gamma_max: f64,
) -> Result<f64, FlowError> {
    if !(g_s >= 1.0) {
        return Err(FlowError::InvalidInput(format!("g_s must be >= 1 (got {g_s})")));
    }
    let excess = |gamma: f64| -> Result<f64, FlowError> {
        let sum = analytic_sum(&PhysicalParams { g_s, gamma, ..*base })?;
        Ok(match rule {
            BoundaryRule::Re => sum.re,
            BoundaryRule::Abs => sum.norm(),
        } - 2.0)
    };
    let s0 = excess(0.0)?;
    if s0 <= 0.0 {
        return Ok(0.0);
    }
    let steps = (gamma_max / SCAN_STEP).ceil().max(1.0) as usize;
    let mut lo = 0.0;
    for i in 1..=steps {
        let hi = (i as f64 * SCAN_STEP).min(gamma_max);
        if excess(hi)? <= 0.0 {
            let (mut a, mut b) = (lo, hi);
            while b - a > ROOT_TOL {
                let mid = 0.5 * (a + b);
                if excess(mid)? > 0.0 {
                    a = mid;
                } else {
                    b = mid;
                }
            }
            return Ok(0.5 * (a + b));
        }
        lo = hi;
    }
    Err(FlowError::NoRoot {
        g_s,
        lo: 0.0,
        hi: gamma_max,
    })
}

/// First algebraic→short-range transition along an increasing γ grid, refined
/// by bisection to `tol`. `None` if the column never leaves the algebraic phase.
pub fn numeric_boundary(
    base: &PhysicalParams,
    g_s: f64,
    gamma: &[f64],
    opts: &FlowOptions,
    tol: f64,
) -> Result<Option<f64>, FlowError> {
    let phase_at = |y: f64| -> Result<Phase, FlowError> {
        let p = PhysicalParams { g_s, gamma: y, ..*base };
        Ok(evaluate_point(&p, opts)?.phase)
    };
    let phases: Vec<Phase> = gamma.par_iter().map(|&y| phase_at(y)).collect::<Result<_, _>>()?;
    let Some(i) = phases.iter().position(|&p| p == Phase::ShortRange) else {
        return Ok(None);
    };
    if i == 0 {
        return Ok(Some(gamma[0]));
    }
    let (mut a, mut b) = (gamma[i - 1], gamma[i]);
    while b - a > tol {
        let mid = 0.5 * (a + b);
        if phase_at(mid)? == Phase::ShortRange {
            b = mid;
        } else {
            a = mid;
        }
    }
    Ok(Some(0.5 * (a + b)))
}
