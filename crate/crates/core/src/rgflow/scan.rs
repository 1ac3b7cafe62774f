//! Phase classification on parameter grids.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::flow::{classify_phase, integrate_flow, FlowOptions};
use super::FlowError;
use crate::params::{bare_couplings, PhysicalParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Phase {
    Algebraic,
    ShortRange,
}

impl Phase {
    /// Integer code used in tabular output.
    pub fn code(self) -> u8 {
        match self {
            Phase::Algebraic => 0,
            Phase::ShortRange => 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhasePoint {
    pub g_s: f64,
    pub gamma: f64,
    pub phase: Phase,
    pub lambda_ratio: f64,
    /// Filled by the Gaussian analysis in the algebraic phase.
    pub delta_sc: Option<f64>,
}

/// Flow and classify a single parameter point.
pub fn evaluate_point(p: &PhysicalParams, opts: &FlowOptions) -> Result<PhasePoint, FlowError> {
    let c = bare_couplings(p)?;
    let trace = integrate_flow(&c, opts)?;
    Ok(PhasePoint {
        g_s: p.g_s,
        gamma: p.gamma,
        phase: classify_phase(&trace),
        lambda_ratio: trace.lambda_ratio(),
        delta_sc: None,
    })
}

/// A grid point whose flow could not be completed.
#[derive(Debug, Clone, PartialEq)]
pub struct PointFailure {
    pub g_s: f64,
    pub gamma: f64,
    pub error: FlowError,
}

/// Evaluate every (g_s, γ) pair, g_s-major. Failures are kept in place; output
/// order does not depend on threading.
pub fn phase_diagram_scan(
    base: &PhysicalParams,
    g_s: &[f64],
    gamma: &[f64],
    opts: &FlowOptions,
) -> Vec<Result<PhasePoint, PointFailure>> {
    let pairs: Vec<(f64, f64)> = g_s.iter().flat_map(|&g| gamma.iter().map(move |&y| (g, y))).collect();
    pairs
        .par_iter()
        .map(|&(g, y)| {
            let p = PhysicalParams {
                g_s: g,
                gamma: y,
                ..*base
            };
            evaluate_point(&p, opts).map_err(|error| PointFailure {
                g_s: g,
                gamma: y,
                error,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn free_corner_is_algebraic() {
        let out = phase_diagram_scan(&PhysicalParams::default(), &[1.0], &[0.0], &FlowOptions::default());
        let p = out[0].as_ref().unwrap();
        assert_eq!(p.phase, Phase::Algebraic);
        assert_eq!(p.lambda_ratio, 0.0);
    }

    #[test]
    fn row_major_order_and_failures_in_place() {
        let opts = FlowOptions {
            ell_max: 2.0,
            ..FlowOptions::default()
        };
        let out = phase_diagram_scan(&PhysicalParams::default(), &[1.5, 2.0], &[0.0, -1.0, 0.4], &opts);
        assert_eq!(out.len(), 6);
        let coords: Vec<(f64, f64)> = out
            .iter()
            .map(|r| match r {
                Ok(p) => (p.g_s, p.gamma),
                Err(f) => (f.g_s, f.gamma),
            })
            .collect();
        assert_eq!(coords[1], (1.5, -1.0));
        assert_eq!(coords[5], (2.0, 0.4));
        assert!(out[1].is_err() && out[4].is_err());
        assert!(out[2].is_ok());
    }
}
