//! Perturbative RG flow of the monitored sine-Gordon couplings and the phase
//! diagram it implies.

mod boundary;
mod fint;
mod flow;
mod scan;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use boundary::{analytic_boundary, analytic_sum, numeric_boundary, BoundaryRule};
pub use fint::{f_coefficients, FIntegrator, FValues, CONVERGENCE_TOL, POLE_DISTANCE_MIN};
pub use flow::{
    classify_phase, integrate_flow, rg_rhs, FMode, FlowDerivative, FlowOptions, FlowState, FlowStatus, FlowTrace,
    RefreshMode,
};
pub use scan::{evaluate_point, phase_diagram_scan, Phase, PhasePoint, PointFailure};

use crate::params::ParamError;

/// Tensor-product quadrature resolution for the f integrals.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct QuadSpec {
    pub n_r: usize,
    pub n_chi: usize,
    pub n_theta: usize,
    /// UV cutoff Λ; the radial integral runs over [0, 1/Λ].
    pub lambda: f64,
}

impl Default for QuadSpec {
    fn default() -> Self {
        Self {
            n_r: 24,
            n_chi: 48,
            n_theta: 48,
            lambda: 1.0,
        }
    }
}

impl QuadSpec {
    pub fn new(n_r: usize, n_chi: usize, n_theta: usize) -> Self {
        Self {
            n_r,
            n_chi,
            n_theta,
            lambda: 1.0,
        }
    }

    pub fn doubled(&self) -> Self {
        Self {
            n_r: 2 * self.n_r,
            n_chi: 2 * self.n_chi,
            n_theta: 2 * self.n_theta,
            lambda: self.lambda,
        }
    }

    pub fn validate(&self) -> Result<(), FlowError> {
        if self.n_r < 8 || self.n_chi < 8 || self.n_theta < 8 {
            return Err(FlowError::InvalidInput(format!(
                "quadrature node counts must be >= 8 (got {}, {}, {})",
                self.n_r, self.n_chi, self.n_theta
            )));
        }
        if !(self.lambda > 0.0) || !self.lambda.is_finite() {
            return Err(FlowError::InvalidInput(format!(
                "cutoff must be positive (got {})",
                self.lambda
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FlowError {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error(transparent)]
    Param(#[from] ParamError),
    #[error("singular integrand: {detail}")]
    SingularIntegrand { detail: String },
    #[error("quadrature did not converge: {detail}")]
    NonConvergence { detail: String },
    #[error("l·k crossed the branch cut of the square root at ℓ = {ell}")]
    Branch { ell: f64 },
    #[error("integrator failed at ℓ = {ell}: {detail}")]
    StepFailure { ell: f64, detail: String },
    #[error("no boundary found for g_s = {g_s} in γ ∈ [{lo}, {hi}]")]
    NoRoot { g_s: f64, lo: f64, hi: f64 },
}
