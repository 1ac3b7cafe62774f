//! Physical inputs and the complex sine-Gordon couplings they map to.
//!
//! All velocities are measured in units of the Fermi velocity unless a
//! function takes `v_f` explicitly; `gamma` is always the ratio γ/v_F.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Tolerance on the filling constraint c̃² + s̃² = 1.
pub const FILLING_TOL: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ParamError {
    #[error("exchange J_z = {jz} outside [0, 2π v_F) for v_F = {v_f}")]
    ExchangeDomain { jz: f64, v_f: f64 },
    #[error("invalid parameter {name} = {value}: {reason}")]
    Invalid {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },
    #[error("filling coefficients violate c̃² + s̃² = 1 (got {0})")]
    Filling(f64),
}

/// Bare continuum-model inputs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PhysicalParams {
    pub g_s: f64,
    pub g_c: f64,
    /// Monitoring strength γ/v_F.
    pub gamma: f64,
    pub v_f: f64,
    pub c_tilde: f64,
    pub s_tilde: f64,
    pub rho0: f64,
}

impl Default for PhysicalParams {
    fn default() -> Self {
        Self {
            g_s: 2.0,
            g_c: 1.0,
            gamma: 0.5,
            v_f: 1.0,
            c_tilde: FRAC_1_SQRT_2,
            s_tilde: FRAC_1_SQRT_2,
            rho0: 0.0,
        }
    }
}

impl PhysicalParams {
    pub fn new(g_s: f64, gamma: f64) -> Self {
        Self {
            g_s,
            gamma,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<(), ParamError> {
        let check = |name, value: f64, ok: bool, reason| {
            if ok && value.is_finite() {
                Ok(())
            } else {
                Err(ParamError::Invalid { name, value, reason })
            }
        };
        check("g_s", self.g_s, self.g_s >= 1.0, "must be >= 1")?;
        check("g_c", self.g_c, self.g_c > 0.0, "must be > 0")?;
        check("gamma", self.gamma, self.gamma >= 0.0, "must be >= 0")?;
        check("v_f", self.v_f, self.v_f > 0.0, "must be > 0")?;
        check("rho0", self.rho0, self.rho0 >= 0.0, "must be >= 0")?;
        check("c_tilde", self.c_tilde, true, "must be finite")?;
        check("s_tilde", self.s_tilde, true, "must be finite")?;
        let norm = self.c_tilde * self.c_tilde + self.s_tilde * self.s_tilde;
        if (norm - 1.0).abs() > FILLING_TOL {
            return Err(ParamError::Filling(norm));
        }
        Ok(())
    }
}

/// Couplings of the effective non-hermitian sine-Gordon theory.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Couplings {
    pub k_c: Complex64,
    pub k_s: Complex64,
    pub kappa: f64,
    pub lambda: f64,
    /// k̃_ν = k_ν + κ², the stiffness entering the Gaussian dispersion.
    pub k_tilde_c: Complex64,
    pub k_tilde_s: Complex64,
}

impl Couplings {
    /// Couplings with given k̃_ν and κ; k_ν is derived as k̃_ν − κ².
    pub fn from_tilde(k_tilde_c: Complex64, k_tilde_s: Complex64, kappa: f64, lambda: f64) -> Self {
        let k2 = kappa * kappa;
        Self {
            k_c: k_tilde_c - k2,
            k_s: k_tilde_s - k2,
            kappa,
            lambda,
            k_tilde_c,
            k_tilde_s,
        }
    }

    pub fn k(&self) -> [Complex64; 2] {
        [self.k_c, self.k_s]
    }

    pub fn k_tilde(&self) -> [Complex64; 2] {
        [self.k_tilde_c, self.k_tilde_s]
    }
}

/// Spin Luttinger parameter from the Ising exchange, g_s = [1 − J_z/(2π v_F)]^(−1/2).
pub fn luttinger_from_exchange(jz: f64, v_f: f64) -> Result<f64, ParamError> {
    if !(v_f > 0.0) || !v_f.is_finite() {
        return Err(ParamError::Invalid {
            name: "v_f",
            value: v_f,
            reason: "must be > 0",
        });
    }
    if !(jz >= 0.0) || jz >= 2.0 * PI * v_f {
        return Err(ParamError::ExchangeDomain { jz, v_f });
    }
    Ok(1.0 / (1.0 - jz / (2.0 * PI * v_f)).sqrt())
}

/// Bare couplings at ℓ = 0.
pub fn bare_couplings(p: &PhysicalParams) -> Result<Couplings, ParamError> {
    p.validate()?;
    // gamma is already γ/v_F
    let kappa = p.c_tilde * p.s_tilde * p.gamma / PI;
    let lambda = p.gamma / (PI * PI);
    let damping = Complex64::new(0.0, -2.0 * p.c_tilde * p.c_tilde * p.gamma / PI);
    let k_tilde_c = Complex64::from(1.0 / (p.g_c * p.g_c)) + damping;
    let k_tilde_s = Complex64::from(1.0 / (p.g_s * p.g_s)) + damping;
    Ok(Couplings::from_tilde(k_tilde_c, k_tilde_s, kappa, lambda))
}
