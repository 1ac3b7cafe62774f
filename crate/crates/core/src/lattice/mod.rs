//! Quantum trajectories of the monitored spin-½ fermion ring.

mod basis;
mod ensemble;
mod kraus;
mod operators;
mod sse;

use nalgebra::DVector;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::gfp::C;

pub use basis::{hop, occupied, Basis, DOWN, UP};
pub use ensemble::{
    average_state, correlator_estimate, ensemble_purity, reference_correlators, run_ensemble, state_correlators,
    two_replica_correlator, CorrelatorEntry, CorrelatorEstimate, EnsembleResult, PuritySample,
};
pub use kraus::{completeness_defect, kraus_channel, kraus_pair, lindblad_identity_check, DenseModel};
pub use operators::{apply, build_operators, dense, Boundary, Jump, Observable, Operators, SparseOp};
pub use sse::{sse_step, Trajectory, MAX_NORM_DEVIATION};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LatticeError {
    #[error("invalid lattice parameters: {0}")]
    InvalidParams(String),
    #[error("sector mismatch: {0}")]
    SectorMismatch(String),
    #[error("step rejected: norm deviated by {deviation:e} before renormalization")]
    StepRejected { deviation: f64 },
    #[error("step rejected at t = {time}: norm deviated by {deviation:e} before renormalization")]
    StepRejectedAt { time: f64, deviation: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum Sector {
    Spin { n_up: usize, n_dn: usize },
    Total { n: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LatticeParams {
    pub sites: usize,
    pub t0: f64,
    pub jz: f64,
    /// Zeeman spin-flip amplitude.
    pub h: f64,
    /// Rashba amplitude.
    pub alpha: f64,
    pub gamma: f64,
    pub dt: f64,
    pub t_final: f64,
    pub n_traj: usize,
    pub seed: u64,
    pub sector: Sector,
    /// Number of purity samples after t = 0.
    pub samples: usize,
}

impl Default for LatticeParams {
    fn default() -> Self {
        Self {
            sites: 4,
            t0: 1.0,
            jz: 1.0,
            h: 0.0,
            alpha: 0.0,
            gamma: 1.0,
            dt: 0.005,
            t_final: 20.0,
            n_traj: 200,
            seed: 1,
            sector: Sector::Spin { n_up: 2, n_dn: 2 },
            samples: 40,
        }
    }
}

impl LatticeParams {
    pub fn validate(&self) -> Result<(), LatticeError> {
        let bad = |m: String| Err(LatticeError::InvalidParams(m));
        if !(2..=8).contains(&self.sites) {
            return bad(format!("L must lie in 2..=8 (got {})", self.sites));
        }
        let rates = [self.t0, self.jz, self.gamma, self.h, self.alpha];
        if rates.iter().any(|r| !r.is_finite()) || !self.dt.is_finite() || !self.t_final.is_finite() {
            return bad("parameters must be finite".into());
        }
        if self.jz < 0.0 || self.gamma < 0.0 {
            return bad(format!(
                "Jz and γ must be non-negative (Jz = {}, γ = {})",
                self.jz, self.gamma
            ));
        }
        if !(self.dt > 0.0) || self.t_final < 0.0 {
            return bad(format!(
                "need dt > 0 and t_final ≥ 0 (dt = {}, t_final = {})",
                self.dt, self.t_final
            ));
        }
        let fastest = rates.iter().fold(0.0f64, |m, r| m.max(r.abs()));
        if self.dt * fastest >= 0.05 {
            return bad(format!("dt·max rate = {} must stay below 0.05", self.dt * fastest));
        }
        match self.sector {
            Sector::Spin { n_up, n_dn } => {
                if n_up > self.sites || n_dn > self.sites {
                    return bad(format!("sector ({n_up}, {n_dn}) exceeds L = {}", self.sites));
                }
                if self.h != 0.0 || self.alpha != 0.0 {
                    return Err(LatticeError::SectorMismatch(
                        "spin-flip terms need a total-N sector, not fixed (N_up, N_dn)".into(),
                    ));
                }
            }
            Sector::Total { n } => {
                if n > 2 * self.sites {
                    return bad(format!("N = {n} exceeds 2L = {}", 2 * self.sites));
                }
            }
        }
        Ok(())
    }
}

/// Domain-wall Fock state of the sector as a unit vector.
pub fn fock_state(basis: &Basis) -> DVector<C> {
    let mut psi = DVector::zeros(basis.dim());
    psi[basis
        .index(basis.domain_state())
        .expect("domain state lies in its sector")] = C::new(1.0, 0.0);
    psi
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_valid() {
        LatticeParams::default().validate().unwrap();
    }

    #[test]
    fn step_size_bound() {
        let p = LatticeParams {
            dt: 0.05,
            ..LatticeParams::default()
        };
        assert!(p.validate().is_err());
        let p = LatticeParams {
            dt: 0.01,
            gamma: 4.9,
            ..LatticeParams::default()
        };
        assert!(p.validate().is_ok());
        let p = LatticeParams {
            dt: 0.01,
            alpha: -5.0,
            sector: Sector::Total { n: 2 },
            ..LatticeParams::default()
        };
        assert!(p.validate().is_err());
    }

    #[test]
    fn sector_checks() {
        let p = LatticeParams {
            sector: Sector::Spin { n_up: 5, n_dn: 0 },
            ..LatticeParams::default()
        };
        assert!(p.validate().is_err());
        let p = LatticeParams {
            h: 0.1,
            ..LatticeParams::default()
        };
        assert!(matches!(p.validate(), Err(LatticeError::SectorMismatch(_))));
        let p = LatticeParams {
            h: 0.1,
            sector: Sector::Total { n: 4 },
            ..LatticeParams::default()
        };
        assert!(p.validate().is_ok());
    }
}
