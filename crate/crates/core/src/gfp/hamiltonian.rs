use super::{c, nambu_kron, pauli, sector_projector, GfpError, C, M2, M4};
use crate::params::Couplings;

/// ω with ω² = k̃ v²q² − i m², on the root with Im ω ≤ 0.
pub fn dispersion(k_tilde: C, q: f64, m_lambda: f64, v_f: f64) -> C {
    let w = (k_tilde * (v_f * v_f * q * q) - c(0.0, m_lambda * m_lambda)).sqrt();
    if w.im > 0.0 {
        -w
    } else {
        w
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModeHamiltonian {
    pub q: f64,
    pub h: M4,
    pub omega: [C; 2],
    pub eta: [f64; 2],
    pub kappa_plus: f64,
    pub kappa_minus: f64,
    pub m_lambda: f64,
}

/// Single-sector block (|ω|/2)[(e^{iη}+1)τ₀ + (e^{iη}−1)τ₁], η = 2 arg ω.
pub(crate) fn sector_block(omega: C) -> M2 {
    let a = omega.norm();
    let e = C::from_polar(1.0, 2.0 * omega.arg());
    (pauli(0) * (e + 1.0) + pauli(1) * (e - 1.0)) * c(0.5 * a, 0.0)
}

/// κ_{q,±} = (κ/2)(√|ω_c/ω_s| ± √|ω_s/ω_c|).
pub(crate) fn kappa_pm(kappa: f64, omega: [C; 2]) -> (f64, f64) {
    let r = (omega[0].norm() / omega[1].norm()).sqrt();
    (0.5 * kappa * (r + 1.0 / r), 0.5 * kappa * (r - 1.0 / r))
}

pub fn build_hq(cpl: &Couplings, q: f64, m_lambda: f64, v_f: f64) -> Result<ModeHamiltonian, GfpError> {
    if q == 0.0 && m_lambda == 0.0 {
        return Err(GfpError::InvalidInput("q = 0 requires a finite mass".into()));
    }
    if !(v_f > 0.0) {
        return Err(GfpError::InvalidInput(format!("v_f must be positive (got {v_f})")));
    }
    let kt = cpl.k_tilde();
    let omega = [dispersion(kt[0], q, m_lambda, v_f), dispersion(kt[1], q, m_lambda, v_f)];
    if omega.iter().any(|w| w.norm() == 0.0) {
        return Err(GfpError::DegenerateMode(0.0));
    }
    let (kp, km) = kappa_pm(cpl.kappa, omega);
    let mut h = M4::zeros();
    for (nu, w) in omega.iter().enumerate() {
        h += nambu_kron(&sector_block(*w), &sector_projector(nu));
    }
    let vq = c(v_f * q, 0.0);
    h += (nambu_kron(&pauli(3), &pauli(1)) * c(kp, 0.0) - nambu_kron(&pauli(2), &pauli(2)) * c(km, 0.0)) * vq;
    Ok(ModeHamiltonian {
        q,
        h,
        omega,
        eta: [2.0 * omega[0].arg(), 2.0 * omega[1].arg()],
        kappa_plus: kp,
        kappa_minus: km,
        m_lambda,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gfp::max_abs;
    use crate::params::{bare_couplings, PhysicalParams};
    use std::f64::consts::FRAC_1_SQRT_2;

    #[test]
    fn dispersion_examples() {
        assert_eq!(dispersion(c(1.0, 0.0), 1.0, 0.0, 1.0), c(1.0, 0.0));
        let w = dispersion(c(1.0, 0.0), 0.0, 1.0, 1.0);
        assert!((w - c(FRAC_1_SQRT_2, -FRAC_1_SQRT_2)).norm() < 1e-15);
        assert_eq!(dispersion(c(0.25, 0.0), 2.0, 0.0, 1.0), c(1.0, 0.0));
        assert!(dispersion(c(0.25, 0.0), -2.0, 0.0, 1.0).re > 0.0);
        // negative real ω² picks the lower root
        assert!(dispersion(c(-1.0, 0.0), 1.0, 0.0, 1.0).im < 0.0);
    }

    #[test]
    fn free_limit_is_diagonal_hermitian() {
        let cpl = bare_couplings(&PhysicalParams::new(2.0, 0.0)).unwrap();
        let m = build_hq(&cpl, 1.3, 0.0, 1.0).unwrap();
        assert_eq!(m.eta, [0.0, 0.0]);
        let expected = M4::from_diagonal(&nalgebra::Vector4::new(
            c(1.3, 0.0),
            c(0.65, 0.0),
            c(1.3, 0.0),
            c(0.65, 0.0),
        ));
        assert!(max_abs(&(m.h - expected)) < 1e-15);
        assert!(max_abs(&(m.h - m.h.adjoint())) == 0.0);
    }

    #[test]
    fn no_kappa_means_sector_diagonal() {
        let mut cpl = bare_couplings(&PhysicalParams::new(1.7, 0.4)).unwrap();
        cpl.kappa = 0.0;
        let m = build_hq(&cpl, 0.8, 0.0, 1.0).unwrap();
        for a in 0..2 {
            for b in 0..2 {
                assert_eq!(m.h[(2 * a, 2 * b + 1)], c(0.0, 0.0));
                assert_eq!(m.h[(2 * a + 1, 2 * b)], c(0.0, 0.0));
            }
        }
    }

    #[test]
    fn equal_sectors_reduce_to_charge_spin_symmetric_form() {
        let p = PhysicalParams {
            g_s: 1.0,
            gamma: 0.6,
            ..PhysicalParams::default()
        };
        let cpl = bare_couplings(&p).unwrap();
        let m = build_hq(&cpl, 0.9, 0.0, 1.0).unwrap();
        assert_eq!(m.kappa_minus, 0.0);
        let h0 = sector_block(m.omega[0]);
        let expected = nambu_kron(&h0, &pauli(0)) + nambu_kron(&pauli(3), &pauli(1)) * c(0.9 * cpl.kappa, 0.0);
        assert!(max_abs(&(m.h - expected)) < 1e-15);
    }

    #[test]
    fn zero_mode_needs_mass() {
        let cpl = bare_couplings(&PhysicalParams::default()).unwrap();
        assert!(build_hq(&cpl, 0.0, 0.0, 1.0).is_err());
        assert!(build_hq(&cpl, 0.0, 0.5, 1.0).is_ok());
    }
}
