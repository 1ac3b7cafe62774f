//! Trace tables and the six real coefficients of the algebraic-phase correlators.

use std::f64::consts::PI;

use super::bogoliubov::{solve_v_plus, BogoliubovTransform};
use super::{c, nambu_kron, pauli, GfpError, C, M2};
use crate::params::Couplings;

/// Σ̃^{αα}_{νν'} and Δ̃^{α,−α}_{νν'}, indexed `[a][ν][ν']` with a = 0 for α = +1, a = 1 for α = −1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceTables {
    pub sigma: [[[C; 2]; 2]; 2],
    pub delta: [[[C; 2]; 2]; 2],
}

impl TraceTables {
    /// Largest entry that must vanish: Σ̃^{αα}_{νν̄} and Δ̃^{α,−α}_{νν}.
    pub fn vanishing_max(&self) -> f64 {
        let mut m: f64 = 0.0;
        for a in 0..2 {
            for nu in 0..2 {
                m = m.max(self.sigma[a][nu][1 - nu].norm());
                m = m.max(self.delta[a][nu][nu].norm());
            }
        }
        m
    }
}

/// X_{νν'} = |ν⟩⟨ν'| + h.c. and Y_{νν'} = −i(|ν⟩⟨ν'| − h.c.).
fn x_y(nu: usize, nup: usize) -> (M2, M2) {
    let mut e = M2::zeros();
    e[(nu, nup)] = c(1.0, 0.0);
    let x = e + e.adjoint();
    let y = (e - e.adjoint()) * c(0.0, -1.0);
    (x, y)
}

pub fn sigma_delta_tables(t: &BogoliubovTransform) -> TraceTables {
    let v = &t.v;
    let vd = v.adjoint();
    let zero = c(0.0, 0.0);
    let mut sigma = [[[zero; 2]; 2]; 2];
    let mut delta = [[[zero; 2]; 2]; 2];
    for (a, alpha) in [1.0, -1.0].into_iter().enumerate() {
        for nu in 0..2 {
            for nup in 0..2 {
                let (x, y) = x_y(nu, nup);
                let s_op = nambu_kron(&(pauli(0) + pauli(1) * c(alpha, 0.0)), &x);
                let d_op = nambu_kron(&pauli(3), &x) + nambu_kron(&pauli(2), &y) * c(alpha, 0.0);
                sigma[a][nu][nup] = (vd * s_op * v).trace() * 0.5;
                delta[a][nu][nup] = (vd * d_op * v).trace() * 0.5;
            }
        }
    }
    TraceTables { sigma, delta }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorrelationCoefficients {
    pub sigma_plus_c: f64,
    pub sigma_plus_s: f64,
    pub sigma_minus_c: f64,
    pub sigma_minus_s: f64,
    pub delta_cs: f64,
    pub delta_sc: f64,
    /// Largest imaginary part dropped from the six values.
    pub imag_leakage: f64,
}

impl CorrelationCoefficients {
    pub fn sigma_plus(&self) -> [f64; 2] {
        [self.sigma_plus_c, self.sigma_plus_s]
    }

    pub fn sigma_minus(&self) -> [f64; 2] {
        [self.sigma_minus_c, self.sigma_minus_s]
    }
}

/// Everything computed at one weak-coupling fixed point.
#[derive(Debug, Clone, PartialEq)]
pub struct FixedPoint {
    pub transform: BogoliubovTransform,
    pub tables: TraceTables,
    pub coefficients: CorrelationCoefficients,
}

pub fn solve_fixed_point(cpl: &Couplings, v_f: f64) -> Result<FixedPoint, GfpError> {
    let transform = solve_v_plus(cpl, v_f)?;
    let tables = sigma_delta_tables(&transform);
    let kt = cpl.k_tilde().map(|k| k.norm());
    let kappa = cpl.kappa;
    let norm = 1.0 / (2.0 * PI * PI);
    let sp: [C; 2] = std::array::from_fn(|nu| tables.sigma[0][nu][nu] * (kt[nu].powf(-0.5) * norm));
    // Δ_{νν̄}
    let dl: [C; 2] = std::array::from_fn(|nu| {
        let nb = 1 - nu;
        -tables.delta[0][nu][nb] * ((kt[nb] / kt[nu]).powf(0.25) * norm) + sp[nu] * kappa
    });
    let sm: [C; 2] = std::array::from_fn(|nu| {
        let nb = 1 - nu;
        tables.sigma[1][nu][nu] * (kt[nu].sqrt() * norm) + dl[nb] * (2.0 * kappa) - sp[nb] * (kappa * kappa)
    });
    let all = [sp[0], sp[1], sm[0], sm[1], dl[0], dl[1]];
    let imag_leakage = all.iter().map(|z| z.im.abs()).fold(0.0, f64::max);
    let coefficients = CorrelationCoefficients {
        sigma_plus_c: sp[0].re,
        sigma_plus_s: sp[1].re,
        sigma_minus_c: sm[0].re,
        sigma_minus_s: sm[1].re,
        delta_cs: dl[0].re,
        delta_sc: dl[1].re,
        imag_leakage,
    };
    Ok(FixedPoint {
        transform,
        tables,
        coefficients,
    })
}

pub fn six_coefficients(cpl: &Couplings, v_f: f64) -> Result<CorrelationCoefficients, GfpError> {
    Ok(solve_fixed_point(cpl, v_f)?.coefficients)
}

/// Row/column labels of `correlation_matrix`.
pub const OBSERVABLES: [&str; 4] = ["rho_c", "rho_s", "j_c", "j_s"];

/// Asymptotic equal-time correlators C_AB(x) for A, B ∈ (ϱ_c, ϱ_s, j_c, j_s).
pub fn correlation_matrix(k: &CorrelationCoefficients, v_f: f64, x: f64) -> Result<[[f64; 4]; 4], GfpError> {
    if x == 0.0 || !x.is_finite() {
        return Err(GfpError::InvalidInput(format!(
            "separation must be finite and nonzero (got {x})"
        )));
    }
    let s = -1.0 / (x * x);
    let mut m = [[0.0; 4]; 4];
    let sp = k.sigma_plus();
    let sm = k.sigma_minus();
    for nu in 0..2 {
        m[nu][nu] = s * sp[nu];
        m[2 + nu][2 + nu] = s * v_f * v_f * sm[nu];
    }
    // ϱ_c–j_s carries Δ_cs, ϱ_s–j_c carries Δ_sc
    m[0][3] = s * v_f * k.delta_cs;
    m[3][0] = m[0][3];
    m[1][2] = s * v_f * k.delta_sc;
    m[2][1] = m[1][2];
    Ok(m)
}

/// Stationary measurement-induced spin current j₀ = v_F κ ϱ₀.
pub fn mean_spin_current(kappa: f64, v_f: f64, rho0: f64) -> Result<f64, GfpError> {
    if !(rho0 >= 0.0) {
        return Err(GfpError::InvalidInput(format!("rho0 must be >= 0 (got {rho0})")));
    }
    Ok(v_f * kappa * rho0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gfp::bogoliubov::Seed;
    use crate::gfp::M4;
    use crate::params::{bare_couplings, PhysicalParams};

    fn identity_transform() -> BogoliubovTransform {
        BogoliubovTransform {
            v: M4::identity(),
            params: [0.0; 6],
            residual: 0.0,
            pseudo_unitarity: 0.0,
            seed: Seed::Zero,
        }
    }

    #[test]
    fn identity_tables() {
        let t = sigma_delta_tables(&identity_transform());
        for a in 0..2 {
            for nu in 0..2 {
                assert_eq!(t.sigma[a][nu][nu], c(2.0, 0.0));
                assert_eq!(t.sigma[a][nu][1 - nu], c(0.0, 0.0));
                for nup in 0..2 {
                    assert_eq!(t.delta[a][nu][nup], c(0.0, 0.0));
                }
            }
        }
    }

    #[test]
    fn equilibrium_values() {
        let cpl = bare_couplings(&PhysicalParams::new(2.0, 0.0)).unwrap();
        let k = six_coefficients(&cpl, 1.0).unwrap();
        let p2 = PI * PI;
        assert!((k.sigma_plus_c - 1.0 / p2).abs() < 1e-15);
        assert!((k.sigma_plus_s - 2.0 / p2).abs() < 1e-15);
        assert!((k.sigma_minus_c - 1.0 / p2).abs() < 1e-15);
        assert!((k.sigma_minus_s - 0.5 / p2).abs() < 1e-15);
        assert_eq!((k.delta_cs, k.delta_sc), (0.0, 0.0));
    }

    #[test]
    fn reference_point_regression() {
        // frozen from an independent dense-matrix evaluation
        let cpl = bare_couplings(&PhysicalParams::new(2.0, 0.5)).unwrap();
        let fp = solve_fixed_point(&cpl, 1.0).unwrap();
        let k = fp.coefficients;
        let expect = [
            (k.sigma_plus_c, 0.100_803_903_443_358_97),
            (k.sigma_plus_s, 0.194_887_002_105_327_28),
            (k.sigma_minus_c, 0.104_544_911_488_906_59),
            (k.sigma_minus_s, 0.057_630_659_165_412_92),
            (k.delta_cs, 0.005_813_485_678_687_254),
            (k.delta_sc, 0.020_101_380_973_314_07),
        ];
        for (got, want) in expect {
            assert!((got - want).abs() < 1e-10, "{got} vs {want}");
        }
        assert!(k.imag_leakage < 1e-12);
        assert!(fp.tables.vanishing_max() < 1e-12);
    }

    #[test]
    fn equal_sectors_decouple() {
        let p = PhysicalParams {
            g_s: 1.0,
            gamma: 0.4,
            ..PhysicalParams::default()
        };
        let cpl = bare_couplings(&p).unwrap();
        let fp = solve_fixed_point(&cpl, 1.0).unwrap();
        for a in 0..2 {
            for nu in 0..2 {
                assert!(fp.tables.sigma[a][nu][1 - nu].norm() < 1e-12);
                assert!(fp.tables.delta[a][nu][1 - nu].norm() < 1e-12);
            }
        }
        let k = fp.coefficients;
        assert!((k.delta_cs - cpl.kappa * k.sigma_plus_c).abs() < 1e-12);
        assert!((k.delta_sc - cpl.kappa * k.sigma_plus_s).abs() < 1e-12);
    }

    #[test]
    fn matrix_structure_and_scaling() {
        let cpl = bare_couplings(&PhysicalParams::new(2.0, 0.5)).unwrap();
        let k = six_coefficients(&cpl, 1.0).unwrap();
        let a = correlation_matrix(&k, 1.0, 3.0).unwrap();
        let b = correlation_matrix(&k, 1.0, 6.0).unwrap();
        for (i, j) in [(0, 1), (2, 3), (0, 2), (1, 3)] {
            assert_eq!(a[i][j], 0.0);
            assert_eq!(a[j][i], 0.0);
        }
        assert_eq!(a[1][2], -k.delta_sc / 9.0);
        for i in 0..4 {
            for j in 0..4 {
                assert!((b[i][j] - a[i][j] / 4.0).abs() <= 1e-17);
            }
        }
        assert!(correlation_matrix(&k, 1.0, 0.0).is_err());
    }

    #[test]
    fn equilibrium_matrix() {
        let cpl = bare_couplings(&PhysicalParams::new(2.0, 0.0)).unwrap();
        let k = six_coefficients(&cpl, 1.0).unwrap();
        let m = correlation_matrix(&k, 1.0, 1.0).unwrap();
        let p2 = PI * PI;
        let diag = [-1.0 / p2, -2.0 / p2, -1.0 / p2, -0.5 / p2];
        for i in 0..4 {
            assert!((m[i][i] - diag[i]).abs() < 1e-15);
        }
    }

    #[test]
    fn spin_current() {
        assert_eq!(mean_spin_current(0.0, 1.0, 0.7).unwrap(), 0.0);
        let j = mean_spin_current(1.0 / (4.0 * PI), 1.0, 1.0).unwrap();
        assert!((j - 0.079_577_471_545_947_67).abs() < 1e-15);
        let one = bare_couplings(&PhysicalParams::new(2.0, 0.3)).unwrap().kappa;
        let two = bare_couplings(&PhysicalParams::new(2.0, 0.6)).unwrap().kappa;
        let (j1, j2) = (
            mean_spin_current(one, 1.0, 0.5).unwrap(),
            mean_spin_current(two, 1.0, 0.5).unwrap(),
        );
        assert!((j2 - 2.0 * j1).abs() < 1e-16);
        assert!(mean_spin_current(1.0, 1.0, -0.1).is_err());
    }
}
