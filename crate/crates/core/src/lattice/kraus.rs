use nalgebra::DMatrix;

use super::operators::{build_operators, dense, Boundary, Operators};
use super::{LatticeError, LatticeParams};
use crate::gfp::C;

/// Dense H and jump operators of a sector, for generator-level checks.
#[derive(Debug, Clone)]
pub struct DenseModel {
    pub h: DMatrix<C>,
    pub jumps: Vec<DMatrix<C>>,
}

impl DenseModel {
    pub fn new(ops: &Operators) -> Self {
        Self {
            h: dense(&ops.h),
            jumps: ops.jumps.iter().map(|j| dense(&j.op)).collect(),
        }
    }

    /// 𝓛ρ = −i[H, ρ] + Σ_μ (L ρ L† − ½{L†L, ρ})
    pub fn lindblad(&self, rho: &DMatrix<C>) -> DMatrix<C> {
        let mut out = (&self.h * rho - rho * &self.h) * C::new(0.0, -1.0);
        for l in &self.jumps {
            let ld = l.adjoint();
            let ldl = &ld * l;
            out += l * rho * &ld - (&ldl * rho + rho * &ldl) * C::new(0.5, 0.0);
        }
        out
    }

    /// 𝓛†O = i[H, O] + Σ_μ (L† O L − ½{L†L, O})
    pub fn lindblad_adjoint(&self, o: &DMatrix<C>) -> DMatrix<C> {
        let mut out = (&self.h * o - o * &self.h) * C::new(0.0, 1.0);
        for l in &self.jumps {
            let ld = l.adjoint();
            let ldl = &ld * l;
            out += &ld * o * l - (&ldl * o + o * &ldl) * C::new(0.5, 0.0);
        }
        out
    }
}

/// max-abs entry of 𝓛𝟙 in the sector.
pub fn lindblad_identity_check(p: &LatticeParams, boundary: Boundary) -> Result<f64, LatticeError> {
    if p.sites > 4 {
        return Err(LatticeError::InvalidParams(format!(
            "identity check needs L ≤ 4 (got {})",
            p.sites
        )));
    }
    let ops = build_operators(p, boundary)?;
    let model = DenseModel::new(&ops);
    let one = DMatrix::identity(ops.basis.dim(), ops.basis.dim());
    Ok(model.lindblad(&one).iter().map(|z| z.norm()).fold(0.0, f64::max))
}

/// K₀ = 1 − (dt/2) L†L, K₁ = −i √dt L.
pub fn kraus_pair(l: &DMatrix<C>, dt: f64) -> (DMatrix<C>, DMatrix<C>) {
    let n = l.nrows();
    let k0 = DMatrix::identity(n, n) - l.adjoint() * l * C::new(0.5 * dt, 0.0);
    let k1 = l * C::new(0.0, -dt.sqrt());
    (k0, k1)
}

/// max-abs entry of K₀†K₀ + K₁†K₁ − 1.
pub fn completeness_defect(k0: &DMatrix<C>, k1: &DMatrix<C>) -> f64 {
    let n = k0.nrows();
    let m = k0.adjoint() * k0 + k1.adjoint() * k1 - DMatrix::identity(n, n);
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn kraus_channel(k0: &DMatrix<C>, k1: &DMatrix<C>, rho: &DMatrix<C>) -> DMatrix<C> {
    k0 * rho * k0.adjoint() + k1 * rho * k1.adjoint()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::Sector;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn params(sites: usize, gamma: f64) -> LatticeParams {
        LatticeParams {
            sites,
            sector: Sector::Spin { n_up: 1, n_dn: 1 },
            gamma,
            jz: 0.5,
            ..LatticeParams::default()
        }
    }

    fn max_abs(m: &DMatrix<C>) -> f64 {
        m.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    fn random_density(n: usize, seed: u64) -> DMatrix<C> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = DMatrix::from_fn(n, n, |_, _| {
            C::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)
        });
        let rho = &a * a.adjoint();
        let tr = rho.trace();
        rho / tr
    }

    #[test]
    fn identity_is_stationary_on_the_ring() {
        assert!(lindblad_identity_check(&params(2, 1.0), Boundary::Ring).unwrap() < 1e-14);
        assert!(lindblad_identity_check(&params(4, 0.7), Boundary::Ring).unwrap() < 1e-14);
        assert_eq!(lindblad_identity_check(&params(3, 0.0), Boundary::Ring).unwrap(), 0.0);
    }

    #[test]
    fn open_chain_breaks_identity_stationarity() {
        let r = lindblad_identity_check(&params(3, 1.0), Boundary::Open).unwrap();
        assert!(r > 0.5, "residual {r}");
        assert!(lindblad_identity_check(&params(5, 1.0), Boundary::Ring).is_err());
    }

    #[test]
    fn zero_step_kraus_pair_is_trivial() {
        let l = DMatrix::from_fn(3, 3, |i, j| C::new((i + 2 * j) as f64, 0.0));
        let (k0, k1) = kraus_pair(&l, 0.0);
        assert_eq!(k0, DMatrix::identity(3, 3));
        assert_eq!(k1, DMatrix::zeros(3, 3));
    }

    #[test]
    fn completeness_defect_is_second_order() {
        let ops = build_operators(&params(3, 0.9), Boundary::Ring).unwrap();
        let l = dense(&ops.jumps[1].op);
        let defect = |dt| {
            let (k0, k1) = kraus_pair(&l, dt);
            completeness_defect(&k0, &k1)
        };
        let ratio = defect(0.02) / defect(0.01);
        assert!((ratio - 4.0).abs() < 0.2, "ratio {ratio}");
    }

    #[test]
    fn kraus_step_matches_lindblad_euler_step() {
        let ops = build_operators(&params(3, 0.9), Boundary::Ring).unwrap();
        let l = dense(&ops.jumps[0].op);
        let model = DenseModel {
            h: DMatrix::zeros(l.nrows(), l.nrows()),
            jumps: vec![l.clone()],
        };
        let rho = random_density(l.nrows(), 3);
        let gap = |dt: f64| {
            let (k0, k1) = kraus_pair(&l, dt);
            max_abs(&(kraus_channel(&k0, &k1, &rho) - (&rho + model.lindblad(&rho) * C::new(dt, 0.0))))
        };
        let ratio = gap(0.02) / gap(0.01);
        assert!((ratio - 4.0).abs() < 0.2, "ratio {ratio}");
    }

    #[test]
    fn generator_and_adjoint_are_dual() {
        let ops = build_operators(&params(3, 0.6), Boundary::Ring).unwrap();
        let model = DenseModel::new(&ops);
        let n = ops.basis.dim();
        let rho = random_density(n, 1);
        let o = random_density(n, 2);
        let lhs = (&o * model.lindblad(&rho)).trace();
        let rhs = (model.lindblad_adjoint(&o) * &rho).trace();
        assert!((lhs - rhs).norm() < 1e-13);
    }

    #[test]
    fn lattice_current_obeys_continuity() {
        // 𝓛† n_{x,σ} = −(j_{x,σ} − j_{x−1,σ}) as operators
        let p = LatticeParams {
            sector: Sector::Spin { n_up: 2, n_dn: 1 },
            ..params(4, 0.8)
        };
        let ops = build_operators(&p, Boundary::Ring).unwrap();
        let model = DenseModel::new(&ops);
        let l = p.sites;
        for x in 0..l {
            let xm = ops.basis.wrap(x, -1);
            for (density, current, label) in [(0, 2, "charge"), (1, 3, "spin")] {
                let lhs = model.lindblad_adjoint(&dense(&ops.local[density][x]));
                let rhs = -(dense(&ops.local[current][x]) - dense(&ops.local[current][xm]));
                assert!(max_abs(&(lhs - rhs)) < 1e-13, "{label} x = {x}");
            }
        }
    }

    #[test]
    fn rashba_charge_current_obeys_continuity() {
        let p = LatticeParams {
            sector: Sector::Total { n: 2 },
            alpha: 0.3,
            h: 0.2,
            ..params(3, 0.8)
        };
        let ops = build_operators(&p, Boundary::Ring).unwrap();
        let model = DenseModel::new(&ops);
        for x in 0..3 {
            let xm = ops.basis.wrap(x, -1);
            let lhs = model.lindblad_adjoint(&dense(&ops.local[0][x]));
            let rhs = -(dense(&ops.local[2][x]) - dense(&ops.local[2][xm]));
            assert!(max_abs(&(lhs - rhs)) < 1e-13, "x = {x}");
        }
    }
}
