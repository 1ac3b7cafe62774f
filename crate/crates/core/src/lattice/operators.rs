use nalgebra::{DMatrix, DVector};
use nalgebra_sparse::ops::serial::spmm_csr_dense;
use nalgebra_sparse::ops::Op;
use nalgebra_sparse::{CooMatrix, CsrMatrix};
use serde::{Deserialize, Serialize};

use super::basis::{hop, occupied, Basis, DOWN, UP};
use super::{LatticeError, LatticeParams};
use crate::gfp::C;

pub type SparseOp = CsrMatrix<C>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Boundary {
    Ring,
    Open,
}

/// Local observables; currents live on the bond (x, x+1).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Observable {
    ChargeDensity,
    SpinDensity,
    ChargeCurrent,
    SpinCurrent,
}

impl Observable {
    pub const ALL: [Observable; 4] = [
        Observable::ChargeDensity,
        Observable::SpinDensity,
        Observable::ChargeCurrent,
        Observable::SpinCurrent,
    ];

    pub fn label(self) -> &'static str {
        match self {
            Observable::ChargeDensity => "rho_c",
            Observable::SpinDensity => "rho_s",
            Observable::ChargeCurrent => "j_c",
            Observable::SpinCurrent => "j_s",
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }
}

#[derive(Debug, Clone)]
pub struct Jump {
    pub site: usize,
    pub spin: usize,
    pub op: SparseOp,
}

#[derive(Debug, Clone)]
pub struct Operators {
    pub basis: Basis,
    pub boundary: Boundary,
    pub h: SparseOp,
    pub jumps: Vec<Jump>,
    /// Σ_μ L†_μ L_μ.
    pub decay: SparseOp,
    /// `local[obs][x]`.
    pub local: [Vec<SparseOp>; 4],
    /// N_↑, N_↓.
    pub number: [SparseOp; 2],
}

/// Accumulates matrix elements of second-quantized operators in a sector.
struct Builder<'a> {
    basis: &'a Basis,
    coo: CooMatrix<C>,
}

impl<'a> Builder<'a> {
    fn new(basis: &'a Basis) -> Self {
        Self {
            basis,
            coo: CooMatrix::new(basis.dim(), basis.dim()),
        }
    }

    /// + amp · c†_a c_b
    fn hopping(&mut self, a: usize, b: usize, amp: C) -> &mut Self {
        for (j, &s) in self.basis.states().iter().enumerate() {
            if let Some((t, sign)) = hop(s, a, b) {
                let i = self.basis.index(t).expect("hopping leaves the sector");
                self.coo.push(i, j, amp * sign);
            }
        }
        self
    }

    /// + diag(f(state))
    fn diagonal(&mut self, f: impl Fn(u32) -> f64) -> &mut Self {
        for (j, &s) in self.basis.states().iter().enumerate() {
            let v = f(s);
            if v != 0.0 {
                self.coo.push(j, j, C::new(v, 0.0));
            }
        }
        self
    }

    fn finish(&self) -> SparseOp {
        CsrMatrix::from(&self.coo)
    }
}

fn bond(basis: &Basis, boundary: Boundary, x: usize, shift: isize) -> Option<usize> {
    let target = x as isize + shift;
    match boundary {
        Boundary::Ring => Some(basis.wrap(x, shift)),
        Boundary::Open => (0..basis.sites as isize).contains(&target).then_some(target as usize),
    }
}

/// Spin-conserving bond current of spin `s` on bond (x, x+1), hopping plus measurement part.
fn spin_current(basis: &Basis, p: &LatticeParams, boundary: Boundary, x: usize, s: usize) -> SparseOp {
    let mut b = Builder::new(basis);
    if let Some(y) = bond(basis, boundary, x, 1) {
        let (a, c) = (basis.mode(x, s), basis.mode(y, s));
        // i t0 (c†_{x+1} c_x − c†_x c_{x+1})
        b.hopping(c, a, C::new(0.0, p.t0)).hopping(a, c, C::new(0.0, -p.t0));
        let g = p.gamma;
        if s == UP {
            b.diagonal(|st| if occupied(st, a) && !occupied(st, c) { g } else { 0.0 });
        } else {
            b.diagonal(|st| if occupied(st, c) && !occupied(st, a) { -g } else { 0.0 });
        }
    }
    b.finish()
}

/// Charge current on bond (x, x+1) carried by the Rashba term.
fn rashba_current(basis: &Basis, p: &LatticeParams, boundary: Boundary, x: usize) -> SparseOp {
    let mut b = Builder::new(basis);
    if let Some(y) = bond(basis, boundary, x, 1) {
        let tau = C::new(0.0, -p.alpha);
        for (sa, sb) in [(UP, DOWN), (DOWN, UP)] {
            let (a, c) = (basis.mode(x, sa), basis.mode(y, sb));
            // H ∋ τ c†_a c_b + h.c.  ⇒  J = i τ c†_a c_b − i τ* c†_b c_a
            b.hopping(a, c, C::i() * tau).hopping(c, a, -C::i() * tau.conj());
        }
    }
    b.finish()
}

pub fn build_operators(p: &LatticeParams, boundary: Boundary) -> Result<Operators, LatticeError> {
    p.validate()?;
    let basis = Basis::new(p.sites, p.sector)?;
    let l = p.sites;

    let mut h = Builder::new(&basis);
    for x in 0..l {
        if let Some(y) = bond(&basis, boundary, x, 1) {
            for s in [UP, DOWN] {
                let (a, c) = (basis.mode(x, s), basis.mode(y, s));
                h.hopping(a, c, C::new(-p.t0, 0.0)).hopping(c, a, C::new(-p.t0, 0.0));
            }
            let (xu, xd, yu, yd) = (
                basis.mode(x, UP),
                basis.mode(x, DOWN),
                basis.mode(y, UP),
                basis.mode(y, DOWN),
            );
            let sz = |st: u32, u: usize, d: usize| 0.5 * (occupied(st, u) as i32 - occupied(st, d) as i32) as f64;
            h.diagonal(|st| -p.jz * sz(st, xu, xd) * sz(st, yu, yd));
            if p.alpha != 0.0 {
                let tau = C::new(0.0, -p.alpha);
                for (sa, sb) in [(UP, DOWN), (DOWN, UP)] {
                    let (a, c) = (basis.mode(x, sa), basis.mode(y, sb));
                    h.hopping(a, c, tau).hopping(c, a, tau.conj());
                }
            }
        }
        if p.h != 0.0 {
            let (u, d) = (basis.mode(x, UP), basis.mode(x, DOWN));
            h.hopping(u, d, C::new(p.h, 0.0)).hopping(d, u, C::new(p.h, 0.0));
        }
    }

    let root = C::new(p.gamma.sqrt(), 0.0);
    let mut jumps = Vec::with_capacity(2 * l);
    let mut decay = Builder::new(&basis);
    for s in [UP, DOWN] {
        let shift = if s == UP { 1 } else { -1 };
        for x in 0..l {
            let Some(y) = bond(&basis, boundary, x, shift) else {
                continue;
            };
            let (from, to) = (basis.mode(x, s), basis.mode(y, s));
            let mut j = Builder::new(&basis);
            j.hopping(to, from, root);
            jumps.push(Jump {
                site: x,
                spin: s,
                op: j.finish(),
            });
            let g = p.gamma;
            decay.diagonal(|st| {
                if occupied(st, from) && !occupied(st, to) {
                    g
                } else {
                    0.0
                }
            });
        }
    }

    let density = |sign: f64, x: usize| {
        let (u, d) = (basis.mode(x, UP), basis.mode(x, DOWN));
        let mut b = Builder::new(&basis);
        b.diagonal(|st| occupied(st, u) as i32 as f64 + sign * occupied(st, d) as i32 as f64);
        b.finish()
    };
    let currents: Vec<[SparseOp; 2]> = (0..l)
        .map(|x| [UP, DOWN].map(|s| spin_current(&basis, p, boundary, x, s)))
        .collect();
    let charge_current = (0..l)
        .map(|x| {
            let mut j = &currents[x][UP] + &currents[x][DOWN];
            if p.alpha != 0.0 {
                j = &j + &rashba_current(&basis, p, boundary, x);
            }
            j
        })
        .collect();
    let local = [
        (0..l).map(|x| density(1.0, x)).collect(),
        (0..l).map(|x| density(-1.0, x)).collect(),
        charge_current,
        currents.iter().map(|c| &c[UP] - &c[DOWN]).collect(),
    ];
    let number = [UP, DOWN].map(|s| {
        let mut b = Builder::new(&basis);
        b.diagonal(|st| (0..l).filter(|&x| occupied(st, basis.mode(x, s))).count() as f64);
        b.finish()
    });

    Ok(Operators {
        h: h.finish(),
        jumps,
        decay: decay.finish(),
        local,
        number,
        basis,
        boundary,
    })
}

/// y = A x
pub fn apply(a: &SparseOp, x: &DVector<C>) -> DVector<C> {
    let mut y = DVector::zeros(a.nrows());
    apply_into(a, x, &mut y);
    y
}

pub fn apply_into(a: &SparseOp, x: &DVector<C>, y: &mut DVector<C>) {
    spmm_csr_dense(C::new(0.0, 0.0), y, C::new(1.0, 0.0), Op::NoOp(a), Op::NoOp(x));
}

pub fn dense(a: &SparseOp) -> DMatrix<C> {
    DMatrix::from(a)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::Sector;

    fn max_abs(m: &DMatrix<C>) -> f64 {
        m.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    fn params(sites: usize, sector: Sector) -> LatticeParams {
        LatticeParams {
            sites,
            sector,
            jz: 0.7,
            gamma: 0.4,
            ..LatticeParams::default()
        }
    }

    #[test]
    fn two_site_single_fermion_hopping_is_doubled() {
        let p = LatticeParams {
            sites: 2,
            sector: Sector::Spin { n_up: 1, n_dn: 0 },
            t0: 1.0,
            jz: 0.0,
            gamma: 0.0,
            ..LatticeParams::default()
        };
        let ops = build_operators(&p, Boundary::Ring).unwrap();
        let h = dense(&ops.h);
        let expected = DMatrix::from_row_slice(2, 2, &[0.0, -2.0, -2.0, 0.0].map(|v| C::new(v, 0.0)));
        assert_eq!(h, expected);
        let open = dense(&build_operators(&p, Boundary::Open).unwrap().h);
        assert_eq!(open, expected / C::new(2.0, 0.0));
    }

    #[test]
    fn hamiltonian_is_hermitian() {
        for (h, alpha) in [(0.0, 0.0), (0.3, 0.0), (0.0, 0.25), (0.2, 0.15)] {
            let sector = if h == 0.0 && alpha == 0.0 {
                Sector::Spin { n_up: 2, n_dn: 1 }
            } else {
                Sector::Total { n: 3 }
            };
            let p = LatticeParams {
                h,
                alpha,
                ..params(4, sector)
            };
            let m = dense(&build_operators(&p, Boundary::Ring).unwrap().h);
            assert_eq!(max_abs(&(&m - m.adjoint())), 0.0);
            for obs in Observable::ALL {
                for a in &build_operators(&p, Boundary::Ring).unwrap().local[obs.index()] {
                    let d = dense(a);
                    assert_eq!(max_abs(&(&d - d.adjoint())), 0.0, "{obs:?}");
                }
            }
        }
    }

    #[test]
    fn spin_numbers_conserved_without_flips() {
        let p = params(3, Sector::Total { n: 3 });
        let ops = build_operators(&p, Boundary::Ring).unwrap();
        let h = dense(&ops.h);
        for n in &ops.number {
            let n = dense(n);
            assert_eq!(max_abs(&(&h * &n - &n * &h)), 0.0);
        }
        let flip = LatticeParams { h: 0.3, ..p };
        let ops = build_operators(&flip, Boundary::Ring).unwrap();
        let (h, n) = (dense(&ops.h), dense(&ops.number[0]));
        assert!(max_abs(&(&h * &n - &n * &h)) > 0.1);
    }

    #[test]
    fn spin_flips_need_total_sector() {
        let p = LatticeParams {
            h: 0.1,
            ..params(3, Sector::Spin { n_up: 1, n_dn: 1 })
        };
        assert!(matches!(
            build_operators(&p, Boundary::Ring),
            Err(LatticeError::SectorMismatch(_))
        ));
    }

    #[test]
    fn jumps_move_one_fermion_in_its_spin_direction() {
        let p = params(3, Sector::Spin { n_up: 1, n_dn: 1 });
        let ops = build_operators(&p, Boundary::Ring).unwrap();
        assert_eq!(ops.jumps.len(), 6);
        let b = &ops.basis;
        for j in &ops.jumps {
            let shift = if j.spin == UP { 1 } else { -1 };
            for (col, &s) in b.states().iter().enumerate() {
                let from = b.mode(j.site, j.spin);
                let to = b.mode(b.wrap(j.site, shift), j.spin);
                let row: Vec<_> = j.op.triplet_iter().filter(|t| t.1 == col).collect();
                if occupied(s, from) && !occupied(s, to) {
                    assert_eq!(row.len(), 1);
                    assert!((row[0].2.norm() - p.gamma.sqrt()).abs() < 1e-15);
                } else {
                    assert!(row.is_empty());
                }
            }
        }
        let open = build_operators(&p, Boundary::Open).unwrap();
        assert_eq!(open.jumps.len(), 4);
    }

    #[test]
    fn decay_matches_sum_of_jump_products() {
        let p = params(3, Sector::Spin { n_up: 2, n_dn: 1 });
        let ops = build_operators(&p, Boundary::Ring).unwrap();
        let mut sum = DMatrix::zeros(ops.basis.dim(), ops.basis.dim());
        for j in &ops.jumps {
            let l = dense(&j.op);
            sum += l.adjoint() * l;
        }
        assert!(max_abs(&(sum - dense(&ops.decay))) < 1e-15);
    }
}
