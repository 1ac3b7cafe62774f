//! Pseudo-unitary triangularization of the massless mode Hamiltonian.

use nalgebra::{Matrix6, Vector6};

use super::hamiltonian::{build_hq, sector_block, ModeHamiltonian};
use super::{c, max_abs, nambu_kron, pauli, GfpError, C, M2, M4};
use crate::params::Couplings;

/// Single-sector Bogoliubov rotation exp(vτ₂) with v = ½ asinh(Im ω / Re ω);
/// returns v and the lower-triangular V†h_νV.
pub fn bogoliubov_block(omega: C) -> Result<(f64, M2), GfpError> {
    if !(omega.re > 0.0) {
        return Err(GfpError::DegenerateMode(omega.re));
    }
    let v = 0.5 * (omega.im / omega.re).asinh();
    let rot = block_rotation(v);
    Ok((v, rot.adjoint() * sector_block(omega) * rot))
}

fn block_rotation(v: f64) -> M2 {
    pauli(0) * c(v.cosh(), 0.0) + pauli(2) * c(v.sinh(), 0.0)
}

/// Which starting point the Newton iteration converged from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Seed {
    Perturbative,
    Zero,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BogoliubovTransform {
    pub v: M4,
    /// (v₁₀, v₁₂, v₁₃, v₂₀, v₂₂, v₂₃).
    pub params: [f64; 6],
    /// max-abs of the Nambu-12 block of V†hV.
    pub residual: f64,
    /// max-abs of V†τ₃V − τ₃.
    pub pseudo_unitarity: f64,
    pub seed: Seed,
}

impl BogoliubovTransform {
    /// V₋ = τ₁ V₊* τ₁.
    pub fn v_minus(&self) -> M4 {
        let t1 = nambu_kron(&pauli(1), &pauli(0));
        t1 * self.v.conjugate() * t1
    }
}

/// exp(τ₁⊗v₁ + τ₂⊗v₂) with v_i = v_{i0}σ₀ + v_{i2}σ₂ + v_{i3}σ₃.
pub fn exponential_form(p: &[f64; 6]) -> M4 {
    let sector = |a: f64, b: f64, d: f64| pauli(0) * c(a, 0.0) + pauli(2) * c(b, 0.0) + pauli(3) * c(d, 0.0);
    let gen = nambu_kron(&pauli(1), &sector(p[0], p[1], p[2])) + nambu_kron(&pauli(2), &sector(p[3], p[4], p[5]));
    gen.exp()
}

fn nambu_12_block(v: &M4, h: &M4) -> M2 {
    (v.adjoint() * h * v).fixed_view::<2, 2>(0, 2).into_owned()
}

/// Real residuals from the σ₀, σ₂, σ₃ projections of the Nambu-12 block.
fn residual6(p: &[f64; 6], h: &M4) -> Vector6<f64> {
    let b = nambu_12_block(&exponential_form(p), h);
    let proj = |j: usize| (pauli(j) * b).trace() * 0.5;
    let (p0, p2, p3) = (proj(0), proj(2), proj(3));
    Vector6::new(p0.re, p0.im, p2.re, p2.im, p3.re, p3.im)
}

/// Perturbative parameters: diagonal rotations dressed by the O(κ) mixing W.
fn perturbative_params(m: &ModeHamiltonian, v_f: f64) -> Result<[f64; 6], GfpError> {
    let (vc, _) = bogoliubov_block(m.omega[0])?;
    let (vs, _) = bogoliubov_block(m.omega[1])?;
    let (w1, w2) = mixing_amplitudes(m, vc, vs, v_f);
    Ok([0.0, w1, 0.0, 0.5 * (vc + vs), w2, 0.5 * (vc - vs)])
}

fn mixing_amplitudes(m: &ModeHamiltonian, vc: f64, vs: f64, v_f: f64) -> (f64, f64) {
    let sum = m.omega[0] + m.omega[1];
    let norm = sum.norm_sqr();
    let kp = m.kappa_plus * v_f * m.q;
    let km = m.kappa_minus * v_f * m.q;
    let (sh, ch) = ((vc - vs).sinh(), (vc + vs).cosh());
    let w1 = (kp * sh * sum.re - km * ch * sum.im) / norm;
    let w2 = (kp * sh * sum.im + km * ch * sum.re) / norm;
    (w1, w2)
}

/// V⁽⁰⁾W with V⁽⁰⁾ = exp(τ₂⊗diag(v_c, v_s)) and W = 1 + (w₁τ₁ + w₂τ₂)⊗σ₂.
pub fn perturbative_transform(cpl: &Couplings, v_f: f64) -> Result<M4, GfpError> {
    let m = build_hq(cpl, 1.0, 0.0, v_f)?;
    let (vc, _) = bogoliubov_block(m.omega[0])?;
    let (vs, _) = bogoliubov_block(m.omega[1])?;
    let (w1, w2) = mixing_amplitudes(&m, vc, vs, v_f);
    let diag = M2::new(c(vc, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(vs, 0.0));
    let v0 = nambu_kron(&pauli(2), &diag).exp();
    let w =
        M4::identity() + nambu_kron(&pauli(1), &pauli(2)) * c(w1, 0.0) + nambu_kron(&pauli(2), &pauli(2)) * c(w2, 0.0);
    Ok(v0 * w)
}

const NEWTON_TOL: f64 = 1e-15;
const MAX_ITER: usize = 60;
const FD_STEP: f64 = 1e-7;
pub const SOLVE_TOL: f64 = 1e-10;

fn newton(h: &M4, start: [f64; 6]) -> ([f64; 6], f64) {
    let mut p = start;
    let mut r = residual6(&p, h);
    let mut rn = r.amax();
    for _ in 0..MAX_ITER {
        if rn < NEWTON_TOL {
            break;
        }
        let mut jac = Matrix6::<f64>::zeros();
        for j in 0..6 {
            let (mut up, mut dn) = (p, p);
            up[j] += FD_STEP;
            dn[j] -= FD_STEP;
            let col = (residual6(&up, h) - residual6(&dn, h)) / (2.0 * FD_STEP);
            jac.set_column(j, &col);
        }
        let step = match jac.lu().solve(&(-r)) {
            Some(s) => s,
            None => match jac.svd(true, true).solve(&(-r), 1e-14) {
                Ok(s) => s,
                Err(_) => break,
            },
        };
        let mut t = 1.0;
        let mut improved = false;
        for _ in 0..40 {
            let trial: [f64; 6] = std::array::from_fn(|i| p[i] + t * step[i]);
            let rt = residual6(&trial, h);
            if rt.amax() < rn {
                p = trial;
                r = rt;
                rn = rt.amax();
                improved = true;
                break;
            }
            t *= 0.5;
        }
        if !improved {
            break;
        }
    }
    (p, rn)
}

fn finish(p: [f64; 6], h: &M4, seed: Seed) -> BogoliubovTransform {
    let v = exponential_form(&p);
    let t3 = nambu_kron(&pauli(3), &pauli(0));
    BogoliubovTransform {
        residual: max_abs(&nambu_12_block(&v, h)),
        pseudo_unitarity: max_abs(&(v.adjoint() * t3 * v - t3)),
        v,
        params: p,
        seed,
    }
}

/// Solve for V₊ at the massless fixed point. The q > 0 transform does not depend on |q|.
pub fn solve_v_plus(cpl: &Couplings, v_f: f64) -> Result<BogoliubovTransform, GfpError> {
    let m = build_hq(cpl, 1.0, 0.0, v_f)?;
    let mut best = f64::INFINITY;
    let mut best_seed = Seed::Perturbative;
    let seeds = [
        (Seed::Perturbative, perturbative_params(&m, v_f)),
        (Seed::Zero, Ok([0.0; 6])),
    ];
    for (seed, start) in seeds {
        let Ok(start) = start else { continue };
        let (p, _) = newton(&m.h, start);
        let t = finish(p, &m.h, seed);
        if t.residual < SOLVE_TOL && t.pseudo_unitarity < SOLVE_TOL {
            return Ok(t);
        }
        if t.residual < best {
            best = t.residual;
            best_seed = seed;
        }
    }
    Err(GfpError::NoConvergence {
        best_residual: best,
        seed: best_seed,
    })
}
