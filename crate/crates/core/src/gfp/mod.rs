//! Gaussian fixed points: the spinor mode Hamiltonian, its pseudo-unitary
//! Bogoliubov triangularization, and the correlators that follow.

mod bogoliubov;
mod coefficients;
mod hamiltonian;
mod massive;

use nalgebra::{Matrix2, Matrix4};
use num_complex::Complex64;
use thiserror::Error;

pub use bogoliubov::{bogoliubov_block, perturbative_transform, solve_v_plus, BogoliubovTransform, Seed};
pub use coefficients::{
    correlation_matrix, mean_spin_current, sigma_delta_tables, six_coefficients, solve_fixed_point,
    CorrelationCoefficients, FixedPoint, TraceTables, OBSERVABLES,
};
pub use hamiltonian::{build_hq, dispersion, ModeHamiltonian};
pub use massive::{correlation_length, fit_decay, fitted_length, massive_correlator_f0, DecayFit, Lengths};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GfpError {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("degenerate mode: Re ω = {0} ≤ 0")]
    DegenerateMode(f64),
    #[error("Bogoliubov solve did not converge (best residual {best_residual:e}, seed {seed:?})")]
    NoConvergence { best_residual: f64, seed: Seed },
    #[error("Fourier quadrature did not converge: {0}")]
    NonConvergence(String),
}

pub type C = Complex64;
pub type M2 = Matrix2<C>;
pub type M4 = Matrix4<C>;

fn c(re: f64, im: f64) -> C {
    C::new(re, im)
}

/// Pauli matrices σ₀…σ₃ (also used for the Nambu τ's).
pub fn pauli(i: usize) -> M2 {
    let (o, z, j) = (c(1.0, 0.0), c(0.0, 0.0), c(0.0, 1.0));
    match i {
        0 => M2::new(o, z, z, o),
        1 => M2::new(z, o, o, z),
        2 => M2::new(z, -j, j, z),
        3 => M2::new(o, z, z, -o),
        _ => panic!("Pauli index {i} out of range"),
    }
}

/// τ ⊗ σ in the basis (b_c, b_s, b†_c, b†_s): Nambu index outer, sector index inner.
pub fn nambu_kron(tau: &M2, sigma: &M2) -> M4 {
    M4::from_fn(|i, j| tau[(i / 2, j / 2)] * sigma[(i % 2, j % 2)])
}

/// Projector |ν⟩⟨ν| in sector space.
fn sector_projector(nu: usize) -> M2 {
    let mut p = M2::zeros();
    p[(nu, nu)] = c(1.0, 0.0);
    p
}

/// max-abs entry of a complex matrix.
fn max_abs<const R: usize, const K: usize>(m: &nalgebra::SMatrix<C, R, K>) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}
