//! Numerics for monitored spinful Luttinger liquids: RG flow of the effective
//! non-hermitian sine-Gordon theory, its Gaussian fixed point, and exact
//! quantum-trajectory simulations on small rings.

pub mod gfp;
pub mod lattice;
pub mod ode;
pub mod params;
pub mod quad;
pub mod rgflow;
