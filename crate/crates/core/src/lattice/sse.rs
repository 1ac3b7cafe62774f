use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::operators::{apply, Operators};
use super::LatticeError;
use crate::gfp::C;

/// Largest pre-renormalization norm deviation accepted in one step.
pub const MAX_NORM_DEVIATION: f64 = 0.1;

/// One Itô–Euler step of the diffusive stochastic Schrödinger equation,
/// followed by renormalization. `dw[μ]` is the Wiener increment of jump μ.
/// Returns the norm deviation |‖ψ'‖ − 1| before renormalization.
pub fn sse_step(psi: &mut DVector<C>, ops: &Operators, dt: f64, dw: &[f64]) -> Result<f64, LatticeError> {
    if dw.len() != ops.jumps.len() {
        return Err(LatticeError::InvalidParams(format!(
            "{} noise increments for {} jump operators",
            dw.len(),
            ops.jumps.len()
        )));
    }
    let h = apply(&ops.h, psi);
    let decay = apply(&ops.decay, psi);
    let mut next = &*psi + (h * C::new(0.0, -dt) - decay * C::new(0.5 * dt, 0.0));
    for (jump, &dw) in ops.jumps.iter().zip(dw) {
        let l = apply(&jump.op, psi);
        let w = psi.dotc(&l).re;
        next.axpy(C::new(w * dt - dw, 0.0), &l, C::new(1.0, 0.0));
        next.axpy(C::new(w * dw - 0.5 * w * w * dt, 0.0), psi, C::new(1.0, 0.0));
    }
    let norm = next.norm();
    let deviation = (norm - 1.0).abs();
    if !(deviation <= MAX_NORM_DEVIATION) {
        return Err(LatticeError::StepRejected { deviation });
    }
    *psi = next / C::new(norm, 0.0);
    Ok(deviation)
}

/// A pure state conditioned on its own measurement record.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub psi: DVector<C>,
    pub time: f64,
    rng: ChaCha8Rng,
    noise: Vec<f64>,
}

impl Trajectory {
    /// Trajectory `index` of an ensemble draws from its own ChaCha stream of `seed`.
    pub fn new(psi: DVector<C>, seed: u64, index: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(index);
        Self {
            psi,
            time: 0.0,
            rng,
            noise: Vec::new(),
        }
    }

    pub fn step(&mut self, ops: &Operators, dt: f64) -> Result<f64, LatticeError> {
        let sd = dt.sqrt();
        self.noise.clear();
        for _ in 0..ops.jumps.len() {
            let z: f64 = self.rng.sample(StandardNormal);
            self.noise.push(sd * z);
        }
        let deviation = sse_step(&mut self.psi, ops, dt, &self.noise).map_err(|e| match e {
            LatticeError::StepRejected { deviation } => LatticeError::StepRejectedAt {
                time: self.time,
                deviation,
            },
            other => other,
        })?;
        self.time += dt;
        Ok(deviation)
    }
}
