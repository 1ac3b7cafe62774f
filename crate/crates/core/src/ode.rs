//! Embedded Dormand–Prince 5(4) integrator with PI-free step control.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct StepSpec {
    pub rtol: f64,
    pub atol: f64,
    pub h_init: f64,
    pub h_min: f64,
    pub max_steps: usize,
}

impl Default for StepSpec {
    fn default() -> Self {
        Self {
            rtol: 1e-8,
            atol: 1e-12,
            h_init: 1e-2,
            h_min: 1e-12,
            max_steps: 1_000_000,
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OdeError {
    #[error("step size underflow at t = {t} (h = {h:e})")]
    StepUnderflow { t: f64, h: f64 },
    #[error("step budget of {0} exhausted")]
    TooManySteps(usize),
    #[error("right-hand side failed at t = {t}: {msg}")]
    Rhs { t: f64, msg: String },
}

pub enum Control {
    Continue,
    Stop,
}

/// A system of real ODEs whose right-hand side may carry state updated between steps.
pub trait System {
    fn rhs(&self, t: f64, y: &[f64], dy: &mut [f64]) -> Result<(), String>;
    /// Called after every accepted step.
    fn accepted(&mut self, t: f64, y: &[f64]) -> Result<Control, String>;
}

const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
const B5: [f64; 7] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
    0.0,
];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

/// Integrate from `t0` to `t_end`; returns the final time reached.
pub fn integrate<S: System>(sys: &mut S, t0: f64, y: &mut [f64], t_end: f64, spec: &StepSpec) -> Result<f64, OdeError> {
    let n = y.len();
    let mut k = vec![vec![0.0; n]; 7];
    let mut stage = vec![0.0; n];
    let mut y5 = vec![0.0; n];
    let mut t = t0;
    let mut h = spec.h_init.min(t_end - t0);
    let mut steps = 0usize;
    let rhs = |sys: &S, t: f64, y: &[f64], dy: &mut [f64]| sys.rhs(t, y, dy).map_err(|msg| OdeError::Rhs { t, msg });

    while t < t_end {
        if steps >= spec.max_steps {
            return Err(OdeError::TooManySteps(spec.max_steps));
        }
        if h < spec.h_min {
            return Err(OdeError::StepUnderflow { t, h });
        }
        let last = t + h >= t_end;
        if last {
            h = t_end - t;
        }
        rhs(sys, t, y, &mut k[0])?;
        for s in 1..7 {
            for i in 0..n {
                let mut acc = y[i];
                for j in 0..s {
                    acc += h * A[s][j] * k[j][i];
                }
                stage[i] = acc;
            }
            rhs(sys, t + C[s] * h, &stage, &mut k[s])?;
        }
        let mut err = 0.0f64;
        for i in 0..n {
            let mut s5 = 0.0;
            let mut s4 = 0.0;
            for s in 0..7 {
                s5 += B5[s] * k[s][i];
                s4 += B4[s] * k[s][i];
            }
            y5[i] = y[i] + h * s5;
            let sc = spec.atol + spec.rtol * y[i].abs().max(y5[i].abs());
            let e = h * (s5 - s4) / sc;
            err = err.max(e.abs());
        }
        if !err.is_finite() {
            h *= 0.1;
            continue;
        }
        if err <= 1.0 {
            t = if last { t_end } else { t + h };
            y.copy_from_slice(&y5);
            steps += 1;
            let ctl = sys.accepted(t, y).map_err(|msg| OdeError::Rhs { t, msg })?;
            if let Control::Stop = ctl {
                return Ok(t);
            }
        }
        let fac = if err == 0.0 {
            5.0
        } else {
            (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
        };
        h *= fac;
    }
    Ok(t)
}
