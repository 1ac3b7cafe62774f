//! Integration of the coupled flow of λ, l_ν and k_ν.

use std::cell::RefCell;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::fint::{f_coefficients, FIntegrator, FValues};
use super::{FlowError, QuadSpec};
use crate::ode::{self, Control, OdeError, StepSpec, System};
use crate::params::Couplings;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlowState {
    pub ell: f64,
    pub lambda: Complex64,
    pub l: [Complex64; 2],
    pub k: [Complex64; 2],
}

impl FlowState {
    pub fn initial(c: &Couplings) -> Self {
        Self {
            ell: 0.0,
            lambda: Complex64::from(c.lambda),
            l: [Complex64::from(1.0); 2],
            k: c.k(),
        }
    }

    fn pack(&self) -> [f64; 10] {
        let mut y = [0.0; 10];
        let vals = [self.lambda, self.l[0], self.l[1], self.k[0], self.k[1]];
        for (i, v) in vals.iter().enumerate() {
            y[2 * i] = v.re;
            y[2 * i + 1] = v.im;
        }
        y
    }

    fn unpack(ell: f64, y: &[f64]) -> Self {
        let c = |i: usize| Complex64::new(y[2 * i], y[2 * i + 1]);
        Self {
            ell,
            lambda: c(0),
            l: [c(1), c(2)],
            k: [c(3), c(4)],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlowDerivative {
    pub lambda: Complex64,
    pub l: [Complex64; 2],
    pub k: [Complex64; 2],
}

/// Right-hand side of the flow for given loop integrals.
pub fn rg_rhs(s: &FlowState, f: FValues) -> Result<FlowDerivative, FlowError> {
    let mut dim = Complex64::from(2.0);
    for nu in 0..2 {
        let lk = s.l[nu] * s.k[nu];
        if lk.im.abs() <= 1e-15 * lk.norm() && lk.re <= 0.0 {
            return Err(FlowError::Branch { ell: s.ell });
        }
        dim -= lk.sqrt().inv();
    }
    let l2 = s.lambda * s.lambda;
    Ok(FlowDerivative {
        lambda: dim * s.lambda,
        l: [f.f_t * l2; 2],
        k: [-f.f_x * l2; 2],
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RefreshMode {
    /// Recompute f when l or k has drifted by more than `refresh_tol`.
    Auto,
    /// Recompute f at every right-hand-side evaluation.
    Always,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FMode {
    Full,
    /// f ≡ 0: only λ flows, with its tree-level dimension.
    Frozen,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FlowOptions {
    pub ell_max: f64,
    pub escape_ratio: f64,
    pub weak_ratio: f64,
    pub refresh: RefreshMode,
    pub refresh_tol: f64,
    pub f_mode: FMode,
    pub quad: QuadSpec,
    pub step: StepSpec,
    /// Verify the quadrature under node doubling at the first f evaluation.
    pub check_quadrature: bool,
}

impl Default for FlowOptions {
    fn default() -> Self {
        Self {
            ell_max: 50.0,
            escape_ratio: 1e3,
            weak_ratio: 1e-6,
            refresh: RefreshMode::Auto,
            refresh_tol: 1e-2,
            f_mode: FMode::Full,
            quad: QuadSpec::default(),
            step: StepSpec::default(),
            check_quadrature: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FlowStatus {
    Completed,
    StrongCoupling,
    WeakCoupling,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FlowTrace {
    pub states: Vec<FlowState>,
    pub status: FlowStatus,
    pub f_evaluations: usize,
}

impl FlowTrace {
    pub fn first(&self) -> &FlowState {
        &self.states[0]
    }

    pub fn last(&self) -> &FlowState {
        self.states.last().expect("trace is never empty")
    }

    /// |λ(ℓ_end)/λ(0)|, or 0 when λ(0) = 0.
    pub fn lambda_ratio(&self) -> f64 {
        let l0 = self.first().lambda.norm();
        if l0 == 0.0 {
            0.0
        } else {
            self.last().lambda.norm() / l0
        }
    }
}

struct FlowSystem<'a> {
    opts: &'a FlowOptions,
    integ: FIntegrator,
    f: FValues,
    f_at: FlowState,
    lambda0: f64,
    states: Vec<FlowState>,
    status: FlowStatus,
    f_evaluations: usize,
    error: RefCell<Option<FlowError>>,
}

impl FlowSystem<'_> {
    fn fail(&self, e: FlowError) -> String {
        let msg = e.to_string();
        self.error.borrow_mut().get_or_insert(e);
        msg
    }

    fn drift(&self, s: &FlowState) -> f64 {
        (0..2)
            .map(|nu| {
                (s.l[nu] - self.f_at.l[nu])
                    .norm()
                    .max((s.k[nu] - self.f_at.k[nu]).norm())
            })
            .fold(0.0, f64::max)
    }
}

impl System for FlowSystem<'_> {
    fn rhs(&self, t: f64, y: &[f64], dy: &mut [f64]) -> Result<(), String> {
        let s = FlowState::unpack(t, y);
        let f = match (self.opts.f_mode, self.opts.refresh) {
            (FMode::Frozen, _) => zero_f(),
            (FMode::Full, RefreshMode::Auto) => self.f,
            (FMode::Full, RefreshMode::Always) => self.integ.eval(s.l, s.k).map_err(|e| self.fail(e))?,
        };
        let d = rg_rhs(&s, f).map_err(|e| self.fail(e))?;
        let vals = [d.lambda, d.l[0], d.l[1], d.k[0], d.k[1]];
        for (i, v) in vals.iter().enumerate() {
            dy[2 * i] = v.re;
            dy[2 * i + 1] = v.im;
        }
        Ok(())
    }

    fn accepted(&mut self, t: f64, y: &[f64]) -> Result<Control, String> {
        let s = FlowState::unpack(t, y);
        self.states.push(s);
        let ratio = s.lambda.norm() / self.lambda0;
        if ratio > self.opts.escape_ratio {
            self.status = FlowStatus::StrongCoupling;
            return Ok(Control::Stop);
        }
        if ratio < self.opts.weak_ratio {
            self.status = FlowStatus::WeakCoupling;
            return Ok(Control::Stop);
        }
        if self.opts.f_mode == FMode::Full && self.drift(&s) > self.opts.refresh_tol {
            self.f = self.integ.eval(s.l, s.k).map_err(|e| self.fail(e))?;
            self.f_at = s;
            self.f_evaluations += 1;
        }
        Ok(Control::Continue)
    }
}

fn zero_f() -> FValues {
    FValues {
        f_t: Complex64::new(0.0, 0.0),
        f_x: Complex64::new(0.0, 0.0),
    }
}

/// Integrate the flow from the bare couplings up to `opts.ell_max` or until λ escapes.
pub fn integrate_flow(c: &Couplings, opts: &FlowOptions) -> Result<FlowTrace, FlowError> {
    if !(opts.ell_max > 0.0) || !opts.ell_max.is_finite() {
        return Err(FlowError::InvalidInput(format!(
            "ell_max must be positive (got {})",
            opts.ell_max
        )));
    }
    let s0 = FlowState::initial(c);
    if c.lambda == 0.0 {
        let end = FlowState {
            ell: opts.ell_max,
            ..s0
        };
        return Ok(FlowTrace {
            states: vec![s0, end],
            status: FlowStatus::WeakCoupling,
            f_evaluations: 0,
        });
    }
    let integ = FIntegrator::new(opts.quad)?;
    let (f, evals) = match opts.f_mode {
        FMode::Frozen => (zero_f(), 0),
        FMode::Full if opts.check_quadrature => (f_coefficients(s0.l, s0.k, opts.quad)?, 1),
        FMode::Full => (integ.eval(s0.l, s0.k)?, 1),
    };
    let mut sys = FlowSystem {
        opts,
        integ,
        f,
        f_at: s0,
        lambda0: c.lambda.abs(),
        states: vec![s0],
        status: FlowStatus::Completed,
        f_evaluations: evals,
        error: RefCell::new(None),
    };
    let mut y = s0.pack();
    let res = ode::integrate(&mut sys, 0.0, &mut y, opts.ell_max, &opts.step);
    if let Some(e) = sys.error.take() {
        return Err(e);
    }
    match res {
        Ok(_) => Ok(FlowTrace {
            states: sys.states,
            status: sys.status,
            f_evaluations: sys.f_evaluations,
        }),
        Err(OdeError::StepUnderflow { t, h }) => Err(FlowError::StepFailure {
            ell: t,
            detail: format!("step size underflow (h = {h:e})"),
        }),
        Err(OdeError::TooManySteps(n)) => Err(FlowError::StepFailure {
            ell: sys.states.last().map_or(0.0, |s| s.ell),
            detail: format!("exceeded {n} steps"),
        }),
        Err(OdeError::Rhs { t, msg }) => Err(FlowError::StepFailure { ell: t, detail: msg }),
    }
}

/// Short range if λ escapes to strong coupling or ends above its bare magnitude.
pub fn classify_phase(trace: &FlowTrace) -> super::Phase {
    if trace.status == FlowStatus::StrongCoupling || trace.lambda_ratio() > 1.0 {
        super::Phase::ShortRange
    } else {
        super::Phase::Algebraic
    }
}
