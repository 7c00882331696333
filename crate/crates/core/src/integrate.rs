//! Fixed-step RK4 and adaptive Dormand-Prince 5(4) integration of the model.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{vector_field, ParamSet, State};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Method {
    FixedRK4,
    Adaptive54,
}

impl Method {
    pub fn as_str(&self) -> &'static str {
        match self {
            Method::FixedRK4 => "FixedRK4",
            Method::Adaptive54 => "Adaptive54",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntegratorOptions {
    pub method: Method,
    /// Step size for RK4, initial step for the adaptive pair.
    pub h_init: f64,
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub t_end: f64,
    /// Upper bound on attempted steps (accepted + rejected).
    pub max_steps: usize,
    /// Record every `record_stride`-th accepted step.
    pub record_stride: usize,
}

pub const DEFAULT_H: f64 = 0.01;
pub const DEFAULT_TOL: f64 = 1e-9;
pub const DEFAULT_MAX_STEPS: usize = 50_000_000;

impl IntegratorOptions {
    pub fn fixed_rk4(h: f64, t_end: f64) -> Self {
        Self {
            method: Method::FixedRK4,
            h_init: h,
            t_end,
            ..Self::adaptive(t_end)
        }
    }

    pub fn adaptive(t_end: f64) -> Self {
        Self {
            method: Method::Adaptive54,
            h_init: DEFAULT_H.min(t_end),
            abs_tol: DEFAULT_TOL,
            rel_tol: DEFAULT_TOL,
            t_end,
            max_steps: DEFAULT_MAX_STEPS,
            record_stride: 1,
        }
    }

    pub fn with_tolerances(mut self, abs_tol: f64, rel_tol: f64) -> Self {
        self.abs_tol = abs_tol;
        self.rel_tol = rel_tol;
        self
    }

    pub fn with_stride(mut self, stride: usize) -> Self {
        self.record_stride = stride;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidOptions(msg));
        if !(self.t_end.is_finite() && self.t_end > 0.0) {
            return bad(format!("t_end must be positive, got {}", self.t_end));
        }
        if !(self.h_init.is_finite() && self.h_init > 0.0) {
            return bad(format!("step size must be positive, got {}", self.h_init));
        }
        if self.h_init > self.t_end {
            return bad(format!(
                "step size {} exceeds t_end {}",
                self.h_init, self.t_end
            ));
        }
        if self.method == Method::Adaptive54 && !(self.abs_tol >= 1e-14 && self.rel_tol >= 1e-14) {
            return bad(format!(
                "tolerances must be >= 1e-14, got abs {} rel {}",
                self.abs_tol, self.rel_tol
            ));
        }
        if self.max_steps == 0 {
            return bad("max_steps must be positive".into());
        }
        if self.record_stride == 0 {
            return bad("record_stride must be positive".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub t: f64,
    pub state: State,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryMeta {
    pub method: Method,
    pub accepted_steps: usize,
    pub rejected_steps: usize,
}

impl TrajectoryMeta {
    pub fn accepted_fraction(&self) -> f64 {
        let total = self.accepted_steps + self.rejected_steps;
        if total == 0 {
            1.0
        } else {
            self.accepted_steps as f64 / total as f64
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub params: ParamSet,
    pub samples: Vec<Sample>,
    pub meta: TrajectoryMeta,
}

impl Trajectory {
    pub fn final_state(&self) -> State {
        self.samples
            .last()
            .expect("trajectory always has t = 0")
            .state
    }

    pub fn final_time(&self) -> f64 {
        self.samples.last().expect("trajectory always has t = 0").t
    }
}

// Component-wise arithmetic on raw triples keeps the steppers allocation free.
type V3 = [f64; 3];

#[inline]
fn axpy(x: &V3, h: f64, terms: &[(f64, &V3)]) -> V3 {
    let mut out = *x;
    for (c, k) in terms {
        for j in 0..3 {
            out[j] += h * c * k[j];
        }
    }
    out
}

#[inline]
fn field(p: &ParamSet, x: &V3) -> V3 {
    vector_field(p, &State::raw(*x)).to_array()
}

/// One classical fourth-order Runge-Kutta step.
pub fn rk4_step(p: &ParamSet, x: &State, h: f64) -> State {
    let x0 = x.to_array();
    let k1 = field(p, &x0);
    let k2 = field(p, &axpy(&x0, h / 2.0, &[(1.0, &k1)]));
    let k3 = field(p, &axpy(&x0, h / 2.0, &[(1.0, &k2)]));
    let k4 = field(p, &axpy(&x0, h, &[(1.0, &k3)]));
    State::raw(axpy(
        &x0,
        h / 6.0,
        &[(1.0, &k1), (2.0, &k2), (2.0, &k3), (1.0, &k4)],
    ))
}

// Dormand-Prince 5(4) tableau. The system is autonomous, so the nodes c_i
// are not needed.
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
// difference between 5th- and 4th-order weights
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

const SAFETY: f64 = 0.9;
const MIN_FACTOR: f64 = 0.2;
const MAX_FACTOR: f64 = 5.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdaptiveStep {
    /// Fifth-order solution (only meaningful when `accepted`).
    pub state: State,
    /// Normalized error; the step is accepted iff this is <= 1.
    pub err: f64,
    pub h_next: f64,
    pub accepted: bool,
}

/// One embedded Dormand-Prince step with error scale
/// `abs_tol + rel_tol * max(|x|, |x_new|)` per component (RMS norm).
pub fn adaptive_step(p: &ParamSet, x: &State, h: f64, abs_tol: f64, rel_tol: f64) -> AdaptiveStep {
    let x0 = x.to_array();
    let k1 = field(p, &x0);
    let k2 = field(p, &axpy(&x0, h, &[(A21, &k1)]));
    let k3 = field(p, &axpy(&x0, h, &[(A31, &k1), (A32, &k2)]));
    let k4 = field(p, &axpy(&x0, h, &[(A41, &k1), (A42, &k2), (A43, &k3)]));
    let k5 = field(
        p,
        &axpy(&x0, h, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]),
    );
    let k6 = field(
        p,
        &axpy(
            &x0,
            h,
            &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)],
        ),
    );
    let x5 = axpy(
        &x0,
        h,
        &[(B1, &k1), (B3, &k3), (B4, &k4), (B5, &k5), (B6, &k6)],
    );
    let k7 = field(p, &x5);

    let mut sum = 0.0;
    for j in 0..3 {
        let e = h * (E1 * k1[j] + E3 * k3[j] + E4 * k4[j] + E5 * k5[j] + E6 * k6[j] + E7 * k7[j]);
        let scale = abs_tol + rel_tol * x0[j].abs().max(x5[j].abs());
        sum += (e / scale).powi(2);
    }
    let err = (sum / 3.0).sqrt();
    let factor = if err == 0.0 {
        MAX_FACTOR
    } else if err.is_finite() {
        (SAFETY * err.powf(-0.2)).clamp(MIN_FACTOR, MAX_FACTOR)
    } else {
        MIN_FACTOR
    };
    AdaptiveStep {
        state: State::raw(x5),
        err,
        h_next: h * factor,
        accepted: err <= 1.0,
    }
}

/// Integrates from `t = 0` to `opts.t_end`, recording the initial state,
/// every `record_stride`-th accepted step and the final state, which lands
/// exactly on `t_end`.
pub fn integrate(p: &ParamSet, x0: &State, opts: &IntegratorOptions) -> Result<Trajectory> {
    opts.validate()?;
    match opts.method {
        Method::FixedRK4 => integrate_rk4(p, x0, opts),
        Method::Adaptive54 => integrate_adaptive(p, x0, opts),
    }
}

struct Recorder {
    samples: Vec<Sample>,
    stride: usize,
}

impl Recorder {
    fn new(x0: &State, stride: usize) -> Self {
        Self {
            samples: vec![Sample { t: 0.0, state: *x0 }],
            stride,
        }
    }

    fn push(&mut self, step: usize, t: f64, state: State, last: bool) {
        if last || step.is_multiple_of(self.stride) {
            self.samples.push(Sample { t, state });
        }
    }
}

fn integrate_rk4(p: &ParamSet, x0: &State, opts: &IntegratorOptions) -> Result<Trajectory> {
    let h = opts.h_init;
    // number of steps; the last one is shortened to land on t_end
    let n = ((opts.t_end / h) * (1.0 - 1e-12)).ceil().max(1.0) as usize;
    if n > opts.max_steps {
        return Err(Error::MaxStepsExceeded {
            max_steps: opts.max_steps,
            t: 0.0,
        });
    }
    let mut rec = Recorder::new(x0, opts.record_stride);
    let mut x = *x0;
    let mut t = 0.0;
    for k in 1..=n {
        let t_next = if k == n { opts.t_end } else { k as f64 * h };
        let next = rk4_step(p, &x, t_next - t);
        if !next.is_finite() {
            return Err(Error::NonFiniteTrajectory { last_good_t: t });
        }
        x = next;
        t = t_next;
        rec.push(k, t, x, k == n);
    }
    Ok(Trajectory {
        params: *p,
        samples: rec.samples,
        meta: TrajectoryMeta {
            method: Method::FixedRK4,
            accepted_steps: n,
            rejected_steps: 0,
        },
    })
}

fn integrate_adaptive(p: &ParamSet, x0: &State, opts: &IntegratorOptions) -> Result<Trajectory> {
    let t_end = opts.t_end;
    let h_min = 1e-12 * t_end;
    let mut rec = Recorder::new(x0, opts.record_stride);
    let mut x = *x0;
    let mut t = 0.0;
    let mut h = opts.h_init;
    let mut accepted = 0usize;
    let mut rejected = 0usize;

    while t < t_end {
        if accepted + rejected >= opts.max_steps {
            return Err(Error::MaxStepsExceeded {
                max_steps: opts.max_steps,
                t,
            });
        }
        // land exactly on t_end; also absorb a sliver that would leave a
        // sub-h_min final step
        let last = t + h >= t_end - h_min;
        let h_try = if last { t_end - t } else { h };
        let step = adaptive_step(p, &x, h_try, opts.abs_tol, opts.rel_tol);
        if step.accepted && step.state.is_finite() {
            accepted += 1;
            x = step.state;
            t = if last { t_end } else { t + h_try };
            rec.push(accepted, t, x, last);
            h = step.h_next;
        } else {
            rejected += 1;
            h = step.h_next;
            if h < h_min {
                return Err(if step.err.is_finite() {
                    Error::StepUnderflow { t, h }
                } else {
                    Error::NonFiniteTrajectory { last_good_t: t }
                });
            }
        }
    }
    Ok(Trajectory {
        params: *p,
        samples: rec.samples,
        meta: TrajectoryMeta {
            method: Method::Adaptive54,
            accepted_steps: accepted,
            rejected_steps: rejected,
        },
    })
}

/// Integrates several initial conditions in parallel. Results are returned
/// in input order.
pub fn integrate_many(
    p: &ParamSet,
    initial: &[State],
    opts: &IntegratorOptions,
) -> Vec<Result<Trajectory>> {
    use rayon::prelude::*;
    initial
        .par_iter()
        .map(|x0| integrate(p, x0, opts))
        .collect()
}
