//! Lyapunov exponents.
//!
//! The full spectrum is estimated with the tangent-space (Benettin) method:
//! the state is integrated together with three tangent vectors under the
//! variational equation `dv/dt = J(x(t)) v`, and the tangent frame is
//! re-orthonormalized with modified Gram-Schmidt every `renorm_dt`. The
//! exponents are the time averages of the logarithmic stretch factors.
//!
//! The largest exponent has a second, independent estimator that never
//! touches the Jacobian: a reference and a perturbed trajectory are
//! integrated with the nonlinear flow, their separation is rescaled every
//! `renorm_dt`, and the exponent is the least-squares slope of the
//! accumulated log-stretch against time.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::integrate::rk4_step;
use crate::model::{jacobian, vector_field, ParamSet, State};

/// `lambda1` above this is reported as chaotic.
pub const CHAOS_THRESHOLD: f64 = 0.05;

/// Relative drift of the estimates over the last quarter of the run that
/// triggers a convergence warning.
const DRIFT_WARNING: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LyapunovOptions {
    /// Averaging time after the transient.
    pub horizon: f64,
    pub renorm_dt: f64,
    /// Time integrated and discarded before averaging starts.
    pub transient: f64,
    /// RK4 step size; rounded down so that it divides `renorm_dt`.
    pub h: f64,
}

impl Default for LyapunovOptions {
    fn default() -> Self {
        Self {
            horizon: 1000.0,
            renorm_dt: 0.5,
            transient: 50.0,
            h: 0.01,
        }
    }
}

impl LyapunovOptions {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidInput(msg));
        if !(self.renorm_dt.is_finite() && self.renorm_dt > 0.0) {
            return bad(format!(
                "renorm_dt must be positive, got {}",
                self.renorm_dt
            ));
        }
        if !(self.horizon.is_finite() && self.horizon >= 100.0 * self.renorm_dt) {
            return bad(format!(
                "horizon {} must be at least 100 * renorm_dt = {}",
                self.horizon,
                100.0 * self.renorm_dt
            ));
        }
        if !(self.transient.is_finite() && self.transient >= 0.0) {
            return bad(format!("transient must be >= 0, got {}", self.transient));
        }
        if !(self.h.is_finite() && self.h > 0.0 && self.h <= self.renorm_dt) {
            return bad(format!(
                "step h = {} must lie in (0, renorm_dt = {}]",
                self.h, self.renorm_dt
            ));
        }
        Ok(())
    }

    fn steps_per_renorm(&self) -> usize {
        (self.renorm_dt / self.h).ceil().max(1.0) as usize
    }

    fn renorm_count(&self) -> usize {
        (self.horizon / self.renorm_dt).round().max(1.0) as usize
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ChaosLabel {
    Chaotic,
    Inconclusive,
    NonChaotic,
}

impl ChaosLabel {
    pub fn from_lambda1(lambda1: f64) -> Self {
        if lambda1 > CHAOS_THRESHOLD {
            ChaosLabel::Chaotic
        } else if lambda1 >= -CHAOS_THRESHOLD {
            ChaosLabel::Inconclusive
        } else {
            ChaosLabel::NonChaotic
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            ChaosLabel::Chaotic => "chaotic",
            ChaosLabel::Inconclusive => "inconclusive",
            ChaosLabel::NonChaotic => "non-chaotic",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LyapunovResult {
    /// Sorted descending.
    pub exponents: [f64; 3],
    pub sum: f64,
    /// Averaging time actually used.
    pub horizon: f64,
    pub renorm_interval: f64,
    pub transient_discarded: f64,
    pub warnings: Vec<String>,
}

impl LyapunovResult {
    /// `|sum - tr J| / |tr J|`; the trace is constant, so the exponents must
    /// sum to it.
    pub fn trace_identity_residual(&self, p: &ParamSet) -> f64 {
        let tr = p.divergence();
        ((self.sum - tr) / tr).abs()
    }

    pub fn chaos_label(&self) -> ChaosLabel {
        ChaosLabel::from_lambda1(self.exponents[0])
    }
}

type Frame = [[f64; 3]; 3];

#[derive(Clone, Copy)]
struct Augmented {
    x: [f64; 3],
    // frame[k] is the k-th tangent vector
    frame: Frame,
}

fn aug_derivative(p: &ParamSet, s: &Augmented) -> Augmented {
    let state = State::raw(s.x);
    let j = jacobian(p, &state);
    let mut frame = [[0.0; 3]; 3];
    for (out, v) in frame.iter_mut().zip(&s.frame) {
        for r in 0..3 {
            out[r] = j[r][0] * v[0] + j[r][1] * v[1] + j[r][2] * v[2];
        }
    }
    Augmented {
        x: vector_field(p, &state).to_array(),
        frame,
    }
}

fn aug_axpy(s: &Augmented, h: f64, d: &Augmented) -> Augmented {
    let mut out = *s;
    for r in 0..3 {
        out.x[r] += h * d.x[r];
        for k in 0..3 {
            out.frame[k][r] += h * d.frame[k][r];
        }
    }
    out
}

fn aug_rk4(p: &ParamSet, s: &Augmented, h: f64) -> Augmented {
    let k1 = aug_derivative(p, s);
    let k2 = aug_derivative(p, &aug_axpy(s, h / 2.0, &k1));
    let k3 = aug_derivative(p, &aug_axpy(s, h / 2.0, &k2));
    let k4 = aug_derivative(p, &aug_axpy(s, h, &k3));
    let mut out = *s;
    for r in 0..3 {
        out.x[r] += h / 6.0 * (k1.x[r] + 2.0 * k2.x[r] + 2.0 * k3.x[r] + k4.x[r]);
        for k in 0..3 {
            out.frame[k][r] += h / 6.0
                * (k1.frame[k][r] + 2.0 * k2.frame[k][r] + 2.0 * k3.frame[k][r] + k4.frame[k][r]);
        }
    }
    out
}

fn dot(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

/// Modified Gram-Schmidt in place; returns the log of each stretch factor.
fn orthonormalize(frame: &mut Frame) -> [f64; 3] {
    let mut logs = [0.0; 3];
    for k in 0..3 {
        for j in 0..k {
            let proj = dot(&frame[k], &frame[j]);
            let basis = frame[j];
            for (c, b) in frame[k].iter_mut().zip(basis) {
                *c -= proj * b;
            }
        }
        let norm = dot(&frame[k], &frame[k]).sqrt();
        logs[k] = norm.ln();
        for c in frame[k].iter_mut() {
            *c /= norm;
        }
    }
    logs
}

/// Fixed orthonormal frame in general position. The coordinate axes are not
/// usable: at the origin the Jacobian leaves the `(T, I)` plane and the `M`
/// axis invariant, which would pin the frame to the wrong ordering.
fn initial_frame() -> Frame {
    let mut frame = [[1.0, 0.3, 0.2], [-0.4, 1.0, 0.5], [0.3, -0.6, 1.0]];
    orthonormalize(&mut frame);
    frame
}

fn run_transient(p: &ParamSet, x0: &State, opts: &LyapunovOptions) -> Result<State> {
    let n = (opts.transient / opts.h).ceil() as usize;
    let mut x = *x0;
    let mut t = 0.0;
    for _ in 0..n {
        let next = rk4_step(p, &x, opts.h);
        if !next.is_finite() {
            return Err(Error::NonFiniteTrajectory { last_good_t: t });
        }
        x = next;
        t += opts.h;
    }
    Ok(x)
}

/// Full Lyapunov spectrum from `x0` by the tangent-space method.
pub fn lyapunov_spectrum(
    p: &ParamSet,
    x0: &State,
    opts: &LyapunovOptions,
) -> Result<LyapunovResult> {
    opts.validate()?;
    let start = run_transient(p, x0, opts)?;
    let steps = opts.steps_per_renorm();
    let h = opts.renorm_dt / steps as f64;
    let n_renorm = opts.renorm_count();
    let checkpoint = (3 * n_renorm) / 4;

    let mut s = Augmented {
        x: start.to_array(),
        frame: initial_frame(),
    };
    let mut log_sums = [0.0; 3];
    let mut at_checkpoint = [0.0; 3];
    for k in 1..=n_renorm {
        for _ in 0..steps {
            s = aug_rk4(p, &s, h);
        }
        let logs = orthonormalize(&mut s.frame);
        if !(s.x.iter().all(|v| v.is_finite()) && logs.iter().all(|v| v.is_finite())) {
            return Err(Error::NonFiniteTrajectory {
                last_good_t: opts.transient + (k - 1) as f64 * opts.renorm_dt,
            });
        }
        for (acc, l) in log_sums.iter_mut().zip(logs) {
            *acc += l;
        }
        if k == checkpoint {
            at_checkpoint = log_sums.map(|v| v / (k as f64 * opts.renorm_dt));
        }
    }

    let horizon = n_renorm as f64 * opts.renorm_dt;
    let mut exponents = log_sums.map(|v| v / horizon);
    let mut warnings = Vec::new();
    if checkpoint > 0 {
        let scale = exponents.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        for (i, (now, then)) in exponents.iter().zip(at_checkpoint).enumerate() {
            let drift = (now - then).abs();
            if scale > 0.0 && drift > DRIFT_WARNING * scale {
                warnings.push(format!(
                    "exponent {} drifted by {:.3e} over the last quarter (estimate {:.6})",
                    i + 1,
                    drift,
                    now
                ));
            }
        }
    }
    exponents.sort_by(|a, b| b.total_cmp(a));
    Ok(LyapunovResult {
        exponents,
        sum: exponents.iter().sum(),
        horizon,
        renorm_interval: opts.renorm_dt,
        transient_discarded: opts.transient,
        warnings,
    })
}

/// Largest exponent from the divergence of two nearby trajectories,
/// initially `d0` apart, with rescaling every `renorm_dt`.
pub fn largest_exponent_two_trajectory(
    p: &ParamSet,
    x0: &State,
    opts: &LyapunovOptions,
    d0: f64,
) -> Result<f64> {
    opts.validate()?;
    if !(d0.is_finite() && d0 > 0.0) {
        return Err(Error::InvalidInput(format!(
            "d0 must be positive, got {d0}"
        )));
    }
    let mut x = run_transient(p, x0, opts)?;
    let offset = d0 / 3f64.sqrt();
    let mut y = State::raw(x.to_array().map(|v| v + offset));
    let steps = opts.steps_per_renorm();
    let h = opts.renorm_dt / steps as f64;
    let n_renorm = opts.renorm_count();

    // least-squares fit of cumulative log-stretch against time; the start
    // point (0, 0) is included, its sums are all zero
    let (mut st, mut ss, mut stt, mut sts) = (0.0, 0.0, 0.0, 0.0);
    let mut cumulative = 0.0;
    let n_points = (n_renorm + 1) as f64;
    for k in 1..=n_renorm {
        for _ in 0..steps {
            x = rk4_step(p, &x, h);
            y = rk4_step(p, &y, h);
        }
        let diff = [
            y.transmission() - x.transmission(),
            y.perception() - x.perception(),
            y.memory() - x.memory(),
        ];
        let d = dot(&diff, &diff).sqrt();
        if !(d.is_finite() && x.is_finite() && d > 0.0) {
            return Err(Error::NonFiniteTrajectory {
                last_good_t: opts.transient + (k - 1) as f64 * opts.renorm_dt,
            });
        }
        cumulative += (d / d0).ln();
        let xa = x.to_array();
        y = State::raw([0, 1, 2].map(|j| xa[j] + diff[j] * d0 / d));

        let t = k as f64 * opts.renorm_dt;
        st += t;
        ss += cumulative;
        stt += t * t;
        sts += t * cumulative;
    }
    let mean_t = st / n_points;
    let mean_s = ss / n_points;
    Ok((sts / n_points - mean_t * mean_s) / (stt / n_points - mean_t * mean_t))
}
