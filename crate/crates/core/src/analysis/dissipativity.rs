//! Direct check of the dissipation inequality `dV/dt <= -m V + c` on random
//! states around the absorbing ball.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{absorbing_ball, lyapunov_v, lyapunov_v_dot, AbsorbingBall, ParamSet, State};

/// Absolute slack allowed for rounding in `dV/dt + m V - c <= 0`.
pub const AUDIT_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DissipativityReport {
    pub n_samples: usize,
    pub seed: u64,
    pub ball: AbsorbingBall,
    pub violations: usize,
    /// Largest observed `dV/dt - (-m V + c)`; non-positive when the bound holds.
    pub max_slack: f64,
    pub worst_state: State,
}

impl DissipativityReport {
    pub fn passed(&self) -> bool {
        self.violations == 0
    }
}

/// `dV/dt - (-m V + c)` at `x`.
pub fn dissipation_slack(p: &ParamSet, ball: &AbsorbingBall, x: &State) -> f64 {
    lyapunov_v_dot(p, x) + ball.decay_m * lyapunov_v(p, x) - ball.offset_c
}

/// Samples `n_samples` states uniformly from the cube of half-width `2R`
/// centred on `(0, 0, sigma + r0)` and counts violations of the bound.
pub fn dissipativity_audit(
    p: &ParamSet,
    n_samples: usize,
    seed: u64,
) -> Result<DissipativityReport> {
    if n_samples == 0 {
        return Err(Error::InvalidInput("n_samples must be >= 1".into()));
    }
    let ball = absorbing_ball(p);
    let half = 2.0 * ball.radius_sq.sqrt();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let mut violations = 0;
    let mut max_slack = f64::NEG_INFINITY;
    let mut worst_state = State::ORIGIN;
    for _ in 0..n_samples {
        let x = State::raw([
            rng.gen_range(-half..=half),
            rng.gen_range(-half..=half),
            ball.center_m + rng.gen_range(-half..=half),
        ]);
        let slack = dissipation_slack(p, &ball, &x);
        if slack > AUDIT_TOL {
            violations += 1;
        }
        if slack > max_slack {
            max_slack = slack;
            worst_state = x;
        }
    }
    Ok(DissipativityReport {
        n_samples,
        seed,
        ball,
        violations,
        max_slack,
        worst_state,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn centre_of_ball() {
        let p = ParamSet::new(10.0, 28.0, 8.0 / 3.0).unwrap();
        let ball = absorbing_ball(&p);
        let centre = State::new(0.0, 0.0, ball.center_m).unwrap();
        assert_eq!(lyapunov_v(&p, &centre), 0.0);
        assert_eq!(lyapunov_v_dot(&p, &centre), 0.0);
        assert!(dissipation_slack(&p, &ball, &centre) <= 0.0);
    }

    #[test]
    fn lorenz_audit_is_clean() {
        let p = ParamSet::new(10.0, 28.0, 8.0 / 3.0).unwrap();
        let rep = dissipativity_audit(&p, 100_000, 42).unwrap();
        assert!(rep.passed(), "{rep:?}");
        assert!(rep.max_slack <= AUDIT_TOL);
    }

    #[test]
    fn audit_is_seed_deterministic() {
        let p = ParamSet::new(1.5, 3.0, 0.7).unwrap();
        assert_eq!(
            dissipativity_audit(&p, 1000, 7).unwrap(),
            dissipativity_audit(&p, 1000, 7).unwrap()
        );
        assert_ne!(
            dissipativity_audit(&p, 1000, 7).unwrap().worst_state,
            dissipativity_audit(&p, 1000, 8).unwrap().worst_state
        );
    }

    #[test]
    fn zero_samples_rejected() {
        let p = ParamSet::new(1.0, 1.0, 1.0).unwrap();
        assert!(dissipativity_audit(&p, 0, 1).is_err());
    }

    #[test]
    fn v_dot_non_positive_on_the_boundary_sphere() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for p in [
            ParamSet::new(10.0, 28.0, 8.0 / 3.0).unwrap(),
            ParamSet::new(0.5, 1.0, 3.0).unwrap(),
            ParamSet::new(2.0, 0.5, 1.0).unwrap(),
        ] {
            let ball = absorbing_ball(&p);
            let r = ball.radius_sq.sqrt();
            for _ in 0..10_000 {
                let v: [f64; 3] = [0; 3].map(|_| rng.gen_range(-1.0..1.0));
                let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
                let x = State::raw([r * v[0] / n, r * v[1] / n, ball.center_m + r * v[2] / n]);
                let vd = lyapunov_v_dot(&p, &x);
                assert!(vd <= 1e-9 * ball.offset_c.max(1.0), "{vd} at {x:?}");
            }
        }
    }
}
