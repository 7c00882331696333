use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter {name} = {value}: must be finite and > 0")]
    InvalidParameter { name: &'static str, value: f64 },

    #[error("non-finite state component {name} = {value}")]
    NonFiniteState { name: &'static str, value: f64 },

    #[error("nontrivial equilibria do not exist for r0 = {r0} (requires r0 > 1)")]
    BranchAbsent { r0: f64 },

    #[error("invalid integrator options: {0}")]
    InvalidOptions(String),

    #[error("step size underflow at t = {t} (h = {h})")]
    StepUnderflow { t: f64, h: f64 },

    #[error("maximum number of steps ({max_steps}) exceeded at t = {t}")]
    MaxStepsExceeded { max_steps: usize, t: f64 },

    #[error("non-finite state encountered; last good time t = {last_good_t}")]
    NonFiniteTrajectory { last_good_t: f64 },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("parameters outside the bistable regime: {0}")]
    OutsideBistableRegime(String),

    #[error("internal consistency check failed: {0}")]
    Inconsistent(String),
}
