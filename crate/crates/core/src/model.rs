//! Model equations, closed-form equilibria and the dissipativity certificate.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Row-major 3x3 real matrix.
pub type Matrix3 = [[f64; 3]; 3];

/// Residual bound for closed-form equilibria (max-norm of the vector field).
pub const EQUILIBRIUM_RESIDUAL_TOL: f64 = 1e-12;

/// Model parameters `(sigma, r0, beta)`, all strictly positive.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawParams")]
pub struct ParamSet {
    sigma: f64,
    r0: f64,
    beta: f64,
}

#[derive(Deserialize)]
struct RawParams {
    sigma: f64,
    r0: f64,
    beta: f64,
}

impl TryFrom<RawParams> for ParamSet {
    type Error = Error;

    fn try_from(raw: RawParams) -> Result<Self> {
        ParamSet::new(raw.sigma, raw.r0, raw.beta)
    }
}

fn check_positive(name: &'static str, value: f64) -> Result<f64> {
    if value.is_finite() && value > 0.0 {
        Ok(value)
    } else {
        Err(Error::InvalidParameter { name, value })
    }
}

impl ParamSet {
    pub fn new(sigma: f64, r0: f64, beta: f64) -> Result<Self> {
        Ok(Self {
            sigma: check_positive("sigma", sigma)?,
            r0: check_positive("r0", r0)?,
            beta: check_positive("beta", beta)?,
        })
    }

    /// Behavioural adjustment rate.
    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    /// Infection potential (the bifurcation parameter).
    pub fn r0(&self) -> f64 {
        self.r0
    }

    /// Memory decay rate.
    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// Same `sigma` and `beta` with a different infection potential.
    pub fn with_r0(&self, r0: f64) -> Result<Self> {
        Self::new(self.sigma, r0, self.beta)
    }

    /// Trace of the Jacobian, identical at every state: `-(sigma + 1 + beta)`.
    pub fn divergence(&self) -> f64 {
        -(self.sigma + 1.0 + self.beta)
    }
}

/// A point `(T, I, M)` in phase space. Components are always finite.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(into = "[f64; 3]", try_from = "[f64; 3]")]
pub struct State {
    t: f64,
    i: f64,
    m: f64,
}

impl State {
    pub const ORIGIN: State = State {
        t: 0.0,
        i: 0.0,
        m: 0.0,
    };

    pub fn new(transmission: f64, perception: f64, memory: f64) -> Result<Self> {
        for (name, value) in [("T", transmission), ("I", perception), ("M", memory)] {
            if !value.is_finite() {
                return Err(Error::NonFiniteState { name, value });
            }
        }
        Ok(Self::raw([transmission, perception, memory]))
    }

    /// Builds a state without the finiteness check; callers check
    /// [`State::is_finite`] where it matters.
    pub(crate) fn raw(x: [f64; 3]) -> Self {
        Self {
            t: x[0],
            i: x[1],
            m: x[2],
        }
    }

    /// Social transmission intensity `T`.
    pub fn transmission(&self) -> f64 {
        self.t
    }

    /// Perceived infection `I`.
    pub fn perception(&self) -> f64 {
        self.i
    }

    /// Social memory `M`.
    pub fn memory(&self) -> f64 {
        self.m
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.t, self.i, self.m]
    }

    pub fn is_finite(&self) -> bool {
        self.t.is_finite() && self.i.is_finite() && self.m.is_finite()
    }

    pub fn max_norm(&self) -> f64 {
        self.t.abs().max(self.i.abs()).max(self.m.abs())
    }

    pub fn norm(&self) -> f64 {
        (self.t * self.t + self.i * self.i + self.m * self.m).sqrt()
    }

    /// Max-norm distance to another state.
    pub fn distance_max(&self, other: &State) -> f64 {
        (self.t - other.t)
            .abs()
            .max((self.i - other.i).abs())
            .max((self.m - other.m).abs())
    }
}

impl From<State> for [f64; 3] {
    fn from(s: State) -> Self {
        s.to_array()
    }
}

impl TryFrom<[f64; 3]> for State {
    type Error = Error;

    fn try_from(x: [f64; 3]) -> Result<Self> {
        State::new(x[0], x[1], x[2])
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Branch {
    P0,
    PePlus,
    PeMinus,
}

impl Branch {
    pub fn as_str(&self) -> &'static str {
        match self {
            Branch::P0 => "P0",
            Branch::PePlus => "PePlus",
            Branch::PeMinus => "PeMinus",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Equilibrium {
    pub branch: Branch,
    pub point: State,
}

/// Monic cubic `l^3 + a1 l^2 + a2 l + a3`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CubicCoeffs {
    pub a1: f64,
    pub a2: f64,
    pub a3: f64,
}

impl CubicCoeffs {
    pub fn new(a1: f64, a2: f64, a3: f64) -> Self {
        Self { a1, a2, a3 }
    }
}

/// Absorbing ball `{V <= radius_sq}` for `V = T^2 + I^2 + (M - center_m)^2`,
/// from the bound `dV/dt <= -decay_m V + offset_c`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AbsorbingBall {
    pub center_m: f64,
    pub radius_sq: f64,
    pub decay_m: f64,
    pub offset_c: f64,
}

impl AbsorbingBall {
    pub fn contains(&self, p: &ParamSet, x: &State) -> bool {
        lyapunov_v(p, x) <= self.radius_sq
    }
}

/// Right-hand side `(sigma (I - T), T (r0 - M) - I, T I - beta M)`.
pub fn vector_field(p: &ParamSet, x: &State) -> State {
    State::raw([
        p.sigma * (x.i - x.t),
        x.t * (p.r0 - x.m) - x.i,
        x.t * x.i - p.beta * x.m,
    ])
}

pub fn jacobian(p: &ParamSet, x: &State) -> Matrix3 {
    [
        [-p.sigma, p.sigma, 0.0],
        [p.r0 - x.m, -1.0, -x.t],
        [x.i, x.t, -p.beta],
    ]
}

/// Amplitude `sqrt(beta (r0 - 1))` of the symmetric pair; zero for `r0 <= 1`.
pub fn pitchfork_amplitude(p: &ParamSet) -> f64 {
    if p.r0 > 1.0 {
        (p.beta * (p.r0 - 1.0)).sqrt()
    } else {
        0.0
    }
}

/// Equilibria in the fixed order `[P0, PePlus, PeMinus]`. The symmetric pair
/// is only returned for `r0 > 1`; at `r0 = 1` it coincides with the origin.
pub fn equilibria(p: &ParamSet) -> Vec<Equilibrium> {
    let mut out = vec![Equilibrium {
        branch: Branch::P0,
        point: State::ORIGIN,
    }];
    if p.r0 > 1.0 {
        let alpha = pitchfork_amplitude(p);
        let m = p.r0 - 1.0;
        out.push(Equilibrium {
            branch: Branch::PePlus,
            point: State::raw([alpha, alpha, m]),
        });
        out.push(Equilibrium {
            branch: Branch::PeMinus,
            point: State::raw([-alpha, -alpha, m]),
        });
    }
    out
}

/// Characteristic polynomial of the Jacobian at either nontrivial equilibrium.
pub fn char_coeffs_nontrivial(p: &ParamSet) -> Result<CubicCoeffs> {
    if p.r0 <= 1.0 {
        return Err(Error::BranchAbsent { r0: p.r0 });
    }
    Ok(CubicCoeffs {
        a1: p.sigma + p.beta + 1.0,
        a2: p.beta * (p.sigma + p.r0),
        a3: 2.0 * p.beta * p.sigma * (p.r0 - 1.0),
    })
}

/// Characteristic polynomial `det(l I - J)` of the Jacobian at the origin.
pub fn char_coeffs_origin(p: &ParamSet) -> CubicCoeffs {
    // (l + beta)(l^2 + (sigma + 1) l + sigma (1 - r0))
    let b1 = p.sigma + 1.0;
    let b0 = p.sigma * (1.0 - p.r0);
    CubicCoeffs {
        a1: b1 + p.beta,
        a2: b0 + p.beta * b1,
        a3: p.beta * b0,
    }
}

/// Hopf threshold `sigma (sigma + beta + 3) / (sigma - beta - 1)`, defined
/// only when `sigma > beta + 1`.
pub fn hopf_threshold(p: &ParamSet) -> Option<f64> {
    let denom = p.sigma - p.beta - 1.0;
    (denom > 0.0).then(|| p.sigma * (p.sigma + p.beta + 3.0) / denom)
}

/// `V = T^2 + I^2 + (M - a)^2` with `a = sigma + r0`.
pub fn lyapunov_v(p: &ParamSet, x: &State) -> f64 {
    let dm = x.m - (p.sigma + p.r0);
    x.t * x.t + x.i * x.i + dm * dm
}

/// Derivative of [`lyapunov_v`] along the flow:
/// `-2 sigma T^2 - 2 I^2 - 2 beta M (M - a)`.
pub fn lyapunov_v_dot(p: &ParamSet, x: &State) -> f64 {
    let a = p.sigma + p.r0;
    -2.0 * p.sigma * x.t * x.t - 2.0 * x.i * x.i - 2.0 * p.beta * x.m * (x.m - a)
}

pub fn absorbing_ball(p: &ParamSet) -> AbsorbingBall {
    let a = p.sigma + p.r0;
    let decay_m = (2.0 * p.sigma).min(2.0).min(p.beta);
    let offset_c = p.beta * a * a;
    AbsorbingBall {
        center_m: a,
        radius_sq: offset_c / decay_m,
        decay_m,
        offset_c,
    }
}

/// The Z2 symmetry `(T, I, M) -> (-T, -I, M)`.
pub fn symmetry_map(x: &State) -> State {
    State::raw([-x.t, -x.i, x.m])
}
