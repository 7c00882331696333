//! Basins of the two mirror equilibria in the bistable regime.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::integrate::{integrate, IntegratorOptions};
use crate::model::{equilibria, hopf_threshold, ParamSet, State};

/// Max-norm distance from an equilibrium that counts as converged.
pub const BASIN_TOL: f64 = 1e-3;
pub const DEFAULT_BASIN_T_END: f64 = 200.0;
const BASIN_STEP: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BasinLabel {
    PePlus,
    PeMinus,
    Unresolved,
}

impl BasinLabel {
    pub fn mirrored(self) -> Self {
        match self {
            BasinLabel::PePlus => BasinLabel::PeMinus,
            BasinLabel::PeMinus => BasinLabel::PePlus,
            BasinLabel::Unresolved => BasinLabel::Unresolved,
        }
    }
}

/// Rectangular grid of initial conditions in the `(T, I)` plane at fixed `M`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub t_range: (f64, f64),
    pub i_range: (f64, f64),
    /// Points per axis (each >= 2, or 1 for a single value at the range start).
    pub t_points: usize,
    pub i_points: usize,
    pub m0: f64,
}

impl GridSpec {
    pub fn square(half_width: f64, points: usize, m0: f64) -> Self {
        Self {
            t_range: (-half_width, half_width),
            i_range: (-half_width, half_width),
            t_points: points,
            i_points: points,
            m0,
        }
    }

    fn axis(range: (f64, f64), n: usize) -> Vec<f64> {
        if n == 1 {
            return vec![range.0];
        }
        (0..n)
            .map(|k| range.0 + (range.1 - range.0) * k as f64 / (n - 1) as f64)
            .collect()
    }

    /// Row-major points: `I` varies slowest, `T` fastest.
    pub fn points(&self) -> Result<Vec<State>> {
        if self.t_points == 0 || self.i_points == 0 {
            return Err(Error::InvalidInput(
                "basin grid needs at least one point per axis".into(),
            ));
        }
        let ts = Self::axis(self.t_range, self.t_points);
        let is = Self::axis(self.i_range, self.i_points);
        is.iter()
            .flat_map(|&i| ts.iter().map(move |&t| State::new(t, i, self.m0)))
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BasinPoint {
    pub initial: State,
    pub label: BasinLabel,
}

fn check_bistable(p: &ParamSet) -> Result<()> {
    let r0 = p.r0();
    let ok = r0 > 1.0 && hopf_threshold(p).is_none_or(|rh| r0 < rh);
    if ok {
        Ok(())
    } else {
        Err(Error::OutsideBistableRegime(format!(
            "r0 = {r0} with hopf threshold {:?}",
            hopf_threshold(p)
        )))
    }
}

/// Integrates `x0` to `t_end` with fixed-step RK4 and names the mirror
/// equilibrium it ends near.
pub fn classify_initial_condition(p: &ParamSet, x0: &State, t_end: f64) -> Result<BasinLabel> {
    check_bistable(p)?;
    label_final_state(p, x0, t_end)
}

fn label_final_state(p: &ParamSet, x0: &State, t_end: f64) -> Result<BasinLabel> {
    let opts = IntegratorOptions::fixed_rk4(BASIN_STEP.min(t_end), t_end).with_stride(usize::MAX);
    let end = integrate(p, x0, &opts)?.final_state();
    let eq = equilibria(p);
    Ok(if end.distance_max(&eq[1].point) < BASIN_TOL {
        BasinLabel::PePlus
    } else if end.distance_max(&eq[2].point) < BASIN_TOL {
        BasinLabel::PeMinus
    } else {
        BasinLabel::Unresolved
    })
}

/// Labels every grid initial condition; results follow [`GridSpec::points`]
/// order.
pub fn basin_sample(p: &ParamSet, grid: &GridSpec, t_end: f64) -> Result<Vec<BasinPoint>> {
    check_bistable(p)?;
    grid.points()?
        .par_iter()
        .map(|x0| {
            Ok(BasinPoint {
                initial: *x0,
                label: label_final_state(p, x0, t_end)?,
            })
        })
        .collect()
}
