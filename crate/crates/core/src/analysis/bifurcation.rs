//! Closed-form bifurcation scan over `r0` and Hopf diagnostics.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{
    char_coeffs_nontrivial, equilibria, hopf_threshold, pitchfork_amplitude, ParamSet,
};
use crate::stability::{classify_equilibrium, Label, TOL_RH};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Regime {
    /// `r0 < 1`: only the origin, a global attractor.
    InactiveStable,
    /// `1 < r0 < r_H`: two stable mirror equilibria.
    Bistable,
    /// `r0 > r_H`: all equilibria unstable.
    PostHopf,
    PitchforkPoint,
    HopfPoint,
    /// `r0 > 1` with `sigma <= beta + 1`: no Hopf threshold exists.
    NoHopfBranch,
}

impl Regime {
    pub fn as_str(&self) -> &'static str {
        match self {
            Regime::InactiveStable => "InactiveStable",
            Regime::Bistable => "Bistable",
            Regime::PostHopf => "PostHopf",
            Regime::PitchforkPoint => "PitchforkPoint",
            Regime::HopfPoint => "HopfPoint",
            Regime::NoHopfBranch => "NoHopfBranch",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegimeRecord {
    pub r0: f64,
    pub equilibria_count: usize,
    pub p0_label: Label,
    /// Shared label of the mirror pair; absent for `r0 <= 1`.
    pub pe_label: Option<Label>,
    /// `a1 a2 - a3` of the nontrivial branch; absent for `r0 <= 1`.
    pub delta_rh: Option<f64>,
    pub alpha: f64,
    pub regime: Regime,
    /// Inserted at an exact threshold rather than taken from the grid.
    pub synthetic: bool,
}

/// Routh-Hurwitz margin `a1 a2 - a3` of the nontrivial branch at `r0_query`,
/// with `sigma` and `beta` taken from `p`.
pub fn delta_rh(p: &ParamSet, r0_query: f64) -> Result<f64> {
    let c = char_coeffs_nontrivial(&p.with_r0(r0_query)?)?;
    Ok(c.a1 * c.a2 - c.a3)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HopfReport {
    pub r_h: f64,
    /// Crossing frequency `sqrt(a2(r_H))`.
    pub omega: f64,
    /// `d(delta_rh)/d(r0) = beta (beta + 1 - sigma)`, negative when it exists.
    pub transversality: f64,
}

pub fn hopf_report(p: &ParamSet) -> Option<HopfReport> {
    let r_h = hopf_threshold(p)?;
    let (s, b) = (p.sigma(), p.beta());
    Some(HopfReport {
        r_h,
        omega: (b * (s + r_h)).sqrt(),
        transversality: b * (b + 1.0 - s),
    })
}

/// Closed-form regime record at a single `r0`.
pub fn regime_record(p_base: &ParamSet, r0: f64) -> Result<RegimeRecord> {
    regime_record_inner(p_base, r0, false)
}

fn regime_record_inner(p_base: &ParamSet, r0: f64, synthetic: bool) -> Result<RegimeRecord> {
    let p = p_base.with_r0(r0)?;
    let eq = equilibria(&p);
    let p0_label = classify_equilibrium(&p, &eq[0])?.label;
    let pe_label = match eq.get(1) {
        Some(e) => Some(classify_equilibrium(&p, e)?.label),
        None => None,
    };
    let (delta, band) = if r0 > 1.0 {
        let c = char_coeffs_nontrivial(&p)?;
        (
            Some(c.a1 * c.a2 - c.a3),
            TOL_RH * (1.0 + (c.a1 * c.a2).abs()),
        )
    } else {
        (None, 0.0)
    };

    let regime = if r0 < 1.0 {
        Regime::InactiveStable
    } else if r0 == 1.0 {
        Regime::PitchforkPoint
    } else {
        match hopf_threshold(&p) {
            None => Regime::NoHopfBranch,
            Some(rh) if r0 == rh => Regime::HopfPoint,
            Some(rh) if r0 < rh => Regime::Bistable,
            Some(_) => Regime::PostHopf,
        }
    };

    let record = RegimeRecord {
        r0,
        equilibria_count: eq.len(),
        p0_label,
        pe_label,
        delta_rh: delta,
        alpha: pitchfork_amplitude(&p),
        regime,
        synthetic,
    };
    check_record(&record, band)?;
    Ok(record)
}

fn check_record(rec: &RegimeRecord, band: f64) -> Result<()> {
    let pe_stable = rec.pe_label.map(|l| !l.is_unstable()).unwrap_or(true);
    let pe_unstable = rec.pe_label.map(|l| !l.is_stable()).unwrap_or(true);
    let d = rec.delta_rh.unwrap_or(0.0);
    let ok = match rec.regime {
        Regime::InactiveStable => rec.equilibria_count == 1 && rec.p0_label.is_stable(),
        Regime::Bistable | Regime::NoHopfBranch => {
            rec.equilibria_count == 3 && rec.p0_label.is_unstable() && pe_stable && d > -band
        }
        Regime::PostHopf => rec.equilibria_count == 3 && pe_unstable && d < band,
        Regime::HopfPoint => d.abs() <= band.max(1e-9),
        Regime::PitchforkPoint => rec.equilibria_count == 1,
    };
    if ok {
        Ok(())
    } else {
        Err(Error::Inconsistent(format!(
            "regime {} inconsistent with its sign tests: {rec:?}",
            rec.regime.as_str()
        )))
    }
}

/// One record per grid point from closed-form tests, plus synthetic records
/// at `r0 = 1` and `r0 = r_H` when they fall strictly inside the grid span.
///
/// The sign change of `delta_rh` along the grid is checked against the
/// closed-form Hopf threshold.
pub fn bifurcation_scan(p_base: &ParamSet, r0_grid: &[f64]) -> Result<Vec<RegimeRecord>> {
    if r0_grid.is_empty() {
        return Err(Error::InvalidInput("empty r0 grid".into()));
    }
    if r0_grid.iter().any(|r| !(r.is_finite() && *r > 0.0)) {
        return Err(Error::InvalidInput(
            "r0 grid must be positive and finite".into(),
        ));
    }
    if r0_grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidInput(
            "r0 grid must be strictly increasing".into(),
        ));
    }

    let mut records: Vec<RegimeRecord> = r0_grid
        .par_iter()
        .map(|&r0| regime_record_inner(p_base, r0, false))
        .collect::<Result<_>>()?;

    let (lo, hi) = (r0_grid[0], r0_grid[r0_grid.len() - 1]);
    let hopf = hopf_report(p_base);
    if let Some(h) = &hopf {
        if h.transversality >= 0.0 {
            return Err(Error::Inconsistent(format!(
                "transversality {} is not negative",
                h.transversality
            )));
        }
        check_hopf_bracket(&records, h.r_h, lo, hi)?;
    }

    let mut thresholds = vec![1.0];
    thresholds.extend(hopf.map(|h| h.r_h));
    for r in thresholds {
        if lo < r && r < hi && !r0_grid.contains(&r) {
            records.push(regime_record_inner(p_base, r, true)?);
        }
    }
    records.sort_by(|a, b| a.r0.total_cmp(&b.r0));
    Ok(records)
}

fn check_hopf_bracket(records: &[RegimeRecord], r_h: f64, lo: f64, hi: f64) -> Result<()> {
    if !(lo < r_h && r_h < hi) {
        return Ok(());
    }
    let first_negative = records
        .iter()
        .position(|r| r.delta_rh.is_some_and(|d| d < 0.0));
    let bracket = first_negative
        .filter(|&k| k > 0)
        .map(|k| (records[k - 1].r0, records[k].r0));
    match bracket {
        Some((a, b)) if a <= r_h && r_h <= b => Ok(()),
        _ => Err(Error::Inconsistent(format!(
            "delta_rh sign change {bracket:?} does not bracket r_H = {r_h}"
        ))),
    }
}
