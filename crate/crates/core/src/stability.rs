//! Eigenvalues of the 3x3 Jacobians, Routh-Hurwitz testing and
//! classification of equilibria.

use std::cmp::Ordering;
use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{
    char_coeffs_nontrivial, char_coeffs_origin, jacobian, Branch, CubicCoeffs, Equilibrium,
    Matrix3, ParamSet,
};

/// Eigenvalue real parts within this band count as marginal.
pub const TOL_MARGINAL: f64 = 1e-9;

/// Relative band on `a1 a2 - a3` inside which the Routh-Hurwitz verdict is
/// marginal.
pub const TOL_RH: f64 = 1e-12;

/// Three eigenvalues sorted by descending real part, ties broken by
/// descending imaginary part.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EigenTriple([Complex64; 3]);

impl EigenTriple {
    pub fn new(mut roots: [Complex64; 3]) -> Self {
        roots.sort_by(|a, b| {
            b.re.partial_cmp(&a.re)
                .unwrap_or(Ordering::Equal)
                .then(b.im.partial_cmp(&a.im).unwrap_or(Ordering::Equal))
        });
        Self(roots)
    }

    pub fn roots(&self) -> &[Complex64; 3] {
        &self.0
    }

    pub fn sum(&self) -> Complex64 {
        self.0.iter().sum()
    }

    pub fn max_real(&self) -> f64 {
        self.0[0].re
    }

    pub fn min_real(&self) -> f64 {
        self.0[2].re
    }

    /// The eigenvalue with the largest positive imaginary part, if any root
    /// is nonreal beyond `tol`.
    pub fn oscillatory(&self, tol: f64) -> Option<Complex64> {
        self.0
            .iter()
            .filter(|z| z.im > tol)
            .max_by(|a, b| a.im.partial_cmp(&b.im).unwrap_or(Ordering::Equal))
            .copied()
    }
}

fn eval(c: &CubicCoeffs, z: Complex64) -> Complex64 {
    ((z + c.a1) * z + c.a2) * z + c.a3
}

fn eval_deriv(c: &CubicCoeffs, z: Complex64) -> Complex64 {
    (z * 3.0 + 2.0 * c.a1) * z + c.a2
}

/// One Newton step, kept only if it does not increase the residual.
fn polish(c: &CubicCoeffs, z: Complex64) -> Complex64 {
    let d = eval_deriv(c, z);
    if d.norm() == 0.0 {
        return z;
    }
    let next = z - eval(c, z) / d;
    if next.is_finite() && eval(c, next).norm() <= eval(c, z).norm() {
        next
    } else {
        z
    }
}

/// Roots of `l^3 + a1 l^2 + a2 l + a3`.
///
/// Closed form (trigonometric branch for three real roots, Cardano
/// otherwise), followed by one Newton step per root.
pub fn cubic_roots(c: &CubicCoeffs) -> EigenTriple {
    let CubicCoeffs { a1, a2, a3 } = *c;
    let shift = a1 / 3.0;
    // depressed cubic y^3 + p y + q with l = y - a1/3
    let p = a2 - a1 * a1 / 3.0;
    let q = 2.0 * a1 * a1 * a1 / 27.0 - a1 * a2 / 3.0 + a3;
    let half_q = q / 2.0;
    let third_p = p / 3.0;
    let disc = half_q * half_q + third_p * third_p * third_p;

    let roots = if p == 0.0 && q == 0.0 {
        [Complex64::new(-shift, 0.0); 3]
    } else if disc <= 0.0 {
        // three real roots; p < 0 here
        let r = (-third_p).sqrt();
        let cos_arg = (-half_q / (r * r * r)).clamp(-1.0, 1.0);
        let theta = cos_arg.acos() / 3.0;
        let mut out = [Complex64::default(); 3];
        for (k, slot) in out.iter_mut().enumerate() {
            let y = 2.0 * r * (theta - 2.0 * PI * k as f64 / 3.0).cos();
            *slot = Complex64::new(polish(c, Complex64::new(y - shift, 0.0)).re, 0.0);
        }
        out
    } else {
        let sq = disc.sqrt();
        // avoid cancellation: pick the larger-magnitude cube-root argument
        let u = (-half_q - half_q.signum() * sq).cbrt();
        let u = if u == 0.0 { (-half_q + sq).cbrt() } else { u };
        let v = if u != 0.0 { -third_p / u } else { 0.0 };
        let real = Complex64::new(polish(c, Complex64::new(u + v - shift, 0.0)).re, 0.0);
        let z = Complex64::new(
            -(u + v) / 2.0 - shift,
            (3.0f64).sqrt() / 2.0 * (u - v).abs(),
        );
        let z = polish(c, z);
        [real, z, z.conj()]
    };
    EigenTriple::new(roots)
}

/// Characteristic polynomial `det(l I - A)` of a 3x3 matrix.
pub fn matrix_char_coeffs(a: &Matrix3) -> CubicCoeffs {
    let trace = a[0][0] + a[1][1] + a[2][2];
    let minors = a[0][0] * a[1][1] - a[0][1] * a[1][0] + a[0][0] * a[2][2] - a[0][2] * a[2][0]
        + a[1][1] * a[2][2]
        - a[1][2] * a[2][1];
    let det = a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1])
        - a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0])
        + a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0]);
    CubicCoeffs::new(-trace, minors, -det)
}

pub fn matrix_eigenvalues(a: &Matrix3) -> EigenTriple {
    cubic_roots(&matrix_char_coeffs(a))
}

/// Eigenvalues at the origin from its block structure: `-beta` together
/// with the roots of `l^2 + (sigma + 1) l + sigma (1 - r0)`, which are
/// always real.
pub fn eigenvalues_p0(p: &ParamSet) -> EigenTriple {
    let b = p.sigma() + 1.0;
    let c = p.sigma() * (1.0 - p.r0());
    // (sigma - 1)^2 + 4 sigma r0, written without cancellation
    let disc = (p.sigma() - 1.0).powi(2) + 4.0 * p.sigma() * p.r0();
    let sq = disc.sqrt();
    let big = -(b + sq) / 2.0;
    let small = if big != 0.0 { c / big } else { 0.0 };
    EigenTriple::new([
        Complex64::new(-p.beta(), 0.0),
        Complex64::new(big, 0.0),
        Complex64::new(small, 0.0),
    ])
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RhVerdict {
    AllNegative,
    Unstable,
    Marginal,
}

impl RhVerdict {
    pub fn as_str(&self) -> &'static str {
        match self {
            RhVerdict::AllNegative => "AllNegative",
            RhVerdict::Unstable => "Unstable",
            RhVerdict::Marginal => "Marginal",
        }
    }
}

/// Routh-Hurwitz test: all roots in the open left half-plane iff
/// `a1, a2, a3 > 0` and `a1 a2 > a3`.
pub fn routh_hurwitz_cubic(c: &CubicCoeffs) -> RhVerdict {
    let prod = c.a1 * c.a2;
    let band = TOL_RH * (1.0 + prod.abs());
    let delta = prod - c.a3;
    if delta.abs() <= band || c.a3.abs() <= band {
        return RhVerdict::Marginal;
    }
    if c.a1 > 0.0 && c.a2 > 0.0 && c.a3 > 0.0 && delta > 0.0 {
        RhVerdict::AllNegative
    } else {
        RhVerdict::Unstable
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Label {
    HyperbolicSink,
    Saddle,
    StableFocusNode,
    UnstableFocusNode,
    Marginal,
}

impl Label {
    pub fn as_str(&self) -> &'static str {
        match self {
            Label::HyperbolicSink => "HyperbolicSink",
            Label::Saddle => "Saddle",
            Label::StableFocusNode => "StableFocusNode",
            Label::UnstableFocusNode => "UnstableFocusNode",
            Label::Marginal => "Marginal",
        }
    }

    pub fn is_stable(&self) -> bool {
        matches!(self, Label::HyperbolicSink | Label::StableFocusNode)
    }

    pub fn is_unstable(&self) -> bool {
        matches!(self, Label::Saddle | Label::UnstableFocusNode)
    }

    /// Label from the sign pattern of the eigenvalue real parts.
    pub fn from_eigenvalues(eig: &EigenTriple) -> Label {
        let roots = eig.roots();
        if roots.iter().any(|z| z.re.abs() <= TOL_MARGINAL) {
            return Label::Marginal;
        }
        let n_pos = roots.iter().filter(|z| z.re > 0.0).count();
        let oscillatory = roots.iter().any(|z| z.im.abs() > TOL_MARGINAL);
        match (n_pos, oscillatory) {
            (0, false) => Label::HyperbolicSink,
            (0, true) => Label::StableFocusNode,
            (3, _) => Label::UnstableFocusNode,
            _ => Label::Saddle,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StabilityReport {
    pub branch: Branch,
    pub eigenvalues: EigenTriple,
    pub rh_verdict: RhVerdict,
    pub label: Label,
}

/// Classifies an equilibrium returned by [`crate::model::equilibria`].
///
/// Eigenvalues come from the closed-form polynomials (block structure at the
/// origin, the nontrivial cubic otherwise). The Routh-Hurwitz verdict is
/// computed from the characteristic polynomial of the Jacobian evaluated at
/// the point, and the two routes must agree outside their marginal bands.
pub fn classify_equilibrium(p: &ParamSet, e: &Equilibrium) -> Result<StabilityReport> {
    let eigenvalues = match e.branch {
        Branch::P0 => eigenvalues_p0(p),
        Branch::PePlus | Branch::PeMinus => cubic_roots(&char_coeffs_nontrivial(p)?),
    };
    let coeffs = match e.branch {
        Branch::P0 => char_coeffs_origin(p),
        _ => matrix_char_coeffs(&jacobian(p, &e.point)),
    };
    let rh_verdict = routh_hurwitz_cubic(&coeffs);
    let label = Label::from_eigenvalues(&eigenvalues);

    let consistent = match (rh_verdict, label) {
        (RhVerdict::Marginal, _) | (_, Label::Marginal) => true,
        (RhVerdict::AllNegative, l) => l.is_stable(),
        (RhVerdict::Unstable, l) => l.is_unstable(),
    };
    if !consistent {
        return Err(Error::Inconsistent(format!(
            "{} at {:?}: Routh-Hurwitz says {} but eigenvalues {:?} give {}",
            e.branch.as_str(),
            p,
            rh_verdict.as_str(),
            eigenvalues.roots(),
            label.as_str()
        )));
    }
    Ok(StabilityReport {
        branch: e.branch,
        eigenvalues,
        rh_verdict,
        label,
    })
}
