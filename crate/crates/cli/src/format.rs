//! CSV and JSON renderings of library results.
//!
//! Floats in CSV use 17 significant digits, which round-trips every `f64`.

use std::io::{self, Write};

use serde::Serialize;
use sociolorenz::analysis::{LyapunovResult, RegimeRecord};
use sociolorenz::integrate::{Sample, Trajectory};
use sociolorenz::stability::StabilityReport;
use sociolorenz::{Equilibrium, ParamSet, State};

pub const TRAJECTORY_HEADER: &str = "t,T,I,M";
pub const SCAN_HEADER: &str = "r0,regime,delta_rh,p0_label,pe_label,alpha";
pub const EQUILIBRIA_HEADER: &str = "branch,T,I,M,re1,im1,re2,im2,re3,im3,rh_verdict,label";

pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

fn opt_num(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

pub fn write_trajectory_csv(w: &mut dyn Write, tr: &Trajectory) -> io::Result<()> {
    writeln!(w, "{TRAJECTORY_HEADER}")?;
    for s in &tr.samples {
        let [a, b, c] = s.state.to_array();
        writeln!(w, "{},{},{},{}", num(s.t), num(a), num(b), num(c))?;
    }
    Ok(())
}

/// Parses output of [`write_trajectory_csv`].
pub fn read_trajectory_csv(text: &str) -> Result<Vec<Sample>, String> {
    let mut lines = text.lines();
    match lines.next() {
        Some(TRAJECTORY_HEADER) => {}
        other => return Err(format!("bad header {other:?}")),
    }
    lines
        .enumerate()
        .map(|(k, line)| {
            let vals: Vec<f64> = line
                .split(',')
                .map(|f| f.parse::<f64>().map_err(|e| format!("row {}: {e}", k + 1)))
                .collect::<Result<_, _>>()?;
            if vals.len() != 4 {
                return Err(format!("row {}: expected 4 fields", k + 1));
            }
            let state = State::new(vals[1], vals[2], vals[3]).map_err(|e| e.to_string())?;
            Ok(Sample { t: vals[0], state })
        })
        .collect()
}

#[derive(Serialize)]
struct SampleRow {
    t: f64,
    #[serde(rename = "T")]
    transmission: f64,
    #[serde(rename = "I")]
    perception: f64,
    #[serde(rename = "M")]
    memory: f64,
}

#[derive(Serialize)]
struct TrajectoryJson {
    sigma: f64,
    r0: f64,
    beta: f64,
    method: &'static str,
    accepted_steps: usize,
    rejected_steps: usize,
    samples: Vec<SampleRow>,
}

pub fn write_trajectory_json(w: &mut dyn Write, tr: &Trajectory) -> io::Result<()> {
    let doc = TrajectoryJson {
        sigma: tr.params.sigma(),
        r0: tr.params.r0(),
        beta: tr.params.beta(),
        method: tr.meta.method.as_str(),
        accepted_steps: tr.meta.accepted_steps,
        rejected_steps: tr.meta.rejected_steps,
        samples: tr
            .samples
            .iter()
            .map(|s| SampleRow {
                t: s.t,
                transmission: s.state.transmission(),
                perception: s.state.perception(),
                memory: s.state.memory(),
            })
            .collect(),
    };
    serde_json::to_writer_pretty(&mut *w, &doc)?;
    writeln!(w)
}

#[derive(Serialize)]
struct ComplexRow {
    re: f64,
    im: f64,
}

#[derive(Serialize)]
struct EquilibriumRow {
    branch: &'static str,
    point: [f64; 3],
    eigenvalues: Vec<ComplexRow>,
    rh_verdict: &'static str,
    label: &'static str,
}

pub fn write_equilibria_json(
    w: &mut dyn Write,
    rows: &[(Equilibrium, StabilityReport)],
) -> io::Result<()> {
    let doc: Vec<EquilibriumRow> = rows
        .iter()
        .map(|(e, r)| EquilibriumRow {
            branch: e.branch.as_str(),
            point: e.point.to_array(),
            eigenvalues: r
                .eigenvalues
                .roots()
                .iter()
                .map(|z| ComplexRow { re: z.re, im: z.im })
                .collect(),
            rh_verdict: r.rh_verdict.as_str(),
            label: r.label.as_str(),
        })
        .collect();
    serde_json::to_writer_pretty(&mut *w, &doc)?;
    writeln!(w)
}

pub fn write_equilibria_csv(
    w: &mut dyn Write,
    rows: &[(Equilibrium, StabilityReport)],
) -> io::Result<()> {
    writeln!(w, "{EQUILIBRIA_HEADER}")?;
    for (e, r) in rows {
        let mut fields = vec![e.branch.as_str().to_string()];
        fields.extend(e.point.to_array().map(num));
        for z in r.eigenvalues.roots() {
            fields.push(num(z.re));
            fields.push(num(z.im));
        }
        fields.push(r.rh_verdict.as_str().into());
        fields.push(r.label.as_str().into());
        writeln!(w, "{}", fields.join(","))?;
    }
    Ok(())
}

pub fn write_scan_csv(w: &mut dyn Write, records: &[RegimeRecord]) -> io::Result<()> {
    writeln!(w, "{SCAN_HEADER}")?;
    for r in records {
        writeln!(
            w,
            "{},{},{},{},{},{}",
            num(r.r0),
            r.regime.as_str(),
            opt_num(r.delta_rh),
            r.p0_label.as_str(),
            r.pe_label.map(|l| l.as_str()).unwrap_or_default(),
            num(r.alpha)
        )?;
    }
    Ok(())
}

#[derive(Serialize)]
struct LyapunovJson<'a> {
    exponents: [f64; 3],
    sum: f64,
    trace_identity_residual: f64,
    regime_label: &'static str,
    warnings: &'a [String],
}

pub fn write_lyapunov_json(
    w: &mut dyn Write,
    p: &ParamSet,
    res: &LyapunovResult,
) -> io::Result<()> {
    let doc = LyapunovJson {
        exponents: res.exponents,
        sum: res.sum,
        trace_identity_residual: res.trace_identity_residual(p),
        regime_label: res.chaos_label().as_str(),
        warnings: &res.warnings,
    };
    serde_json::to_writer_pretty(&mut *w, &doc)?;
    writeln!(w)
}

/// One line of the `verify` table.
pub struct CheckRow {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

pub fn write_check_table(w: &mut dyn Write, rows: &[CheckRow]) -> io::Result<()> {
    writeln!(w, "{:<28} {:<6} detail", "check", "result")?;
    for r in rows {
        let verdict = if r.passed { "PASS" } else { "FAIL" };
        writeln!(w, "{:<28} {:<6} {}", r.name, verdict, r.detail)?;
    }
    let all = rows.iter().all(|r| r.passed);
    writeln!(w, "{:<28} {}", "overall", if all { "PASS" } else { "FAIL" })
}
