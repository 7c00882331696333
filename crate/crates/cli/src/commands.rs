use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;

use sociolorenz::analysis::{
    bifurcation_scan, dissipativity_audit, lyapunov_spectrum, LyapunovOptions,
};
use sociolorenz::integrate::{integrate, IntegratorOptions};
use sociolorenz::model::{equilibria, vector_field, EQUILIBRIUM_RESIDUAL_TOL};
use sociolorenz::stability::classify_equilibrium;
use sociolorenz::{Error, ParamSet};

use crate::format::{self, num, CheckRow};
use crate::{initial_state, CliError, Command, Format, MethodArg, EXIT_NUMERICAL, EXIT_OK};

type CmdResult = Result<i32, CliError>;

/// Opens the output before any computation so a bad path fails fast.
fn open_sink<'a>(
    out: &Option<PathBuf>,
    stdout: &'a mut (dyn Write + Send),
) -> Result<Box<dyn Write + 'a>, CliError> {
    match out {
        Some(path) => {
            let file = File::create(path)
                .map_err(|e| CliError::usage(format!("cannot open {}: {e}", path.display())))?;
            Ok(Box::new(BufWriter::new(file)))
        }
        None => Ok(Box::new(stdout)),
    }
}

pub(crate) fn dispatch(cmd: &Command, stdout: &mut (dyn Write + Send)) -> CmdResult {
    match cmd {
        Command::Simulate {
            params,
            x0,
            t_end,
            method,
            h,
            tol,
            stride,
            format,
            out,
        } => {
            let p = params.build()?;
            let x0 = initial_state(*x0)?;
            let opts = match method {
                MethodArg::Rk4 => IntegratorOptions::fixed_rk4(*h, *t_end),
                MethodArg::Adaptive => IntegratorOptions {
                    h_init: *h,
                    ..IntegratorOptions::adaptive(*t_end).with_tolerances(*tol, *tol)
                },
            }
            .with_stride(*stride);
            opts.validate()?;
            let mut w = open_sink(out, stdout)?;
            let tr = integrate(&p, &x0, &opts)?;
            match format {
                Format::Csv => format::write_trajectory_csv(&mut w, &tr)?,
                Format::Json => format::write_trajectory_json(&mut w, &tr)?,
            }
            w.flush()?;
            Ok(EXIT_OK)
        }
        Command::Equilibria {
            params,
            format,
            out,
        } => {
            let p = params.build()?;
            let mut w = open_sink(out, stdout)?;
            let rows = equilibria(&p)
                .into_iter()
                .map(|e| classify_equilibrium(&p, &e).map(|r| (e, r)))
                .collect::<Result<Vec<_>, _>>()?;
            match format {
                Format::Csv => format::write_equilibria_csv(&mut w, &rows)?,
                Format::Json => format::write_equilibria_json(&mut w, &rows)?,
            }
            w.flush()?;
            Ok(EXIT_OK)
        }
        Command::Scan {
            sigma,
            beta,
            r0_min,
            r0_max,
            steps,
            out,
        } => {
            let base = ParamSet::new(*sigma, *r0_min, *beta)?;
            let grid = linspace(*r0_min, *r0_max, *steps)?;
            let mut w = open_sink(out, stdout)?;
            let records = bifurcation_scan(&base, &grid)?;
            format::write_scan_csv(&mut w, &records)?;
            w.flush()?;
            Ok(EXIT_OK)
        }
        Command::Lyapunov {
            params,
            x0,
            horizon,
            renorm_dt,
            transient,
            h,
        } => {
            let p = params.build()?;
            let x0 = initial_state(*x0)?;
            let opts = LyapunovOptions {
                horizon: *horizon,
                renorm_dt: *renorm_dt,
                transient: *transient,
                h: *h,
            };
            opts.validate()?;
            let res = lyapunov_spectrum(&p, &x0, &opts)?;
            format::write_lyapunov_json(stdout, &p, &res)?;
            Ok(EXIT_OK)
        }
        Command::Verify {
            params,
            samples,
            seed,
        } => {
            let p = params.build()?;
            let rows = verify_rows(&p, *samples, *seed)?;
            format::write_check_table(stdout, &rows)?;
            Ok(if rows.iter().all(|r| r.passed) {
                EXIT_OK
            } else {
                EXIT_NUMERICAL
            })
        }
    }
}

fn linspace(lo: f64, hi: f64, n: usize) -> Result<Vec<f64>, CliError> {
    if !(lo.is_finite() && hi.is_finite() && hi > lo) {
        return Err(CliError::usage(format!(
            "need r0-min < r0-max, got {lo} and {hi}"
        )));
    }
    if n < 2 {
        return Err(CliError::usage(format!("--steps must be >= 2, got {n}")));
    }
    let mut grid: Vec<f64> = (0..n)
        .map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64)
        .collect();
    grid[n - 1] = hi;
    Ok(grid)
}

fn verify_rows(p: &ParamSet, samples: usize, seed: u64) -> Result<Vec<CheckRow>, CliError> {
    let mut rows = Vec::new();
    let audit = dissipativity_audit(p, samples, seed)?;
    rows.push(CheckRow {
        name: "dissipativity".into(),
        passed: audit.passed(),
        detail: format!(
            "samples={} seed={} violations={} max_slack={}",
            audit.n_samples,
            audit.seed,
            audit.violations,
            num(audit.max_slack)
        ),
    });

    for e in equilibria(p) {
        let branch = e.branch.as_str();
        let residual = vector_field(p, &e.point).max_norm();
        rows.push(CheckRow {
            name: format!("residual[{branch}]"),
            passed: residual < EQUILIBRIUM_RESIDUAL_TOL,
            detail: format!("max_norm={}", num(residual)),
        });

        let (passed, detail) = match classify_equilibrium(p, &e) {
            Ok(r) => {
                let tr = p.divergence();
                let sum = r.eigenvalues.sum();
                let trace_ok =
                    (sum.re - tr).abs() <= 1e-9 * tr.abs() && sum.im.abs() <= 1e-9 * tr.abs();
                (
                    trace_ok,
                    format!(
                        "label={} rh={} eigen_sum={}",
                        r.label.as_str(),
                        r.rh_verdict.as_str(),
                        num(sum.re)
                    ),
                )
            }
            Err(Error::Inconsistent(msg)) => (false, msg),
            Err(other) => return Err(other.into()),
        };
        rows.push(CheckRow {
            name: format!("stability[{branch}]"),
            passed,
            detail,
        });
    }
    Ok(rows)
}
