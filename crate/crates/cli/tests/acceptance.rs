//! Acceptance checks. Prints one `PASS`/`FAIL` line per criterion and exits
//! non-zero if any criterion fails.
//!
//! Run with `cargo test -p sociolorenz-cli --test acceptance`.

use std::process::Command;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use sociolorenz::analysis::{
    dissipativity_audit, hopf_report, largest_exponent_two_trajectory, lyapunov_spectrum,
    LyapunovOptions,
};
use sociolorenz::integrate::{integrate, integrate_many, IntegratorOptions};
use sociolorenz::model::{
    absorbing_ball, char_coeffs_nontrivial, equilibria, hopf_threshold, lyapunov_v,
    pitchfork_amplitude, symmetry_map, vector_field, EQUILIBRIUM_RESIDUAL_TOL,
};
use sociolorenz::stability::{classify_equilibrium, cubic_roots, Label};
use sociolorenz::{Branch, ParamSet, State};

type Failure = Box<dyn std::error::Error>;
type Check = Result<String, Failure>;

fn ensure(ok: bool, msg: impl Into<String>) -> Result<(), Failure> {
    if ok {
        Ok(())
    } else {
        Err(msg.into().into())
    }
}

fn params(sigma: f64, r0: f64, beta: f64) -> ParamSet {
    ParamSet::new(sigma, r0, beta).unwrap()
}

fn random_params(rng: &mut ChaCha8Rng) -> ParamSet {
    params(
        rng.gen_range(0.05..30.0),
        rng.gen_range(0.05..60.0),
        rng.gen_range(0.05..10.0),
    )
}

fn fit_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let num: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let den: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    num / den
}

fn pe_label(p: &ParamSet, branch: Branch) -> Label {
    let e = equilibria(p)
        .into_iter()
        .find(|e| e.branch == branch)
        .unwrap();
    classify_equilibrium(p, &e).unwrap().label
}

fn equilibrium_correctness() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst: f64 = 0.0;
    let mut with_pair = 0;
    for k in 0..200 {
        // half the draws below the pitchfork threshold
        let r0 = if k % 2 == 0 {
            rng.gen_range(0.05..1.0)
        } else {
            rng.gen_range(1.0..60.0)
        };
        let p = random_params(&mut rng).with_r0(r0)?;
        let eq = equilibria(&p);
        ensure(
            (eq.len() == 3) == (p.r0() > 1.0),
            format!("{} equilibria at r0 = {}", eq.len(), p.r0()),
        )?;
        with_pair += usize::from(eq.len() == 3);
        for e in &eq {
            worst = worst.max(vector_field(&p, &e.point).max_norm());
        }
    }
    ensure(
        worst < EQUILIBRIUM_RESIDUAL_TOL,
        format!("residual {worst:e}"),
    )?;
    Ok(format!(
        "max residual {worst:.2e}, {with_pair}/200 sets with mirror pair"
    ))
}

fn origin_eigenvalues() -> Check {
    let sink = params(2.0, 0.5, 1.0);
    let rep = classify_equilibrium(&sink, &equilibria(&sink)[0])?;
    let s5 = 5f64.sqrt();
    let exact = [(-3.0 + s5) / 2.0, -1.0, (-3.0 - s5) / 2.0];
    let quoted = [-0.381966, -1.0, -2.618034];
    for ((z, e), q) in rep.eigenvalues.roots().iter().zip(exact).zip(quoted) {
        ensure(
            z.im == 0.0 && (z.re - e).abs() < 1e-9,
            format!("sink eigenvalue {z} vs {e}"),
        )?;
        ensure(
            (z.re - q).abs() < 5e-7,
            format!("sink eigenvalue {z} vs quoted {q}"),
        )?;
    }
    ensure(
        rep.label == Label::HyperbolicSink,
        format!("sink label {:?}", rep.label),
    )?;

    let lorenz = params(10.0, 28.0, 8.0 / 3.0);
    let rep = classify_equilibrium(&lorenz, &equilibria(&lorenz)[0])?;
    let unstable = (-11.0 + 1201f64.sqrt()) / 2.0;
    let lead = rep.eigenvalues.roots()[0];
    ensure(
        (lead.re - unstable).abs() < 1e-9,
        format!("lead eigenvalue {lead} vs {unstable}"),
    )?;
    ensure(
        rep.label == Label::Saddle,
        format!("lorenz label {:?}", rep.label),
    )?;
    Ok(format!(
        "sink {:?}, saddle lead {:.9}",
        exact.map(|x| (x * 1e6).round() / 1e6),
        lead.re
    ))
}

fn hopf_thresholds() -> Check {
    let base = params(10.0, 1.0, 8.0 / 3.0);
    let rh = hopf_threshold(&base).ok_or("no threshold")?;
    ensure((rh - 470.0 / 19.0).abs() < 1e-9, format!("r_H = {rh}"))?;
    for branch in [Branch::PePlus, Branch::PeMinus] {
        let below = pe_label(&base.with_r0(rh * (1.0 - 1e-3))?, branch);
        let above = pe_label(&base.with_r0(rh * (1.0 + 1e-3))?, branch);
        ensure(
            below.is_stable() && above.is_unstable(),
            format!("{branch:?}: {below:?} below, {above:?} above"),
        )?;
    }

    let base = params(10.0, 1.0, 2.7);
    let rh2 = hopf_threshold(&base).ok_or("no threshold")?;
    ensure((rh2 - 157.0 / 6.3).abs() < 1e-9, format!("r_H = {rh2}"))?;
    let at20 = base.with_r0(20.0)?;
    for branch in [Branch::PePlus, Branch::PeMinus] {
        let l = pe_label(&at20, branch);
        ensure(
            l == Label::StableFocusNode,
            format!("{branch:?} at r0 = 20: {l:?}"),
        )?;
    }
    Ok(format!(
        "r_H = {rh:.9} and {rh2:.9}; flip across r_H(1 -/+ 1e-3)"
    ))
}

fn hopf_diagnostics() -> Check {
    let base = params(10.0, 1.0, 8.0 / 3.0);
    let h = hopf_report(&base).ok_or("no threshold")?;
    let c = char_coeffs_nontrivial(&base.with_r0(h.r_h)?)?;
    let pair = cubic_roots(&c).oscillatory(0.0).ok_or("no complex pair")?;
    ensure(pair.re.abs() < 1e-8, format!("Re = {:e}", pair.re))?;
    ensure(
        (pair.im - 9.62453).abs() < 1e-4,
        format!("Im = {}", pair.im),
    )?;
    ensure(
        h.transversality < 0.0,
        format!("transversality {}", h.transversality),
    )?;
    Ok(format!(
        "Re {:.1e}, Im {:.6}, transversality {:.4}",
        pair.re, pair.im, h.transversality
    ))
}

fn pitchfork_scaling() -> Check {
    let base = params(10.0, 1.0, 8.0 / 3.0);
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for k in 1..=10 {
        let eps = 1e-3 * k as f64;
        xs.push(eps.ln());
        ys.push(pitchfork_amplitude(&base.with_r0(1.0 + eps)?).ln());
    }
    let s = fit_slope(&xs, &ys);
    ensure((s - 0.5).abs() <= 0.02, format!("slope {s}"))?;
    Ok(format!("slope {s:.6}"))
}

fn dissipativity() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for k in 0..20 {
        let p = random_params(&mut rng);
        let rep = dissipativity_audit(&p, 100_000, 1000 + k)?;
        ensure(
            rep.passed(),
            format!("{} violations for {p:?}", rep.violations),
        )?;
    }

    let p = params(10.0, 28.0, 8.0 / 3.0);
    let ball = absorbing_ball(&p);
    ensure(
        (ball.radius_sq - 1925.33).abs() < 0.01,
        format!("R^2 = {}", ball.radius_sq),
    )?;
    let radius = ball.radius_sq.sqrt();
    let initial: Vec<State> = (0..100)
        .map(|_| loop {
            let v = [0; 3].map(|_| rng.gen_range(-2.0 * radius..2.0 * radius));
            if v.iter().map(|c| c * c).sum::<f64>() <= 4.0 * ball.radius_sq {
                break State::new(v[0], v[1], ball.center_m + v[2]).unwrap();
            }
        })
        .collect();
    let opts = IntegratorOptions::fixed_rk4(0.01, 50.0);
    let mut worst: f64 = 0.0;
    for tr in integrate_many(&p, &initial, &opts) {
        for s in tr?.samples.iter().filter(|s| s.t >= 20.0) {
            worst = worst.max(lyapunov_v(&p, &s.state) / ball.radius_sq);
        }
    }
    ensure(worst <= 1.01, format!("V / R^2 reached {worst}"))?;
    Ok(format!(
        "20 x 1e5 samples clean; R^2 = {:.2}; max V/R^2 after t=20: {worst:.4}",
        ball.radius_sq
    ))
}

fn global_attraction() -> Check {
    let p = params(2.0, 0.5, 1.0);
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let initial: Vec<State> = (0..100)
        .map(|_| {
            let v = [0; 3].map(|_| rng.gen_range(-5.0..5.0));
            State::new(v[0], v[1], v[2]).unwrap()
        })
        .collect();
    let opts = IntegratorOptions::fixed_rk4(0.01, 50.0).with_stride(usize::MAX);
    let mut worst: f64 = 0.0;
    for tr in integrate_many(&p, &initial, &opts) {
        worst = worst.max(tr?.final_state().norm());
    }
    ensure(worst < 1e-6, format!("max |x(50)| = {worst:e}"))?;
    Ok(format!("max |x(50)| = {worst:.2e}"))
}

fn chaos_regime() -> Check {
    let p = params(10.0, 28.0, 8.0 / 3.0);
    let x0 = State::new(1.0, 1.0, 1.0)?;
    let opts = LyapunovOptions {
        horizon: 2000.0,
        ..LyapunovOptions::default()
    };
    let res = lyapunov_spectrum(&p, &x0, &opts)?;
    let [l1, l2, l3] = res.exponents;
    let two = largest_exponent_two_trajectory(&p, &x0, &opts, 1e-8)?;
    let target = -41.0 / 3.0;
    ensure((0.7..=1.1).contains(&l1), format!("lambda1 {l1}"))?;
    ensure((two - l1).abs() < 0.1, format!("estimators {l1} vs {two}"))?;
    ensure(l2.abs() < 0.05, format!("lambda2 {l2}"))?;
    ensure(
        ((res.sum - target) / target).abs() < 0.02,
        format!("sum {}", res.sum),
    )?;
    Ok(format!(
        "spectrum ({l1:.4}, {l2:.4}, {l3:.4}), two-trajectory {two:.4}, sum {:.4}",
        res.sum
    ))
}

fn integrator_order() -> Check {
    let p = params(10.0, 20.0, 2.7);
    let x0 = State::new(5.0, 5.0, 15.0)?;
    let reference = integrate(
        &p,
        &x0,
        &IntegratorOptions::adaptive(1.0).with_tolerances(1e-12, 1e-12),
    )?
    .final_state();
    let hs = [0.02, 0.01, 0.005, 0.0025];
    let mut errs = Vec::new();
    for h in hs {
        let end = integrate(&p, &x0, &IntegratorOptions::fixed_rk4(h, 1.0))?.final_state();
        errs.push(end.distance_max(&reference).ln());
    }
    let s = fit_slope(&hs.map(f64::ln), &errs);
    ensure((3.7..=4.3).contains(&s), format!("slope {s}"))?;
    Ok(format!("slope {s:.4}"))
}

fn equivariance() -> Check {
    let p = params(10.0, 28.0, 8.0 / 3.0);
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let opts = IntegratorOptions::fixed_rk4(0.01, 10.0);
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let x0 = State::new(
            rng.gen_range(-20.0..20.0),
            rng.gen_range(-20.0..20.0),
            rng.gen_range(0.0..50.0),
        )?;
        let a = integrate(&p, &x0, &opts)?;
        let b = integrate(&p, &symmetry_map(&x0), &opts)?;
        ensure(a.samples.len() == b.samples.len(), "sample counts differ")?;
        for (sa, sb) in a.samples.iter().zip(&b.samples) {
            worst = worst.max(symmetry_map(&sa.state).distance_max(&sb.state));
        }
    }
    ensure(worst <= 1e-9, format!("max deviation {worst:e}"))?;
    Ok(format!("max deviation {worst:.1e}"))
}

fn cli_determinism() -> Check {
    let lorenz = [
        "--sigma",
        "10",
        "--r0",
        "28",
        "--beta",
        "2.6666666666666665",
    ];
    let runs: Vec<Vec<&str>> = vec![
        [
            &["simulate"][..],
            &lorenz,
            &["--x0", "1,1,1", "--t-end", "100"],
        ]
        .concat(),
        [
            &["simulate"][..],
            &lorenz,
            &[
                "--x0", "1,1,1", "--t-end", "50", "--method", "adaptive", "--format", "json",
            ],
        ]
        .concat(),
        [&["equilibria"][..], &lorenz].concat(),
        vec![
            "scan",
            "--sigma",
            "10",
            "--beta",
            "2.6666666666666665",
            "--r0-min",
            "0.5",
            "--r0-max",
            "30",
            "--steps",
            "60",
        ],
        [&["lyapunov"][..], &lorenz, &["--horizon", "200"]].concat(),
        [&["verify"][..], &lorenz, &["--seed", "42"]].concat(),
    ];
    let exe = env!("CARGO_BIN_EXE_sociolorenz");
    let mut bytes = 0;
    for args in &runs {
        let outputs: Vec<_> = [None, Some("1"), None]
            .iter()
            .map(|threads| {
                let mut cmd = Command::new(exe);
                if let Some(n) = threads {
                    cmd.args(["--threads", n]);
                }
                cmd.args(args).output()
            })
            .collect::<Result<_, _>>()?;
        for out in &outputs {
            ensure(
                out.status.code() == Some(0),
                format!("{args:?} exited {:?}", out.status),
            )?;
            ensure(
                out.stdout == outputs[0].stdout,
                format!("{args:?} output differs"),
            )?;
        }
        bytes += outputs[0].stdout.len();
    }
    Ok(format!(
        "{} commands x 3 runs identical ({bytes} bytes each pass)",
        runs.len()
    ))
}

struct Criterion {
    id: u32,
    name: &'static str,
    budget: Option<Duration>,
    run: fn() -> Check,
}

fn main() {
    let criteria = [
        Criterion {
            id: 1,
            name: "equilibrium correctness",
            budget: Some(Duration::from_secs(1)),
            run: equilibrium_correctness,
        },
        Criterion {
            id: 2,
            name: "origin eigenvalues",
            budget: None,
            run: origin_eigenvalues,
        },
        Criterion {
            id: 3,
            name: "stability thresholds",
            budget: None,
            run: hopf_thresholds,
        },
        Criterion {
            id: 4,
            name: "hopf diagnostics",
            budget: None,
            run: hopf_diagnostics,
        },
        Criterion {
            id: 5,
            name: "pitchfork scaling",
            budget: None,
            run: pitchfork_scaling,
        },
        Criterion {
            id: 6,
            name: "dissipativity",
            budget: Some(Duration::from_secs(30)),
            run: dissipativity,
        },
        Criterion {
            id: 7,
            name: "global attraction below threshold",
            budget: None,
            run: global_attraction,
        },
        Criterion {
            id: 8,
            name: "chaotic regime",
            budget: Some(Duration::from_secs(60)),
            run: chaos_regime,
        },
        Criterion {
            id: 9,
            name: "rk4 order",
            budget: None,
            run: integrator_order,
        },
        Criterion {
            id: 10,
            name: "equivariance",
            budget: None,
            run: equivariance,
        },
        Criterion {
            id: 11,
            name: "cli determinism",
            budget: None,
            run: cli_determinism,
        },
    ];

    let mut failed = 0;
    for c in &criteria {
        let start = Instant::now();
        let mut outcome = (c.run)();
        let elapsed = start.elapsed();
        if let (Ok(_), Some(limit)) = (&outcome, c.budget) {
            if elapsed > limit {
                outcome = Err(format!("took {elapsed:.2?}, budget {limit:?}").into());
            }
        }
        let (verdict, detail) = match outcome {
            Ok(d) => ("PASS", d),
            Err(d) => {
                failed += 1;
                ("FAIL", d.to_string())
            }
        };
        println!(
            "{verdict} [{:>2}] {:<34} {detail} ({elapsed:.2?})",
            c.id, c.name
        );
    }
    println!(
        "{} of {} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
