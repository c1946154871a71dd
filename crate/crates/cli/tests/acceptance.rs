//! End-to-end acceptance checks, run without the test harness. Each check
//! prints one pass/fail line with its measured value and runtime; the
//! process exits nonzero if any check fails.

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, PI, SQRT_2};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use fdw_core::asymptotics::{late_time_expansion, COLLISION_TOL};
use fdw_core::forward::{
    caputo_residual, duhamel_mode, interior_points, observe, CaputoGrid, ObservationSet,
    ProblemSpec, Solver,
};
use fdw_core::inverse::{
    default_terms, nonuniqueness_witness, reconstruct, simultaneous_reconstruct, WitnessOrder,
};
use fdw_core::ode_lab::{observe_scalar, recover_scalar, DEFAULT_MOMENTS};
use fdw_core::source_profile::admissible_alpha;
use fdw_core::special::{MittagLeffler, MlOrderPair};
use fdw_core::{Error, FractionalOrder, Piece, SourceProfile, SpatialField, SpectralOperator};

type Check = Result<String, String>;

const OMEGA: (f64, f64) = (0.2, 0.5);

fn order(a: f64) -> FractionalOrder {
    FractionalOrder::new(a).unwrap()
}

fn log_times(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| lo * (hi / lo).powf(i as f64 / (n - 1) as f64))
        .collect()
}

fn unit_mu() -> SourceProfile {
    SourceProfile::constant(1.0, 0.0, 1.0, 1.0).unwrap()
}

/// μ = 1 − 2s on (0, 1): zero mean, so ℓ₀ = 1.
fn linear_mu() -> SourceProfile {
    SourceProfile::new(
        vec![Piece {
            start: 0.0,
            end: 1.0,
            coeffs: vec![1.0, -2.0],
        }],
        1.0,
    )
    .unwrap()
}

fn mu_with_index(ell0: usize) -> SourceProfile {
    if ell0 == 0 {
        unit_mu()
    } else {
        linear_mu()
    }
}

fn problem(alpha: f64, a: &[f64], b: Option<&[f64]>, f: &[f64], mu: SourceProfile) -> ProblemSpec {
    ProblemSpec::new(
        order(alpha),
        SpectralOperator::dirichlet_laplacian_1d(1.0, a.len()).unwrap(),
        SpatialField::new(a.to_vec()),
        b.map(|b| SpatialField::new(b.to_vec())),
        SpatialField::new(f.to_vec()),
        mu,
    )
    .unwrap()
}

fn data_spec(alpha: f64, modes: usize, mu: SourceProfile) -> ProblemSpec {
    let a = [1.0, 0.5, 0.25];
    let b = [0.7, -0.4, 0.2];
    let f = [0.8, -0.6, 0.3];
    problem(
        alpha,
        &a[..modes],
        (alpha > 1.0).then(|| &b[..modes]),
        &f[..modes],
        mu,
    )
}

fn loglog_slope(ts: &[f64], ys: &[f64]) -> f64 {
    let n = ts.len() as f64;
    let lx: Vec<f64> = ts.iter().map(|t| t.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    sxy / sxx
}

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn classical_identities() -> Check {
    let exp_ml = MittagLeffler::new(MlOrderPair::new(1.0, 1.0).unwrap());
    let cos_ml = MittagLeffler::new(MlOrderPair::new(2.0, 1.0).unwrap());
    let mut exp_diff = 0.0f64;
    let mut cos_diff = 0.0f64;
    for i in 0..200 {
        let x = 50.0 * i as f64 / 199.0;
        let v = exp_ml.eval(-x).map_err(|e| e.to_string())?.value;
        exp_diff = exp_diff.max((v - (-x).exp()).abs());
        for r in [0.5, 1.0, 3.0] {
            let t = (30.0 / r) * i as f64 / 199.0;
            let c = cos_ml
                .eval(-(r * t) * (r * t))
                .map_err(|e| e.to_string())?
                .value;
            cos_diff = cos_diff.max((c - (r * t).cos()).abs());
        }
    }
    ensure(exp_diff <= 1e-10, || {
        format!("exp identity off by {exp_diff:e}")
    })?;
    ensure(cos_diff <= 1e-9, || {
        format!("cos identity off by {cos_diff:e}")
    })?;
    Ok(format!(
        "max diffs {exp_diff:.1e} (exp), {cos_diff:.1e} (cos)"
    ))
}

fn duhamel_closed_forms() -> Check {
    let mut worst = 0.0f64;
    for horizon in [1.0, 2.5] {
        let mu = SourceProfile::constant(1.0, 0.0, horizon, horizon).unwrap();
        let times: Vec<f64> = (1..=200)
            .map(|i| horizon + 9.0 * horizon * i as f64 / 200.0)
            .collect();
        for lambda in [0.5, 1.0, 3.0] {
            for &t in &times {
                let d = duhamel_mode(lambda, order(1.0), &mu, t).map_err(|e| e.to_string())?;
                let exact = (-lambda * t).exp() * (lambda * horizon).exp_m1() / lambda;
                worst = worst.max((d - exact).abs() / exact.abs());
            }
        }
        for r in [0.5, 1.0, 2.0] {
            for &t in &times {
                let d = duhamel_mode(r * r, order(2.0), &mu, t).map_err(|e| e.to_string())?;
                let exact = ((r * (horizon - t)).cos() - (r * t).cos()) / (r * r);
                worst = worst.max((d - exact).abs() / exact.abs());
            }
        }
    }
    ensure(worst <= 1e-9, || format!("relative deviation {worst:e}"))?;
    Ok(format!("max relative deviation {worst:.1e}"))
}

fn asymptotic_fidelity() -> Check {
    let cases: [(f64, &[f64], Option<&[f64]>, usize); 3] = [
        (0.4, &[1.0, 0.5], None, 2),
        (FRAC_1_SQRT_2, &[1.0, 0.5], None, 2),
        (1.6, &[0.1, 0.05], Some(&[1.0, 0.5]), 1),
    ];
    let mut out = Vec::new();
    for (alpha, a, b, n) in cases {
        let s = problem(alpha, a, b, &[0.1, 0.1], unit_mu());
        let exp = late_time_expansion(&s, n, COLLISION_TOL).map_err(|e| e.to_string())?;
        let solver = Solver::new(s.clone());
        let ts = log_times(8.0, 512.0, 16);
        let errs = ts
            .iter()
            .map(|&t| solver.solve(t).map(|u| u.sub(&exp.eval_spectral(t)).norm()))
            .collect::<Result<Vec<f64>, Error>>()
            .map_err(|e| e.to_string())?;
        let slope = loglog_slope(&ts, &errs);
        let predicted = -exp.error_exponent;
        ensure((slope - predicted).abs() <= 0.1, || {
            format!("alpha {alpha}: slope {slope:.4} vs predicted {predicted:.4}")
        })?;
        out.push(format!("{alpha:.3}: {slope:.3}/{predicted:.3}"));
    }
    Ok(format!("slopes (observed/predicted) {}", out.join(", ")))
}

fn recovery() -> Check {
    let times = log_times(8.0, 2048.0, 64);
    let op = SpectralOperator::dirichlet_laplacian_1d(1.0, 3).unwrap();
    let points = interior_points(OMEGA.0, OMEGA.1, 7);
    let zero = ObservationSet {
        values: vec![vec![0.0; times.len()]; points.len()],
        points,
        times: times.clone(),
        noise_sigma: 0.0,
        seed: None,
    };
    let mut zero_worst = 0.0f64;
    for alpha in [0.4, FRAC_1_SQRT_2, 0.9, 1.3, SQRT_2, 1.9] {
        for ell0 in [0, 1] {
            let o = order(alpha);
            if !admissible_alpha(o, ell0, COLLISION_TOL).admissible {
                continue;
            }
            let r = reconstruct(
                &zero,
                o,
                &op,
                &mu_with_index(ell0),
                default_terms(o, ell0),
                3,
            )
            .map_err(|e| format!("zero data at ({alpha}, {ell0}): {e}"))?;
            let b = r.b_hat.as_ref().map_or(0.0, |b| b.norm());
            zero_worst = zero_worst.max(r.a_hat.norm()).max(b).max(r.f_hat.norm());
        }
    }
    ensure(zero_worst < 1e-8, || {
        format!("zero data recovered norm {zero_worst:e}")
    })?;

    let combos = [
        (0.4, 0),
        (FRAC_1_SQRT_2, 0),
        (FRAC_1_SQRT_2, 1),
        (0.9, 1),
        (1.3, 0),
        (SQRT_2, 0),
    ];
    let mut worst = 0.0f64;
    for modes in [2, 3] {
        for (alpha, ell0) in combos {
            let s = data_spec(alpha, modes, mu_with_index(ell0));
            let obs = observe(&s, OMEGA, &times, None).map_err(|e| e.to_string())?;
            let r = reconstruct(
                &obs,
                s.alpha,
                &s.op,
                &s.mu,
                default_terms(s.alpha, ell0),
                modes,
            )
            .map_err(|e| format!("({alpha}, {ell0}, {modes} modes): {e}"))?;
            let rel = |x: &SpatialField, y: &SpatialField| x.sub(y).norm() / y.norm();
            let mut e = rel(&r.a_hat, &s.a).max(rel(&r.f_hat, &s.f));
            if let (Some(x), Some(y)) = (&r.b_hat, &s.b) {
                e = e.max(rel(x, y));
            }
            ensure(e < 1e-3, || {
                format!("({alpha}, {ell0}, {modes} modes): relative error {e:e}")
            })?;
            worst = worst.max(e);
        }
    }
    Ok(format!(
        "zero data {zero_worst:.1e}, worst round-trip relative error {worst:.1e}"
    ))
}

fn scaling_ambiguity() -> Check {
    let times = log_times(8.0, 2048.0, 64);
    let mut out = Vec::new();
    for alpha in [FRAC_1_SQRT_2, SQRT_2] {
        let s = data_spec(alpha, 2, unit_mu());
        let mut s2 = s.clone();
        s2.f = s.f.scaled(2.0);
        s2.mu = s.mu.scaled(0.5).map_err(|e| e.to_string())?;
        let obs = observe(&s, OMEGA, &times, None).map_err(|e| e.to_string())?;
        let obs2 = observe(&s2, OMEGA, &times, None).map_err(|e| e.to_string())?;
        let diff = obs
            .values
            .iter()
            .flatten()
            .zip(obs2.values.iter().flatten())
            .fold(0.0f64, |m, (u, v)| {
                m.max((u - v).abs() / u.abs().max(f64::MIN_POSITIVE))
            });
        ensure(diff <= 1e-12, || {
            format!("alpha {alpha}: observations differ by {diff:e}")
        })?;
        let rep = simultaneous_reconstruct(
            &obs,
            &obs2,
            s.alpha,
            &s.op,
            &s.mu,
            &s2.mu,
            default_terms(s.alpha, 0),
            2,
        )
        .map_err(|e| e.to_string())?;
        ensure((rep.f_ratio - 2.0).abs() <= 1e-3, || {
            format!("alpha {alpha}: f ratio {}", rep.f_ratio)
        })?;
        out.push(format!("{:.6}", rep.f_ratio));
    }
    Ok(format!("f ratios {}", out.join(", ")))
}

fn witness_contrast() -> Check {
    let witnesses = [
        nonuniqueness_witness(WitnessOrder::One, 1.0, 1.0),
        nonuniqueness_witness(WitnessOrder::One, 2.0, 0.5),
        nonuniqueness_witness(WitnessOrder::Two, 1.0, PI),
        nonuniqueness_witness(WitnessOrder::Two, 2.0, FRAC_PI_2),
    ];
    let (mut classical_max, mut contrast_min) = (0.0f64, f64::INFINITY);
    for w in witnesses {
        let w = w.map_err(|e| e.to_string())?;
        let times: Vec<f64> = (0..200)
            .map(|i| w.horizon + 0.1 + (9.0 * w.horizon - 0.1) * i as f64 / 199.0)
            .collect();
        let classical = match w.order {
            WitnessOrder::One => 1.0,
            WitnessOrder::Two => 2.0,
        };
        let peak = |alpha: f64| -> Result<f64, String> {
            let tail = w.tail(order(alpha), &times).map_err(|e| e.to_string())?;
            Ok(tail.iter().fold(0.0f64, |m, u| m.max(u.abs())))
        };
        classical_max = classical_max.max(peak(classical)?);
        contrast_min = contrast_min.min(peak(FRAC_1_SQRT_2)?);
    }
    ensure(classical_max < 1e-10, || {
        format!("classical tail {classical_max:e}")
    })?;
    ensure(contrast_min > 1e-3, || {
        format!("fractional tail {contrast_min:e}")
    })?;
    Ok(format!(
        "classical max {classical_max:.1e}, fractional min of max {contrast_min:.2e}"
    ))
}

fn excluded_orders() -> Check {
    let times = log_times(8.0, 2048.0, 64);
    for (alpha, ell0) in [(0.5, 0), (1.5, 1)] {
        let s = data_spec(alpha, 2, mu_with_index(ell0));
        ensure(
            !admissible_alpha(s.alpha, ell0, COLLISION_TOL).admissible,
            || format!("({alpha}, {ell0}) reported admissible"),
        )?;
        let obs = observe(&s, OMEGA, &times, None).map_err(|e| e.to_string())?;
        match reconstruct(&obs, s.alpha, &s.op, &s.mu, 6, 2) {
            Err(Error::InadmissibleAlpha { .. }) | Err(Error::ExponentCollision { .. }) => {}
            other => return Err(format!("({alpha}, {ell0}): reconstruct gave {other:?}")),
        }
        match late_time_expansion(&s, 4, COLLISION_TOL) {
            Err(Error::ExponentCollision { .. }) => {}
            other => {
                return Err(format!(
                    "({alpha}, {ell0}): expansion gave {:?}",
                    other.map(|e| e.exponents())
                ))
            }
        }
    }
    Ok("both excluded orders refused".into())
}

fn scalar_recovery() -> Check {
    let times = log_times(8.0, 2048.0, 64);
    let mu = linear_mu();
    let (lambda, a) = (2.0, 1.0);
    let mut worst = 0.0f64;
    for (alpha, b) in [(FRAC_1_SQRT_2, 0.0), (SQRT_2, 0.7), (0.4, 0.0), (1.3, 0.7)] {
        let o = order(alpha);
        let obs = observe_scalar(o, lambda, a, b, &mu, &times, None).map_err(|e| e.to_string())?;
        let r = recover_scalar(&times, &obs.values[0], o, lambda, 1.0, DEFAULT_MOMENTS)
            .map_err(|e| e.to_string())?;
        let mut errs = vec![
            (r.a_hat - a).abs(),
            (r.moments[0] - mu.moment(0)).abs(),
            (r.moments[1] - mu.moment(1)).abs(),
        ];
        if let Some(bh) = r.b_hat {
            errs.push((bh - b).abs());
        }
        let e = errs.iter().fold(0.0f64, |m, v| m.max(*v));
        ensure(e < 1e-3, || format!("alpha {alpha}: error {e:e}"))?;
        worst = worst.max(e);
    }
    let mut zero_worst = 0.0f64;
    for alpha in [FRAC_1_SQRT_2, SQRT_2, 0.4, 1.3] {
        let r = recover_scalar(
            &times,
            &vec![0.0; times.len()],
            order(alpha),
            lambda,
            1.0,
            DEFAULT_MOMENTS,
        )
        .map_err(|e| e.to_string())?;
        zero_worst = r
            .moments
            .iter()
            .chain([r.a_hat, r.b_hat.unwrap_or(0.0)].iter())
            .fold(zero_worst, |m, v| m.max(v.abs()));
    }
    ensure(zero_worst < 1e-8, || {
        format!("zero data estimate {zero_worst:e}")
    })?;
    Ok(format!(
        "worst error {worst:.1e}, zero data {zero_worst:.1e}"
    ))
}

fn caputo_convergence() -> Check {
    let op = SpectralOperator::dirichlet_laplacian_1d(PI, 1).unwrap();
    let s = ProblemSpec::new(
        order(0.5),
        op,
        SpatialField::new(vec![1.0]),
        None,
        SpatialField::zeros(1),
        unit_mu(),
    )
    .map_err(|e| e.to_string())?;
    let xs = [0.5, 1.0, 1.5];
    let mut prev = f64::INFINITY;
    let mut ratios = Vec::new();
    for steps in [250, 500, 1000, 2000] {
        let r = caputo_residual(
            &s,
            &xs,
            CaputoGrid {
                horizon: 1.0,
                steps,
                from: 0.1,
            },
        )
        .map_err(|e| e.to_string())?;
        if prev.is_finite() {
            let ratio = prev / r;
            ensure(ratio >= 1.5, || {
                format!("ratio {ratio:.3} at {steps} steps")
            })?;
            ratios.push(format!("{ratio:.2}"));
        }
        prev = r;
    }
    Ok(format!("halving ratios {}", ratios.join(", ")))
}

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn run_cli(args: &[&str], out: &Path) -> Result<(), String> {
    let status = Command::new(env!("CARGO_BIN_EXE_fdw"))
        .args(args)
        .arg("--out")
        .arg(out)
        .output()
        .map_err(|e| e.to_string())?;
    ensure(status.status.success(), || {
        format!(
            "{args:?}: {}",
            String::from_utf8_lossy(&status.stderr).trim()
        )
    })
}

fn files(dir: &Path) -> Vec<PathBuf> {
    let mut out = Vec::new();
    for entry in std::fs::read_dir(dir).unwrap() {
        let path = entry.unwrap().path();
        if path.is_dir() {
            out.extend(files(&path));
        } else {
            out.push(path);
        }
    }
    out.sort();
    out
}

fn determinism() -> Check {
    let runs: [(&str, &str, &[&str]); 3] = [
        ("forward", "noisy-forward.json", &["--seed", "7"]),
        ("invert", "round-trip.json", &[]),
        (
            "ode-lab",
            "scalar.json",
            &["--noise", "1e-9", "--seed", "3"],
        ),
    ];
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut compared = 0;
    for (i, (cmd, config, extra)) in runs.iter().enumerate() {
        let cfg = configs().join(config);
        let mut args = vec![*cmd, "--config", cfg.to_str().unwrap()];
        args.extend_from_slice(extra);
        let (d1, d2) = (
            tmp.path().join(format!("{i}a")),
            tmp.path().join(format!("{i}b")),
        );
        run_cli(&args, &d1)?;
        run_cli(&args, &d2)?;
        let (f1, f2) = (files(&d1), files(&d2));
        ensure(f1.len() == f2.len() && !f1.is_empty(), || {
            format!("{cmd}: different file sets")
        })?;
        for (p, q) in f1.iter().zip(&f2) {
            let (x, y) = (std::fs::read(p).unwrap(), std::fs::read(q).unwrap());
            ensure(x == y, || format!("{} differs between runs", p.display()))?;
            compared += 1;
        }
    }
    Ok(format!("{compared} files byte-identical"))
}

fn main() {
    let checks: [(&str, u64, fn() -> Check); 10] = [
        (
            "classical Mittag-Leffler identities",
            1,
            classical_identities,
        ),
        (
            "source integral closed forms at classical orders",
            5,
            duhamel_closed_forms,
        ),
        ("late-time remainder slopes", 30, asymptotic_fidelity),
        ("zero data and round-trip recovery", 120, recovery),
        ("source scaling ambiguity", 60, scaling_ambiguity),
        ("non-uniqueness witnesses", 30, witness_contrast),
        ("excluded orders", 1, excluded_orders),
        ("scalar recovery", 30, scalar_recovery),
        ("Caputo residual convergence", 60, caputo_convergence),
        ("determinism of CLI outputs", 120, determinism),
    ];
    let mut failed = 0;
    for (i, (name, budget, check)) in checks.iter().enumerate() {
        let start = Instant::now();
        let result = check();
        let elapsed = start.elapsed();
        let verdict = match result {
            Ok(detail) if elapsed <= Duration::from_secs(*budget) => format!("PASS {detail}"),
            Ok(detail) => format!("FAIL over {budget} s budget; {detail}"),
            Err(reason) => format!("FAIL {reason}"),
        };
        if verdict.starts_with("FAIL") {
            failed += 1;
        }
        println!(
            "acceptance [{:>2}] {name}: {verdict} ({:.2} s)",
            i + 1,
            elapsed.as_secs_f64()
        );
    }
    println!(
        "acceptance: {} passed, {failed} failed",
        checks.len() - failed
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
