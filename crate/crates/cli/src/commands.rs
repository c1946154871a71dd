//! One function per subcommand. Each returns the files to write and a one
//! line summary used by multi-case runs.

use std::fmt::Write as _;

use fdw_core::asymptotics::{late_time_expansion, COLLISION_TOL};
use fdw_core::forward::{
    add_noise, caputo_residual, duhamel_mode, fmt_f64, interior_points, observe, CaputoGrid,
    ObservationSet, ProblemSpec, Solver,
};
use fdw_core::inverse::{
    default_terms, nonuniqueness_witness, reconstruct, simultaneous_reconstruct, WitnessOrder,
};
use fdw_core::ode_lab::{point_observation_recover, recover_scalar};
use fdw_core::source_profile::{admissible_alpha, pair_leading_index, MOMENT_TOL};
use fdw_core::special::{MittagLeffler, MlOrderPair};
use fdw_core::{FractionalOrder, Regime, SourceProfile, SpatialField, SpectralOperator};

use crate::config::{Experiment, MlTask, Second};
use crate::error::{CliError, CliResult};

pub const EXP_TOL: f64 = 1e-10;
pub const COS_TOL: f64 = 1e-9;

pub struct Output {
    pub files: Vec<(&'static str, String)>,
    pub summary: String,
}

fn max_abs(values: impl IntoIterator<Item = f64>) -> f64 {
    values.into_iter().fold(0.0, |m, v| m.max(v.abs()))
}

fn status(ok: bool) -> &'static str {
    if ok {
        "pass"
    } else {
        "fail"
    }
}

pub fn ml_eval(exp: &Experiment) -> CliResult<Output> {
    let mut report = String::new();
    let mut csv = String::new();
    let summary = match &exp.ml {
        MlTask::Values { pair, z } => {
            let ml = MittagLeffler::new(*pair);
            csv.push_str("z,value,abs_error_bound,branch\n");
            let mut worst = 0.0f64;
            for &z in z {
                let ev = ml.eval(z)?;
                worst = worst.max(ev.abs_error_bound);
                let _ = writeln!(
                    csv,
                    "{},{},{},{:?}",
                    fmt_f64(z),
                    fmt_f64(ev.value),
                    fmt_f64(ev.abs_error_bound),
                    ev.branch
                );
            }
            let _ = writeln!(report, "beta: {}", fmt_f64(pair.beta()));
            let _ = writeln!(report, "gamma: {}", fmt_f64(pair.gamma()));
            let _ = writeln!(report, "arguments: {}", z.len());
            let _ = writeln!(report, "max error bound: {}", fmt_f64(worst));
            format!(
                "ml-eval beta={} max_bound={}",
                fmt_f64(pair.beta()),
                fmt_f64(worst)
            )
        }
        &MlTask::Identities {
            points,
            x_max,
            r,
            t_max,
        } => {
            let exp_ml = MittagLeffler::new(MlOrderPair::new(1.0, 1.0)?);
            let cos_ml = MittagLeffler::new(MlOrderPair::new(2.0, 1.0)?);
            csv.push_str("identity,arg,value,reference,abs_diff\n");
            let step = |hi: f64, i: usize| hi * i as f64 / (points - 1) as f64;
            let mut exp_diff = 0.0f64;
            for i in 0..points {
                let x = step(x_max, i);
                let v = exp_ml.eval(-x)?.value;
                let e = (-x).exp();
                exp_diff = exp_diff.max((v - e).abs());
                let _ = writeln!(
                    csv,
                    "exp,{},{},{},{}",
                    fmt_f64(x),
                    fmt_f64(v),
                    fmt_f64(e),
                    fmt_f64((v - e).abs())
                );
            }
            let mut cos_diff = 0.0f64;
            for i in 0..points {
                let t = step(t_max, i);
                let v = cos_ml.eval(-(r * t) * (r * t))?.value;
                let c = (r * t).cos();
                cos_diff = cos_diff.max((v - c).abs());
                let _ = writeln!(
                    csv,
                    "cos,{},{},{},{}",
                    fmt_f64(t),
                    fmt_f64(v),
                    fmt_f64(c),
                    fmt_f64((v - c).abs())
                );
            }
            let _ = writeln!(report, "points per identity: {points}");
            let _ = writeln!(
                report,
                "max |E_1,1(-x) - exp(-x)| on [0, {}]: {} (tolerance {}, {})",
                fmt_f64(x_max),
                fmt_f64(exp_diff),
                fmt_f64(EXP_TOL),
                status(exp_diff <= EXP_TOL)
            );
            let _ = writeln!(
                report,
                "max |E_2,1(-r^2 t^2) - cos rt| for r = {} on [0, {}]: {} (tolerance {}, {})",
                fmt_f64(r),
                fmt_f64(t_max),
                fmt_f64(cos_diff),
                fmt_f64(COS_TOL),
                status(cos_diff <= COS_TOL)
            );
            format!(
                "ml-eval exp_diff={} cos_diff={}",
                fmt_f64(exp_diff),
                fmt_f64(cos_diff)
            )
        }
    };
    Ok(Output {
        files: vec![("ml.csv", csv), ("report.txt", report)],
        summary,
    })
}

fn describe(report: &mut String, spec: &ProblemSpec) {
    let _ = writeln!(report, "alpha: {}", fmt_f64(spec.alpha.value()));
    let _ = writeln!(report, "modes: {}", spec.modes());
    let _ = writeln!(report, "horizon: {}", fmt_f64(spec.horizon()));
}

fn describe_obs(report: &mut String, obs: &ObservationSet) {
    let _ = writeln!(report, "observation points: {}", obs.points.len());
    let _ = writeln!(report, "observation times: {}", obs.times.len());
    let _ = writeln!(report, "noise sigma: {}", fmt_f64(obs.noise_sigma));
    if let Some(seed) = obs.seed {
        let _ = writeln!(report, "seed: {seed}");
    }
}

pub fn forward(exp: &Experiment) -> CliResult<Output> {
    let spec = exp.spec()?;
    let obs = observe(spec, exp.omega()?, exp.times()?, Some(exp.noise))?;
    let mut report = String::new();
    describe(&mut report, spec);
    describe_obs(&mut report, &obs);
    let peak = max_abs(obs.values.iter().flatten().copied());
    let _ = writeln!(report, "max |u|: {}", fmt_f64(peak));
    let mut summary = format!(
        "forward alpha={} max_abs={}",
        fmt_f64(spec.alpha.value()),
        fmt_f64(peak)
    );
    let mut files = vec![("observations.csv", obs.to_csv())];
    if let Some(c) = &exp.caputo {
        let xs = interior_points(0.0, spec.op.length(), c.points);
        let mut csv = String::from("steps,h,residual\n");
        let mut prev: Option<(usize, f64)> = None;
        let mut min_ratio = f64::INFINITY;
        for &steps in &c.steps {
            let grid = CaputoGrid {
                horizon: c.horizon,
                steps,
                from: c.from,
            };
            let res = caputo_residual(spec, &xs, grid)?;
            let h = c.horizon / steps as f64;
            let _ = writeln!(csv, "{steps},{},{}", fmt_f64(h), fmt_f64(res));
            let _ = writeln!(report, "caputo residual, {steps} steps: {}", fmt_f64(res));
            if let Some((p, r)) = prev {
                let ratio = r / res;
                min_ratio = min_ratio.min(ratio);
                let _ = writeln!(
                    report,
                    "caputo ratio {p} -> {steps} steps: {}",
                    fmt_f64(ratio)
                );
            }
            prev = Some((steps, res));
        }
        if min_ratio.is_finite() {
            let _ = writeln!(report, "caputo min ratio: {}", fmt_f64(min_ratio));
            let _ = write!(summary, " caputo_min_ratio={}", fmt_f64(min_ratio));
        }
        files.push(("caputo.csv", csv));
    }
    files.push(("report.txt", report));
    Ok(Output { files, summary })
}

fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| lo * (hi / lo).powf(i as f64 / (n - 1) as f64))
        .collect()
}

/// Least-squares slope of log y against log t; `None` if some y is not
/// positive.
pub fn loglog_slope(ts: &[f64], ys: &[f64]) -> Option<f64> {
    if ys.iter().any(|y| !(*y > 0.0)) {
        return None;
    }
    let n = ts.len() as f64;
    let lx: Vec<f64> = ts.iter().map(|t| t.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    Some(sxy / sxx)
}

fn join(values: &[f64]) -> String {
    values
        .iter()
        .map(|v| fmt_f64(*v))
        .collect::<Vec<_>>()
        .join(" ")
}

pub fn expand(exp: &Experiment) -> CliResult<Output> {
    let spec = exp.spec()?;
    let cfg = exp.expand.as_ref().ok_or(CliError::Missing("expand"))?;
    let expansion = late_time_expansion(spec, cfg.terms, COLLISION_TOL)?;
    let t = spec.horizon();
    let [lo, hi] = cfg.window.unwrap_or([8.0 * t, 512.0 * t]);
    if !(lo > 2.0 * t) {
        return Err(CliError::invalid(
            "expand.window",
            format!("must start beyond 2T = {}", 2.0 * t),
        ));
    }
    let ts = log_grid(lo, hi, cfg.samples);
    let solver = Solver::new(spec.clone());
    let mut remainder = String::from("t,remainder_norm\n");
    let mut errs = Vec::with_capacity(ts.len());
    for &t in &ts {
        let e = solver.solve(t)?.sub(&expansion.eval_spectral(t)).norm();
        let _ = writeln!(remainder, "{},{}", fmt_f64(t), fmt_f64(e));
        errs.push(e);
    }
    let predicted = -expansion.error_exponent;
    let slope = loglog_slope(&ts, &errs);
    let mut report = String::new();
    describe(&mut report, spec);
    let _ = writeln!(report, "terms per family: {}", cfg.terms);
    let _ = writeln!(report, "exponents: {}", join(&expansion.exponents()));
    let _ = writeln!(
        report,
        "error exponent: {}",
        fmt_f64(expansion.error_exponent)
    );
    let _ = writeln!(report, "min exponent gap: {}", fmt_f64(expansion.min_gap));
    let _ = writeln!(report, "slope window: [{}, {}]", fmt_f64(lo), fmt_f64(hi));
    let _ = writeln!(report, "predicted slope: {}", fmt_f64(predicted));
    let summary = match slope {
        Some(s) => {
            let _ = writeln!(report, "observed slope: {}", fmt_f64(s));
            let _ = writeln!(
                report,
                "slope deviation: {}",
                fmt_f64((s - predicted).abs())
            );
            format!(
                "expand alpha={} slope={} predicted={}",
                fmt_f64(spec.alpha.value()),
                fmt_f64(s),
                fmt_f64(predicted)
            )
        }
        None => {
            let _ = writeln!(report, "observed slope: undefined (zero remainder)");
            format!(
                "expand alpha={} slope=undefined",
                fmt_f64(spec.alpha.value())
            )
        }
    };
    Ok(Output {
        files: vec![
            ("expansion.csv", expansion.to_csv()),
            ("remainder.csv", remainder),
            ("report.txt", report),
        ],
        summary,
    })
}

/// ‖x̂ − x‖ and, when x ≠ 0, ‖x̂ − x‖ / ‖x‖.
fn field_error(report: &mut String, name: &str, got: &SpatialField, truth: &SpatialField) -> f64 {
    let truth = truth.resized(got.modes());
    let abs = got.sub(&truth).norm();
    let norm = truth.norm();
    if norm > 0.0 {
        let rel = abs / norm;
        let _ = writeln!(
            report,
            "error {name}: {} (relative {})",
            fmt_f64(abs),
            fmt_f64(rel)
        );
        rel
    } else {
        let _ = writeln!(report, "error {name}: {}", fmt_f64(abs));
        abs
    }
}

pub fn invert(exp: &Experiment, observations: Option<ObservationSet>) -> CliResult<Output> {
    let alpha = exp.alpha()?;
    let op = exp.op()?;
    let mu = exp.mu()?;
    let obs = match observations {
        Some(o) => o,
        None => observe(exp.spec()?, exp.omega()?, exp.times()?, Some(exp.noise))?,
    };
    let (ell0, _) = mu.leading_index(MOMENT_TOL)?;
    let terms = exp.terms.unwrap_or_else(|| default_terms(alpha, ell0));
    let modes = exp.modes.unwrap_or(op.modes());
    let rep = reconstruct(&obs, alpha, op, mu, terms, modes)?;
    let mut report = String::new();
    let _ = writeln!(report, "alpha: {}", fmt_f64(alpha.value()));
    let _ = writeln!(report, "leading moment index: {ell0}");
    let _ = writeln!(report, "modes recovered: {modes}");
    describe_obs(&mut report, &obs);
    report.push_str(&rep.to_report());
    let mut summary = format!(
        "invert alpha={} ell0={ell0} modes={modes}",
        fmt_f64(alpha.value())
    );
    if let Some(spec) = &exp.spec {
        let mut worst = field_error(&mut report, "a", &rep.a_hat, &spec.a);
        if let Some(b) = &rep.b_hat {
            worst = worst.max(field_error(&mut report, "b", b, &spec.b_or_zero()));
        }
        worst = worst.max(field_error(&mut report, "f", &rep.f_hat, &spec.f));
        let _ = writeln!(report, "max error: {}", fmt_f64(worst));
        let _ = write!(summary, " max_error={}", fmt_f64(worst));
    }
    Ok(Output {
        files: vec![
            ("observations.csv", obs.to_csv()),
            ("recovery.csv", rep.to_csv(exp.spec.as_ref())),
            ("report.txt", report),
        ],
        summary,
    })
}

pub fn simul_invert(exp: &Experiment) -> CliResult<Output> {
    let spec = exp.spec()?;
    let second = exp.second.as_ref().ok_or(CliError::Missing("second"))?;
    let mut spec2 = spec.clone();
    match second {
        Second::Scale(c) => {
            spec2.f = spec.f.scaled(*c);
            spec2.mu = spec.mu.scaled(1.0 / c)?;
        }
        Second::Data { f, mu } => {
            if let Some(f) = f {
                spec2.f = f.resized(spec.modes());
            }
            if let Some(mu) = mu {
                spec2.mu = mu.clone();
            }
        }
    }
    if spec2.mu.horizon() != spec.mu.horizon() {
        return Err(CliError::invalid(
            "second.mu",
            "must share the horizon of mu",
        ));
    }
    let (omega, times) = (exp.omega()?, exp.times()?);
    let obs = observe(spec, omega, times, Some(exp.noise))?;
    let mut noise2 = exp.noise;
    noise2.seed = noise2.seed.wrapping_add(1);
    let obs2 = observe(&spec2, omega, times, Some(noise2))?;
    let ell1 = pair_leading_index(&spec.mu, &spec2.mu, MOMENT_TOL)?;
    let terms = exp.terms.unwrap_or_else(|| default_terms(spec.alpha, ell1));
    let modes = exp.modes.unwrap_or(spec.modes());
    let rep = simultaneous_reconstruct(
        &obs, &obs2, spec.alpha, &spec.op, &spec.mu, &spec2.mu, terms, modes,
    )?;
    let obs_diff = obs
        .values
        .iter()
        .flatten()
        .zip(obs2.values.iter().flatten())
        .filter(|(u, _)| **u != 0.0)
        .fold(0.0f64, |m, (u, v)| m.max((u - v).abs() / u.abs()));

    let mut report = String::new();
    describe(&mut report, spec);
    let _ = writeln!(report, "pair leading moment index: {ell1}");
    let _ = writeln!(
        report,
        "terms per family: {}",
        rep.first.terms.min(rep.second.terms)
    );
    let _ = writeln!(
        report,
        "max relative observation difference: {}",
        fmt_f64(obs_diff)
    );
    let _ = writeln!(report, "f ratio: {}", fmt_f64(rep.f_ratio));
    let _ = writeln!(
        report,
        "f ratio residual: {}",
        fmt_f64(rep.f_ratio_residual)
    );
    let _ = writeln!(report, "norm a difference: {}", fmt_f64(rep.a_diff_norm));
    if let Some(b) = rep.b_diff_norm {
        let _ = writeln!(report, "norm b difference: {}", fmt_f64(b));
    }
    let _ = writeln!(
        report,
        "relation residuals: {}",
        join(&rep.relation_residuals)
    );

    let mut csv = String::from("field,mode,first,second\n");
    let mut rows = vec![("a", &rep.first.a_hat, &rep.second.a_hat)];
    if let (Some(x), Some(y)) = (&rep.first.b_hat, &rep.second.b_hat) {
        rows.push(("b", x, y));
    }
    rows.push(("f", &rep.first.f_hat, &rep.second.f_hat));
    for (name, x, y) in rows {
        for (i, (u, v)) in x.coeffs.iter().zip(&y.coeffs).enumerate() {
            let _ = writeln!(csv, "{name},{},{},{}", i + 1, fmt_f64(*u), fmt_f64(*v));
        }
    }
    Ok(Output {
        files: vec![
            ("observations.csv", obs.to_csv()),
            ("observations-second.csv", obs2.to_csv()),
            ("recovery.csv", csv),
            ("report.txt", report),
        ],
        summary: format!(
            "simul-invert alpha={} f_ratio={} obs_diff={}",
            fmt_f64(spec.alpha.value()),
            fmt_f64(rep.f_ratio),
            fmt_f64(obs_diff)
        ),
    })
}

fn single_point(
    x: f64,
    times: &[f64],
    values: Vec<f64>,
    noise: fdw_core::forward::Noise,
) -> CliResult<ObservationSet> {
    let mut values = vec![values];
    let (noise_sigma, seed) = add_noise(&mut values, Some(noise))?;
    Ok(ObservationSet {
        points: vec![x],
        times: times.to_vec(),
        values,
        noise_sigma,
        seed,
    })
}

fn quantity_rows(csv: &mut String, rows: &[(String, f64, f64)]) -> f64 {
    let mut worst = 0.0f64;
    for (name, t, r) in rows {
        let e = (r - t).abs();
        worst = worst.max(e);
        let _ = writeln!(csv, "{name},{},{},{}", fmt_f64(*t), fmt_f64(*r), fmt_f64(e));
    }
    worst
}

pub fn ode_lab(exp: &Experiment) -> CliResult<Output> {
    let cfg = exp.ode.as_ref().ok_or(CliError::Missing("ode"))?;
    let times = exp.times()?;
    let mu = exp.mu()?;
    let mut report = String::new();
    let mut csv = String::from("quantity,true,recovered,abs_err\n");
    let mut rows = Vec::new();
    let (obs, summary) = match (cfg.x0, cfg.lambda) {
        (Some(x0), _) => {
            let spec = exp.spec()?;
            let solver = Solver::new(spec.clone());
            let values = times
                .iter()
                .map(|&t| solver.solve(t).map(|u| spec.op.eval(&u, x0)))
                .collect::<fdw_core::Result<Vec<f64>>>()?;
            let obs = single_point(x0, times, values, exp.noise)?;
            let rec = point_observation_recover(spec, x0, times, &obs.values[0], cfg.moments)?;
            describe(&mut report, spec);
            let _ = writeln!(report, "observation point: {}", fmt_f64(x0));
            let _ = writeln!(report, "condition: {}", fmt_f64(rec.condition));
            let _ = writeln!(report, "residual: {}", fmt_f64(rec.residual));
            for (l, m) in rec.moments.iter().enumerate() {
                rows.push((format!("mu{l}"), spec.mu.moment(l), *m));
            }
            (obs, format!("ode-lab point x0={}", fmt_f64(x0)))
        }
        (None, Some(lambda)) => {
            let alpha = exp.alpha()?;
            let super_ = alpha.regime() == Regime::Super;
            let amplitude = cfg.f;
            let spec = ProblemSpec::new(
                alpha,
                SpectralOperator::diagonal(vec![lambda], 1.0)?,
                SpatialField::new(vec![cfg.a]),
                super_.then(|| SpatialField::new(vec![cfg.b])),
                SpatialField::new(vec![amplitude]),
                mu.clone(),
            )?;
            let solver = Solver::new(spec);
            let values = times
                .iter()
                .map(|&t| solver.solve(t).map(|u| u.coeffs[0]))
                .collect::<fdw_core::Result<Vec<f64>>>()?;
            let obs = single_point(0.0, times, values, exp.noise)?;
            let rec = recover_scalar(
                times,
                &obs.values[0],
                alpha,
                lambda,
                mu.horizon(),
                cfg.moments,
            )?;
            let _ = writeln!(report, "alpha: {}", fmt_f64(alpha.value()));
            let _ = writeln!(report, "lambda: {}", fmt_f64(lambda));
            let _ = writeln!(report, "source amplitude: {}", fmt_f64(amplitude));
            let _ = writeln!(report, "condition: {}", fmt_f64(rec.condition));
            let _ = writeln!(report, "residual: {}", fmt_f64(rec.residual));
            rows.push(("a".to_string(), cfg.a, rec.a_hat));
            if let Some(b) = rec.b_hat {
                rows.push(("b".to_string(), cfg.b, b));
            }
            // the scalar fit sees the product of the amplitude and μ
            for (l, m) in rec.moments.iter().enumerate() {
                rows.push((format!("mu{l}"), amplitude * mu.moment(l), *m));
            }
            (
                obs,
                format!("ode-lab scalar alpha={}", fmt_f64(alpha.value())),
            )
        }
        (None, None) => return Err(CliError::invalid("ode", "set `lambda` or `x0`")),
    };
    describe_obs(&mut report, &obs);
    let worst = quantity_rows(&mut csv, &rows);
    for (name, _, r) in &rows {
        let _ = writeln!(report, "{name}: {}", fmt_f64(*r));
    }
    let _ = writeln!(report, "max abs error: {}", fmt_f64(worst));
    let errors: Vec<String> = rows
        .iter()
        .map(|(name, t, r)| format!("{name}={}", fmt_f64((r - t).abs())))
        .collect();
    Ok(Output {
        files: vec![
            ("observations.csv", obs.to_csv()),
            ("recovery.csv", csv),
            ("report.txt", report),
        ],
        summary: format!("{summary} abs_err {}", errors.join(" ")),
    })
}

pub fn witness(exp: &Experiment) -> CliResult<Output> {
    let w = exp.witness.as_ref().ok_or(CliError::Missing("witness"))?;
    let wit = nonuniqueness_witness(w.order, w.param, w.horizon)?;
    let classical = FractionalOrder::new(match w.order {
        WitnessOrder::One => 1.0,
        WitnessOrder::Two => 2.0,
    })?;
    let t0 = w.horizon + 0.1;
    let t1 = 10.0 * w.horizon;
    if !(t1 > t0) {
        return Err(CliError::invalid(
            "witness.horizon",
            "window [T + 0.1, 10T] is empty",
        ));
    }
    let times: Vec<f64> = (0..w.count)
        .map(|i| t0 + (t1 - t0) * i as f64 / (w.count - 1) as f64)
        .collect();
    let tail = wit.tail(classical, &times)?;
    let contrast = wit.tail(w.contrast, &times)?;

    let mu = SourceProfile::constant(1.0, 0.0, w.horizon, w.horizon)?;
    let (lambda, horizon) = (wit.lambda(), w.horizon);
    let mut duhamel_dev = 0.0f64;
    for &t in &times {
        let d = duhamel_mode(lambda, classical, &mu, t)?;
        let exact = match w.order {
            WitnessOrder::One => (-lambda * t).exp() * (lambda * horizon).exp_m1() / lambda,
            WitnessOrder::Two => {
                let r = w.param;
                ((r * (horizon - t)).cos() - (r * t).cos()) / (r * r)
            }
        };
        duhamel_dev = duhamel_dev.max((d - exact).abs() / exact.abs());
    }

    let classical_max = max_abs(tail.iter().copied());
    let contrast_max = max_abs(contrast.iter().copied());
    let mut report = String::new();
    let order = match w.order {
        WitnessOrder::One => "one",
        WitnessOrder::Two => "two",
    };
    let _ = writeln!(report, "order: {order}");
    let _ = writeln!(report, "parameter: {}", fmt_f64(w.param));
    let _ = writeln!(report, "horizon: {}", fmt_f64(w.horizon));
    let _ = writeln!(report, "a: {}", fmt_f64(wit.a));
    if let Some(b) = wit.b {
        let _ = writeln!(report, "b: {}", fmt_f64(b));
    }
    let _ = writeln!(report, "f: {}", fmt_f64(wit.f));
    let _ = writeln!(report, "window: [{}, {}]", fmt_f64(t0), fmt_f64(t1));
    let _ = writeln!(
        report,
        "max |u| at alpha {}: {}",
        fmt_f64(classical.value()),
        fmt_f64(classical_max)
    );
    let _ = writeln!(
        report,
        "max |u| at alpha {}: {}",
        fmt_f64(w.contrast.value()),
        fmt_f64(contrast_max)
    );
    let _ = writeln!(
        report,
        "max relative Duhamel deviation from closed form: {}",
        fmt_f64(duhamel_dev)
    );

    let obs = ObservationSet {
        points: vec![0.0],
        times: times.clone(),
        values: vec![tail],
        noise_sigma: 0.0,
        seed: None,
    };
    let mut contrast_csv = String::from("t,classical,fractional\n");
    for ((t, u), v) in times.iter().zip(&obs.values[0]).zip(&contrast) {
        let _ = writeln!(
            contrast_csv,
            "{},{},{}",
            fmt_f64(*t),
            fmt_f64(*u),
            fmt_f64(*v)
        );
    }
    Ok(Output {
        files: vec![
            ("observations.csv", obs.to_csv()),
            ("contrast.csv", contrast_csv),
            ("report.txt", report),
        ],
        summary: format!(
            "witness order={order} classical_max={} contrast_max={} duhamel_dev={}",
            fmt_f64(classical_max),
            fmt_f64(contrast_max),
            fmt_f64(duhamel_dev)
        ),
    })
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

fn fraction(num: usize, den: usize) -> String {
    let g = gcd(num, den).max(1);
    match (num / g, den / g) {
        (p, 1) => p.to_string(),
        (p, q) => format!("{p}/{q}"),
    }
}

pub fn admissible(exp: &Experiment) -> CliResult<Output> {
    let alpha = exp.alpha()?;
    let ell = match (exp.ell, &exp.mu) {
        (Some(l), _) => l,
        (None, Some(mu)) => mu.leading_index(MOMENT_TOL)?.0,
        (None, None) => 0,
    };
    let adm = admissible_alpha(alpha, ell, COLLISION_TOL);
    let (num, den) = adm.nearest_fraction;
    let verdict = if adm.admissible {
        format!(
            "admissible, nearest excluded value {} (distance {})",
            fraction(num, den),
            fmt_f64((alpha.value() - adm.nearest_excluded).abs())
        )
    } else {
        format!("inadmissible, excluded value {}", fraction(num, den))
    };
    let mut report = String::new();
    let _ = writeln!(report, "alpha: {}", fmt_f64(alpha.value()));
    let _ = writeln!(report, "ell: {ell}");
    let _ = writeln!(report, "{verdict}");
    Ok(Output {
        files: vec![("report.txt", report)],
        summary: format!(
            "admissible alpha={} ell={ell}: {verdict}",
            fmt_f64(alpha.value())
        ),
    })
}
