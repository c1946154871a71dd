//! Series solution of d_t^α u = −Au + μ(t) f(x) with u(0) = a and, for
//! α > 1, ∂_t u(0) = b:
//!
//! u_n(t) = E_{α,1}(−λ_n t^α) a_n + t E_{α,2}(−λ_n t^α) b_n
//!        + ∫_0^{min(t,T)} (t−s)^{α−1} E_{α,α}(−λ_n (t−s)^α) μ(s) ds · f_n.

use std::fmt::Write as _;
use std::sync::OnceLock;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::quadrature::Rule;
use crate::source_profile::{FractionalOrder, Regime, SourceProfile};
use crate::special::{gamma_recip, MittagLeffler, MlOrderPair};
use crate::spectrum::{SpatialField, SpectralOperator};

/// Gauss-Legendre order of the first Duhamel pass; later passes double it.
const BASE_ORDER: usize = 12;
const MAX_DOUBLINGS: usize = 4;
/// Relative change (against ∫|integrand|) accepted as converged.
const TARGET_CHANGE: f64 = 1e-14;
/// Relative change above which the last doubling is reported as a failure.
const FAIL_CHANGE: f64 = 1e-9;
/// Ratio of consecutive graded panel widths.
const GRADING: f64 = 0.25;
/// Graded panels stop once their width drops below this fraction of the range.
const GRADING_DEPTH: f64 = 1e-13;

/// Initial-boundary value problem on the model operator.
#[derive(Debug, Clone, PartialEq)]
pub struct ProblemSpec {
    pub alpha: FractionalOrder,
    pub op: SpectralOperator,
    pub a: SpatialField,
    /// Initial velocity, present exactly when α > 1.
    pub b: Option<SpatialField>,
    pub f: SpatialField,
    pub mu: SourceProfile,
}

impl ProblemSpec {
    /// Validates the data and pads the fields to the operator's mode count.
    pub fn new(
        alpha: FractionalOrder,
        op: SpectralOperator,
        a: SpatialField,
        b: Option<SpatialField>,
        f: SpatialField,
        mu: SourceProfile,
    ) -> Result<Self> {
        let m = op.modes();
        for (name, field) in [("a", Some(&a)), ("b", b.as_ref()), ("f", Some(&f))] {
            if let Some(field) = field {
                if field.modes() > m {
                    return Err(Error::invalid(format!(
                        "{name} has {} coefficients but the operator keeps {m} modes",
                        field.modes()
                    )));
                }
                if field.coeffs.iter().any(|c| !c.is_finite()) {
                    return Err(Error::invalid(format!(
                        "{name} has non-finite coefficients"
                    )));
                }
            }
        }
        match (alpha.regime(), &b) {
            (Regime::Super, None) => {
                return Err(Error::invalid(
                    "initial velocity b is required when alpha > 1",
                ))
            }
            (Regime::Sub, Some(_)) => {
                return Err(Error::invalid(
                    "initial velocity b is only allowed when alpha > 1",
                ))
            }
            _ => {}
        }
        Ok(ProblemSpec {
            alpha,
            a: a.resized(m),
            b: b.map(|b| b.resized(m)),
            f: f.resized(m),
            op,
            mu,
        })
    }

    pub fn horizon(&self) -> f64 {
        self.mu.horizon()
    }

    pub fn modes(&self) -> usize {
        self.op.modes()
    }

    /// b, or the zero field when α ≤ 1.
    pub fn b_or_zero(&self) -> SpatialField {
        self.b
            .clone()
            .unwrap_or_else(|| SpatialField::zeros(self.modes()))
    }
}

/// Evaluator holding the three Mittag-Leffler functions a spec needs.
#[derive(Debug, Clone)]
pub struct Solver {
    spec: ProblemSpec,
    e1: MittagLeffler,
    e2: MittagLeffler,
    ea: MittagLeffler,
    em1: OnceLock<MittagLeffler>,
}

impl Solver {
    pub fn new(spec: ProblemSpec) -> Self {
        let a = spec.alpha.value();
        let pair = |g: f64| MittagLeffler::new(MlOrderPair::new(a, g).expect("alpha is positive"));
        Solver {
            e1: pair(1.0),
            e2: pair(2.0),
            ea: pair(a),
            em1: OnceLock::new(),
            spec,
        }
    }

    pub fn spec(&self) -> &ProblemSpec {
        &self.spec
    }

    /// Spectral coefficients u_n(t).
    pub fn solve(&self, t: f64) -> Result<SpatialField> {
        if !(t > 0.0 && t.is_finite()) {
            return Err(Error::invalid(format!("time must be positive, got {t}")));
        }
        let spec = &self.spec;
        let alpha = spec.alpha.value();
        let ta = t.powf(alpha);
        let b = spec.b.as_ref();
        let mut coeffs = Vec::with_capacity(spec.modes());
        for (i, &lambda) in spec.op.eigenvalues().iter().enumerate() {
            let z = -lambda * ta;
            let mut u = 0.0;
            if spec.a.coeffs[i] != 0.0 {
                u += self.e1.eval(z)?.value * spec.a.coeffs[i];
            }
            if let Some(b) = b {
                if b.coeffs[i] != 0.0 {
                    u += t * self.e2.eval(z)?.value * b.coeffs[i];
                }
            }
            if spec.f.coeffs[i] != 0.0 {
                u += self.duhamel(lambda, t)? * spec.f.coeffs[i];
            }
            coeffs.push(u);
        }
        Ok(SpatialField::new(coeffs))
    }

    /// ∫_0^{min(t,T)} (t−s)^{α−1} E_{α,α}(−λ(t−s)^α) μ(s) ds.
    pub fn duhamel(&self, lambda: f64, t: f64) -> Result<f64> {
        let alpha = self.spec.alpha.value();
        convolve(
            Kernel {
                ml: &self.ea,
                alpha,
                power: alpha - 1.0,
            },
            lambda,
            &self.spec.mu,
            t,
        )
    }

    /// Time derivative u_n'(t) for α > 1, used by the residual check:
    /// (E_{α,1}(−λt^α))' = −λt^{α−1}E_{α,α}(−λt^α), (tE_{α,2}(−λt^α))' = E_{α,1}(−λt^α),
    /// and the Duhamel kernel differentiates to τ^{α−2}E_{α,α−1}(−λτ^α).
    pub fn velocity(&self, t: f64) -> Result<SpatialField> {
        let spec = &self.spec;
        let alpha = spec.alpha.value();
        if alpha <= 1.0 {
            return Err(Error::invalid("velocity form is only used for alpha > 1"));
        }
        if !(t > 0.0 && t.is_finite()) {
            return Err(Error::invalid(format!("time must be positive, got {t}")));
        }
        let em1 = self.em1.get_or_init(|| {
            MittagLeffler::new(MlOrderPair::new(alpha, alpha - 1.0).expect("alpha > 1"))
        });
        let ta = t.powf(alpha);
        let b = spec.b_or_zero();
        let mut coeffs = Vec::with_capacity(spec.modes());
        for (i, &lambda) in spec.op.eigenvalues().iter().enumerate() {
            let z = -lambda * ta;
            let mut v = 0.0;
            if spec.a.coeffs[i] != 0.0 {
                v -= lambda * t.powf(alpha - 1.0) * self.ea.eval(z)?.value * spec.a.coeffs[i];
            }
            if b.coeffs[i] != 0.0 {
                v += self.e1.eval(z)?.value * b.coeffs[i];
            }
            if spec.f.coeffs[i] != 0.0 {
                let k = Kernel {
                    ml: em1,
                    alpha,
                    power: alpha - 2.0,
                };
                v += convolve(k, lambda, &spec.mu, t)? * spec.f.coeffs[i];
            }
            coeffs.push(v);
        }
        Ok(SpatialField::new(coeffs))
    }
}

/// Duhamel convolution for one mode.
pub fn duhamel_mode(
    lambda: f64,
    alpha: FractionalOrder,
    mu: &SourceProfile,
    t: f64,
) -> Result<f64> {
    let a = alpha.value();
    let ea = MittagLeffler::new(MlOrderPair::new(a, a)?);
    convolve(
        Kernel {
            ml: &ea,
            alpha: a,
            power: a - 1.0,
        },
        lambda,
        mu,
        t,
    )
}

/// τ^power · E_{α,γ}(−λτ^α), with γ carried by `ml`.
#[derive(Clone, Copy)]
struct Kernel<'a> {
    ml: &'a MittagLeffler,
    alpha: f64,
    power: f64,
}

/// ∫_0^{min(t,T)} K(t−s) μ(s) ds by graded Gauss-Legendre panels with node
/// doubling until the change is negligible against ∫|integrand|.
fn convolve(kernel: Kernel<'_>, lambda: f64, mu: &SourceProfile, t: f64) -> Result<f64> {
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::invalid(format!("time must be positive, got {t}")));
    }
    if !(lambda > 0.0) {
        return Err(Error::invalid(format!(
            "eigenvalue must be positive, got {lambda}"
        )));
    }
    let panels = duhamel_panels(kernel.alpha, lambda, mu, t);
    if panels.is_empty() {
        return Ok(0.0);
    }
    let mut order = BASE_ORDER;
    let (mut prev, _) = integrate_panels(kernel, lambda, t, &panels, order)?;
    let mut change = f64::INFINITY;
    for _ in 0..MAX_DOUBLINGS {
        order *= 2;
        let (next, l1) = integrate_panels(kernel, lambda, t, &panels, order)?;
        change = (next - prev).abs() / l1.max(f64::MIN_POSITIVE);
        prev = next;
        if change <= TARGET_CHANGE || l1 == 0.0 {
            return Ok(prev);
        }
    }
    if change > FAIL_CHANGE {
        return Err(Error::QuadratureNotConverged { change });
    }
    Ok(prev)
}

/// Panel in the lag variable τ = t − s, with the polynomial piece it samples.
struct Panel<'a> {
    lo: f64,
    hi: f64,
    piece: &'a crate::source_profile::Piece,
}

fn duhamel_panels<'a>(alpha: f64, lambda: f64, mu: &'a SourceProfile, t: f64) -> Vec<Panel<'a>> {
    let mut out = Vec::new();
    for piece in mu.pieces() {
        let hi_s = piece.end.min(t);
        if hi_s <= piece.start || piece.coeffs.iter().all(|c| *c == 0.0) {
            continue;
        }
        let (tau_lo, tau_hi) = (t - hi_s, t - piece.start);
        let width = tau_hi - tau_lo;
        // geometric refinement toward the kernel's singular end τ = tau_lo
        let floor = (0.5 * tau_lo).max(width * GRADING_DEPTH);
        let mut cuts = vec![tau_hi];
        let mut w = width;
        while w * GRADING > floor {
            w *= GRADING;
            cuts.push(tau_lo + w);
        }
        cuts.push(tau_lo);
        cuts.reverse();
        // wave-like kernels oscillate with angular frequency ≈ λ^{1/α} sin(π/α)
        let freq = if alpha > 1.0 {
            lambda.powf(1.0 / alpha) * (std::f64::consts::PI / alpha).sin()
        } else {
            0.0
        };
        for w in cuts.windows(2) {
            let n_sub = ((w[1] - w[0]) * freq / 2.0).ceil().max(1.0) as usize;
            let h = (w[1] - w[0]) / n_sub as f64;
            for j in 0..n_sub {
                let lo = w[0] + h * j as f64;
                let hi = if j + 1 == n_sub { w[1] } else { lo + h };
                out.push(Panel { lo, hi, piece });
            }
        }
    }
    out
}

/// Returns (∫ integrand, ∫ |integrand|) over all panels.
fn integrate_panels(
    kernel: Kernel<'_>,
    lambda: f64,
    t: f64,
    panels: &[Panel<'_>],
    order: usize,
) -> Result<(f64, f64)> {
    let rule = Rule::new(order);
    let Kernel { ml, alpha, power } = kernel;
    let mut total = 0.0;
    let mut abs_total = 0.0;
    for p in panels {
        if power < 0.0 {
            // σ = τ^{power+1} removes the singular factor: τ^power dτ = dσ/(power+1)
            let q = power + 1.0;
            let (slo, shi) = (p.lo.powf(q), p.hi.powf(q));
            for (sigma, w) in rule.on(slo, shi) {
                let tau = sigma.powf(1.0 / q);
                let v = ml.eval(-lambda * tau.powf(alpha))?.value * p.piece.eval(t - tau) / q;
                total += w * v;
                abs_total += w * v.abs();
            }
        } else {
            for (tau, w) in rule.on(p.lo, p.hi) {
                let weight = if power == 0.0 { 1.0 } else { tau.powf(power) };
                let v = weight * ml.eval(-lambda * tau.powf(alpha))?.value * p.piece.eval(t - tau);
                total += w * v;
                abs_total += w * v.abs();
            }
        }
    }
    Ok((total, abs_total))
}

/// Spectral coefficients of u(·, t).
pub fn solve(spec: &ProblemSpec, t: f64) -> Result<SpatialField> {
    Solver::new(spec.clone()).solve(t)
}

/// Additive i.i.d. Gaussian noise with a recorded seed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Noise {
    pub sigma: f64,
    pub seed: u64,
}

/// Samples u(x_i, t_j) on points of ω.
#[derive(Debug, Clone, PartialEq)]
pub struct ObservationSet {
    pub points: Vec<f64>,
    pub times: Vec<f64>,
    /// `values[i][j]` is the sample at `points[i]`, `times[j]`.
    pub values: Vec<Vec<f64>>,
    pub noise_sigma: f64,
    pub seed: Option<u64>,
}

impl ObservationSet {
    /// CSV with header `x,t,value`, x-major, shortest round-trip decimals.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("x,t,value\n");
        for (i, x) in self.points.iter().enumerate() {
            for (j, t) in self.times.iter().enumerate() {
                let _ = writeln!(
                    s,
                    "{},{},{}",
                    fmt_f64(*x),
                    fmt_f64(*t),
                    fmt_f64(self.values[i][j])
                );
            }
        }
        s
    }

    /// Parses the format written by [`to_csv`](Self::to_csv).
    pub fn from_csv(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        match lines.next() {
            Some(h) if h.trim() == "x,t,value" => {}
            _ => {
                return Err(Error::invalid(
                    "observation CSV must start with header x,t,value",
                ))
            }
        }
        let mut rows = Vec::new();
        for (n, line) in lines.enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let parts: Vec<&str> = line.split(',').collect();
            if parts.len() != 3 {
                return Err(Error::invalid(format!("line {}: expected 3 fields", n + 2)));
            }
            let mut vals = [0.0; 3];
            for (k, p) in parts.iter().enumerate() {
                vals[k] = p
                    .trim()
                    .parse()
                    .map_err(|_| Error::invalid(format!("line {}: bad number {p:?}", n + 2)))?;
            }
            rows.push(vals);
        }
        let mut points: Vec<f64> = Vec::new();
        let mut times: Vec<f64> = Vec::new();
        for r in &rows {
            if points.last() != Some(&r[0]) {
                points.push(r[0]);
            }
            if points.len() == 1 {
                times.push(r[1]);
            }
        }
        if rows.len() != points.len() * times.len() {
            return Err(Error::invalid("observation CSV is not a full x-major grid"));
        }
        let values = rows
            .chunks(times.len().max(1))
            .map(|c| c.iter().map(|r| r[2]).collect())
            .collect();
        Ok(ObservationSet {
            points,
            times,
            values,
            noise_sigma: 0.0,
            seed: None,
        })
    }

    /// Samples at one point across all times.
    pub fn series(&self, i: usize) -> &[f64] {
        &self.values[i]
    }
}

/// Shortest decimal that parses back to the same `f64`.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:?}")
}

/// `count` equispaced interior points of (lo, hi).
pub fn interior_points(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    (1..=count)
        .map(|i| lo + (hi - lo) * i as f64 / (count + 1) as f64)
        .collect()
}

/// Observations on ω = (lo, hi) at 2M+1 interior points.
pub fn observe(
    spec: &ProblemSpec,
    omega: (f64, f64),
    times: &[f64],
    noise: Option<Noise>,
) -> Result<ObservationSet> {
    let points = interior_points(omega.0, omega.1, 2 * spec.modes() + 1);
    observe_at(spec, omega, &points, times, noise)
}

/// Observations at explicit points of ω.
pub fn observe_at(
    spec: &ProblemSpec,
    omega: (f64, f64),
    points: &[f64],
    times: &[f64],
    noise: Option<Noise>,
) -> Result<ObservationSet> {
    let (lo, hi) = omega;
    if !(0.0 <= lo && lo < hi && hi <= spec.op.length()) {
        return Err(Error::invalid(format!(
            "omega ({lo}, {hi}) must be a nonempty subinterval of (0, {})",
            spec.op.length()
        )));
    }
    if let Some(x) = points.iter().find(|x| !(lo < **x && **x < hi)) {
        return Err(Error::invalid(format!(
            "observation point {x} is outside omega"
        )));
    }
    let horizon = spec.horizon();
    if let Some(t) = times.iter().find(|t| !(**t > horizon && t.is_finite())) {
        return Err(Error::invalid(format!(
            "observation time {t} must exceed the source horizon T = {horizon}"
        )));
    }
    let solver = Solver::new(spec.clone());
    let fields: Vec<SpatialField> = times
        .par_iter()
        .map(|&t| solver.solve(t))
        .collect::<Result<_>>()?;
    let mut values: Vec<Vec<f64>> = points
        .iter()
        .map(|&x| fields.iter().map(|u| spec.op.eval(u, x)).collect())
        .collect();
    let (noise_sigma, seed) = add_noise(&mut values, noise)?;
    Ok(ObservationSet {
        points: points.to_vec(),
        times: times.to_vec(),
        values,
        noise_sigma,
        seed,
    })
}

/// Adds seeded Gaussian noise row by row and returns the recorded
/// (sigma, seed) pair.
pub fn add_noise(values: &mut [Vec<f64>], noise: Option<Noise>) -> Result<(f64, Option<u64>)> {
    match noise {
        Some(n) if n.sigma > 0.0 && n.sigma.is_finite() => {
            let normal = Normal::new(0.0, n.sigma)
                .map_err(|e| Error::invalid(format!("noise level: {e}")))?;
            let mut rng = ChaCha8Rng::seed_from_u64(n.seed);
            for row in values.iter_mut() {
                for v in row.iter_mut() {
                    *v += normal.sample(&mut rng);
                }
            }
            Ok((n.sigma, Some(n.seed)))
        }
        Some(n) if n.sigma == 0.0 => Ok((0.0, Some(n.seed))),
        Some(n) => Err(Error::invalid(format!(
            "noise level must be >= 0, got {}",
            n.sigma
        ))),
        None => Ok((0.0, None)),
    }
}

/// Uniform time grid for [`caputo_residual`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CaputoGrid {
    /// Last grid time.
    pub horizon: f64,
    /// Number of steps; h = horizon / steps.
    pub steps: usize,
    /// Residuals are reported for grid times ≥ `from`. The first steps of
    /// the L1 scheme carry an O(1) error for t^α-type solutions.
    pub from: f64,
}

/// max |d_t^α u + Au − μ f| over `x_grid` and the grid times ≥ `from`.
///
/// The Caputo derivative is discretized by the L1 scheme, applied to u for
/// α ≤ 1 and to the exact velocity u' with order α − 1 for α > 1.
pub fn caputo_residual(spec: &ProblemSpec, x_grid: &[f64], grid: CaputoGrid) -> Result<f64> {
    let CaputoGrid {
        horizon,
        steps,
        from,
    } = grid;
    if steps < 2 || !(horizon > 0.0) {
        return Err(Error::invalid(
            "Caputo grid needs a positive horizon and at least 2 steps",
        ));
    }
    let alpha = spec.alpha.value();
    let h = horizon / steps as f64;
    let solver = Solver::new(spec.clone());
    let fields: Vec<SpatialField> = (1..=steps)
        .into_par_iter()
        .map(|j| solver.solve(h * j as f64))
        .collect::<Result<_>>()?;
    // for α > 1 the derivative acts on v = u', of order α − 1
    let velocities: Vec<SpatialField> = if alpha > 1.0 {
        (1..=steps)
            .into_par_iter()
            .map(|j| solver.velocity(h * j as f64))
            .collect::<Result<_>>()?
    } else {
        Vec::new()
    };
    let m = spec.modes();
    let b = spec.b_or_zero();
    let first = ((from / h).ceil() as usize).max(1);
    let mut residual = vec![vec![0.0; m]; steps + 1];
    for mode in 0..m {
        let lambda = spec.op.eigenvalues()[mode];
        let mut u = Vec::with_capacity(steps + 1);
        u.push(spec.a.coeffs[mode]);
        u.extend(fields.iter().map(|f| f.coeffs[mode]));
        let deriv = if alpha > 1.0 {
            let mut v = Vec::with_capacity(steps + 1);
            v.push(b.coeffs[mode]);
            v.extend(velocities.iter().map(|f| f.coeffs[mode]));
            l1_caputo(&v, alpha - 1.0, h)
        } else {
            l1_caputo(&u, alpha, h)
        };
        for n in first..=steps {
            let t = h * n as f64;
            residual[n][mode] = deriv[n] + lambda * u[n] - spec.mu.eval(t) * spec.f.coeffs[mode];
        }
    }
    let mut worst: f64 = 0.0;
    for r in residual.iter().skip(first) {
        let field = SpatialField::new(r.clone());
        for &x in x_grid {
            worst = worst.max(spec.op.eval(&field, x).abs());
        }
    }
    Ok(worst)
}

/// L1 approximation of the Caputo derivative of order `order` ∈ (0, 1] at
/// every grid index n ≥ 1. At order 1 it reduces to the backward difference.
pub fn l1_caputo(u: &[f64], order: f64, h: f64) -> Vec<f64> {
    let n_max = u.len() - 1;
    let weights: Vec<f64> = (0..n_max)
        .map(|j| {
            if j == 0 {
                1.0
            } else {
                ((j + 1) as f64).powf(1.0 - order) - (j as f64).powf(1.0 - order)
            }
        })
        .collect();
    let scale = h.powf(-order) * gamma_recip(2.0 - order);
    let mut out = vec![0.0; n_max + 1];
    for n in 1..=n_max {
        let s: f64 = (0..n).map(|k| weights[n - k - 1] * (u[k + 1] - u[k])).sum();
        out[n] = scale * s;
    }
    out
}
