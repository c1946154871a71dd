//! Scalar fractional ODE d_t^α u = −λu + μ(t): closed-form solution and
//! recovery of a, b and the moments of μ from the late-time tail.

use nalgebra::DMatrix;

use crate::asymptotics::{q_prefactor, r_prefactor, s_prefactor};
use crate::error::{Error, Result};
use crate::forward::{add_noise, Noise, ObservationSet, ProblemSpec, Solver};
use crate::inverse::row_weights;
use crate::linalg::solve_weighted;
use crate::source_profile::{exponent_lattice, FractionalOrder, Regime, SourceProfile};
use crate::spectrum::{SpatialField, SpectralOperator};

/// Number of moments μ_0..μ_L estimated unless the caller asks otherwise
/// (L = 3).
pub const DEFAULT_MOMENTS: usize = 3;

/// Smallest |f(x₀)| accepted for a point observation.
pub const DEGENERATE_TOL: f64 = 1e-8;

/// Series terms per column are capped here.
const MAX_SERIES_TERMS: usize = 40;

/// Single-mode problem with eigenvalue λ and unit source amplitude. b is
/// dropped for α ≤ 1.
pub fn scalar_spec(
    alpha: FractionalOrder,
    lambda: f64,
    a: f64,
    b: f64,
    mu: SourceProfile,
) -> Result<ProblemSpec> {
    let op = SpectralOperator::diagonal(vec![lambda], 1.0)?;
    let b = (alpha.regime() == Regime::Super).then(|| SpatialField::new(vec![b]));
    ProblemSpec::new(
        alpha,
        op,
        SpatialField::new(vec![a]),
        b,
        SpatialField::new(vec![1.0]),
        mu,
    )
}

/// u(t) for the scalar problem.
pub fn solve_scalar(
    alpha: FractionalOrder,
    lambda: f64,
    a: f64,
    b: f64,
    mu: &SourceProfile,
    t: f64,
) -> Result<f64> {
    let solver = Solver::new(scalar_spec(alpha, lambda, a, b, mu.clone())?);
    Ok(solver.solve(t)?.coeffs[0])
}

/// Scalar tail sampled at `times` as an observation set with the single
/// point x = 0.
pub fn observe_scalar(
    alpha: FractionalOrder,
    lambda: f64,
    a: f64,
    b: f64,
    mu: &SourceProfile,
    times: &[f64],
    noise: Option<Noise>,
) -> Result<ObservationSet> {
    let horizon = mu.horizon();
    if let Some(t) = times.iter().find(|t| !(**t > horizon && t.is_finite())) {
        return Err(Error::invalid(format!(
            "observation time {t} must exceed the source horizon T = {horizon}"
        )));
    }
    let solver = Solver::new(scalar_spec(alpha, lambda, a, b, mu.clone())?);
    let row = times
        .iter()
        .map(|&t| solver.solve(t).map(|u| u.coeffs[0]))
        .collect::<Result<Vec<f64>>>()?;
    let mut values = vec![row];
    let (noise_sigma, seed) = add_noise(&mut values, noise)?;
    Ok(ObservationSet {
        points: vec![0.0],
        times: times.to_vec(),
        values,
        noise_sigma,
        seed,
    })
}

/// Power sum Σ_k w(m_k) t^{−(αm_k + shift)} truncated where its terms stop
/// decreasing at the earliest time.
fn series_column(
    alpha: FractionalOrder,
    shift: f64,
    weight: impl Fn(usize) -> f64,
    times: &[f64],
) -> Vec<f64> {
    let a = alpha.value();
    let t0 = times.iter().cloned().fold(f64::INFINITY, f64::min);
    let lattice = exponent_lattice(alpha, MAX_SERIES_TERMS).indices;
    let mut used = Vec::new();
    let mut prev = f64::INFINITY;
    for &m in &lattice {
        let size = (weight(m) * t0.powf(-(a * m as f64 + shift))).abs();
        if size > prev {
            break;
        }
        used.push(m);
        if size == 0.0 {
            break;
        }
        prev = size;
    }
    times
        .iter()
        .map(|t| {
            used.iter()
                .map(|&m| weight(m) * t.powf(-(a * m as f64 + shift)))
                .sum()
        })
        .collect()
}

fn check_series(times: &[f64], values: &[f64], horizon: f64, columns: usize) -> Result<()> {
    if times.len() != values.len() {
        return Err(Error::invalid(format!(
            "{} times but {} values",
            times.len(),
            values.len()
        )));
    }
    if let Some(t) = times
        .iter()
        .find(|t| !(**t > 2.0 * horizon) || !t.is_finite())
    {
        return Err(Error::invalid(format!(
            "sample time {t} is not beyond twice the horizon {horizon}"
        )));
    }
    if times.len() < 3 * columns {
        return Err(Error::invalid(format!(
            "{} samples for {columns} unknowns; need at least {}",
            times.len(),
            3 * columns
        )));
    }
    Ok(())
}

fn fit(
    alpha: FractionalOrder,
    lambda: f64,
    times: &[f64],
    values: &[f64],
    columns: Vec<(f64, Vec<f64>)>,
) -> Result<(Vec<f64>, f64, f64)> {
    let p_min = columns
        .iter()
        .map(|(p, _)| *p)
        .fold(f64::INFINITY, f64::min);
    let design = DMatrix::from_fn(times.len(), columns.len(), |i, j| columns[j].1[i]);
    let weights = row_weights(alpha, lambda, p_min, times);
    let ls = solve_weighted(&design, values, &weights, "scalar tail fit")?;
    Ok((ls.solution, ls.condition, ls.residual))
}

/// Estimates from a scalar tail.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarRecovery {
    pub a_hat: f64,
    /// Present for α > 1.
    pub b_hat: Option<f64>,
    /// μ_0..μ_L; the length is the number of verified moments.
    pub moments: Vec<f64>,
    pub condition: f64,
    pub residual: f64,
}

/// Joint fit of the tail with one column per unknown: a, b (α > 1) and each
/// moment μ_ℓ, ℓ ≤ `moment_count`. Each column sums its power-law terms, so
/// colliding exponents are merged automatically.
///
/// At α ∈ {1, 2} there are no power-law terms and the fit is rank deficient.
pub fn recover_scalar(
    times: &[f64],
    values: &[f64],
    alpha: FractionalOrder,
    lambda: f64,
    horizon: f64,
    moment_count: usize,
) -> Result<ScalarRecovery> {
    if !(lambda > 0.0) {
        return Err(Error::invalid(format!(
            "lambda must be positive, got {lambda}"
        )));
    }
    if alpha.is_classical() {
        return Err(Error::IllConditioned {
            condition: f64::INFINITY,
            context: format!("alpha = {} leaves no power-law tail to fit", alpha.value()),
        });
    }
    let a = alpha.value();
    let superdiffusive = alpha.regime() == Regime::Super;
    let mut columns = vec![(
        a,
        series_column(
            alpha,
            0.0,
            |m| q_prefactor(a, m) * lambda.powi(-(m as i32)),
            times,
        ),
    )];
    if superdiffusive {
        columns.push((
            a - 1.0,
            series_column(
                alpha,
                -1.0,
                |m| r_prefactor(a, m) * lambda.powi(-(m as i32)),
                times,
            ),
        ));
    }
    for ell in 0..=moment_count {
        let shift = ell as f64 + 1.0;
        columns.push((
            a + shift,
            series_column(
                alpha,
                shift,
                |m| s_prefactor(a, m, ell) * lambda.powi(-(m as i32) - 1),
                times,
            ),
        ));
    }
    check_series(times, values, horizon, columns.len())?;
    let (sol, condition, residual) = fit(alpha, lambda, times, values, columns)?;
    let first_moment = if superdiffusive { 2 } else { 1 };
    Ok(ScalarRecovery {
        a_hat: sol[0],
        b_hat: superdiffusive.then(|| sol[1]),
        moments: sol[first_moment..].to_vec(),
        condition,
        residual,
    })
}

/// Moments of μ from u(x₀, t) when a = b = 0 and f is known with f(x₀) ≠ 0.
#[derive(Debug, Clone, PartialEq)]
pub struct PointRecovery {
    pub moments: Vec<f64>,
    pub condition: f64,
    pub residual: f64,
}

/// Fits the source family at a single point, weighting every lattice term by
/// Σ_n f_n φ_n(x₀) λ_n^{−m−1}.
pub fn point_observation_recover(
    spec: &ProblemSpec,
    x0: f64,
    times: &[f64],
    values: &[f64],
    moment_count: usize,
) -> Result<PointRecovery> {
    if !spec.a.is_zero() || !spec.b_or_zero().is_zero() {
        return Err(Error::invalid("point observation needs zero initial data"));
    }
    if !(0.0..=spec.op.length()).contains(&x0) {
        return Err(Error::invalid(format!("x0 = {x0} is outside the domain")));
    }
    let value = spec.op.eval(&spec.f, x0);
    if value.abs() < DEGENERATE_TOL {
        return Err(Error::DegeneratePoint { value });
    }
    let alpha = spec.alpha;
    if alpha.is_classical() {
        return Err(Error::IllConditioned {
            condition: f64::INFINITY,
            context: format!("alpha = {} leaves no power-law tail to fit", alpha.value()),
        });
    }
    let a = alpha.value();
    let lambdas = spec.op.eigenvalues();
    let phi: Vec<f64> = (0..spec.modes())
        .map(|n| spec.f.coeffs[n] * spec.op.phi(n, x0))
        .collect();
    let weight = |m: usize| -> f64 {
        phi.iter()
            .zip(lambdas)
            .map(|(p, l)| p * l.powi(-(m as i32) - 1))
            .sum()
    };
    let columns: Vec<(f64, Vec<f64>)> = (0..=moment_count)
        .map(|ell| {
            let shift = ell as f64 + 1.0;
            (
                a + shift,
                series_column(alpha, shift, |m| s_prefactor(a, m, ell) * weight(m), times),
            )
        })
        .collect();
    check_series(times, values, spec.horizon(), columns.len())?;
    let (moments, condition, residual) = fit(alpha, lambdas[0], times, values, columns)?;
    Ok(PointRecovery {
        moments,
        condition,
        residual,
    })
}
