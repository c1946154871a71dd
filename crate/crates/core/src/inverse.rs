//! Reconstruction of (a, b, f) from late-time observations on a subdomain.
//!
//! The pipeline fits power-law terms at every observation point, converts
//! the pointwise coefficients into spectral coefficients through the
//! eigenfunction sample system, and inverts the resulting moment sequences
//! mode by mode.

use std::fmt::Write as _;

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::asymptotics::{q_prefactor, r_prefactor, s_prefactor, tail_integral, COLLISION_TOL};
use crate::error::{Error, Result};
use crate::forward::{fmt_f64, ObservationSet, ProblemSpec, Solver};
use crate::linalg::{
    coefficient_scales, condition_number, solve_scaled, solve_weighted, LeastSquares,
};
use crate::source_profile::{
    admissible_alpha, exponent_lattice, pair_leading_index, FractionalOrder, Regime, SourceProfile,
    MOMENT_TOL,
};
use crate::spectrum::{SpatialField, SpectralOperator};

/// Eigenvalues closer than this (relatively) make the moment system singular
/// in practice even when the condition number stays moderate.
pub const MIN_EIGEN_GAP: f64 = 1e-6;

/// Smallest number of terms per family the reconstruction will fit.
pub const MIN_TERMS: usize = 3;

/// Result of fitting Σ c_k t^{−p_k} to samples.
#[derive(Debug, Clone, PartialEq)]
pub struct PeelFit {
    pub coeffs: Vec<f64>,
    /// `false` for exponents at or above the cutoff.
    pub trusted: Vec<bool>,
    pub condition: f64,
    /// Weighted residual norm relative to the weighted data norm.
    pub residual: f64,
}

fn check_samples(times: &[f64], values: &[f64], columns: usize) -> Result<()> {
    if times.len() != values.len() {
        return Err(Error::invalid(format!(
            "{} times but {} values",
            times.len(),
            values.len()
        )));
    }
    if times.iter().any(|t| !(*t > 0.0) || !t.is_finite()) {
        return Err(Error::invalid("sample times must be positive and finite"));
    }
    if times.len() < 3 * columns {
        return Err(Error::invalid(format!(
            "{} samples for {columns} terms; need at least {}",
            times.len(),
            3 * columns
        )));
    }
    Ok(())
}

fn relative(fit: &LeastSquares, y: &[f64], w: &[f64]) -> f64 {
    let norm = y
        .iter()
        .zip(w)
        .map(|(v, w)| (v * w).powi(2))
        .sum::<f64>()
        .sqrt();
    if norm == 0.0 {
        fit.residual
    } else {
        fit.residual / norm
    }
}

/// Joint least-squares fit of y ≈ Σ_k c_k t^{−p_k} with column scaling.
///
/// Rows are weighted by t^{p_1} so that early and late samples count alike.
/// Entries with p_k ≥ `cutoff` are returned but flagged untrusted.
pub fn peel_exponents(
    times: &[f64],
    values: &[f64],
    exponents: &[f64],
    cutoff: f64,
) -> Result<PeelFit> {
    if exponents.is_empty() {
        return Err(Error::invalid("no exponents to fit"));
    }
    if exponents.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::invalid("exponents must be strictly increasing"));
    }
    check_samples(times, values, exponents.len())?;
    let design = DMatrix::from_fn(times.len(), exponents.len(), |i, k| {
        times[i].powf(-exponents[k])
    });
    let weights: Vec<f64> = times.iter().map(|t| t.powf(exponents[0])).collect();
    let fit = solve_weighted(&design, values, &weights, "power-law fit")?;
    Ok(PeelFit {
        trusted: exponents.iter().map(|p| *p < cutoff).collect(),
        condition: fit.condition,
        residual: relative(&fit, values, &weights),
        coeffs: fit.solution,
    })
}

/// Solution of a moment system g_k = Σ_n c_n λ_n^{−q_k}.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentFit {
    pub coeffs: Vec<f64>,
    pub condition: f64,
    pub residual: f64,
}

/// Recovers c_n from g_k = Σ_n c_n λ_n^{−q_k}.
///
/// Column n is divided by λ_n^{−q_1} before the solve. Needs K ≥ M + 2
/// equations and strictly increasing positive eigenvalues.
pub fn invert_moment_sequence(g: &[f64], powers: &[f64], lambdas: &[f64]) -> Result<MomentFit> {
    invert_moment_weighted(g, powers, lambdas, &vec![1.0; g.len()])
}

/// [`invert_moment_sequence`] with row k multiplied by `weights[k]`, typically
/// the reciprocal standard error of g_k.
pub fn invert_moment_weighted(
    g: &[f64],
    powers: &[f64],
    lambdas: &[f64],
    weights: &[f64],
) -> Result<MomentFit> {
    let (k, m) = (g.len(), lambdas.len());
    if powers.len() != k || weights.len() != k {
        return Err(Error::invalid(format!(
            "{k} moments but {} powers and {} weights",
            powers.len(),
            weights.len()
        )));
    }
    if m == 0 || k < m + 2 {
        return Err(Error::invalid(format!(
            "{k} moments cannot determine {m} coefficients; need at least {}",
            m + 2
        )));
    }
    if lambdas[0] <= 0.0 || lambdas.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::invalid(
            "eigenvalues must be positive and strictly increasing",
        ));
    }
    let design = DMatrix::from_fn(k, m, |i, n| (lambdas[n]).powf(powers[0] - powers[i]));
    if let Some(w) = lambdas
        .windows(2)
        .find(|w| (w[1] - w[0]) < MIN_EIGEN_GAP * w[1])
    {
        return Err(Error::IllConditioned {
            condition: condition_number(&design),
            context: format!(
                "moment inversion: eigenvalues {} and {} nearly coincide",
                w[0], w[1]
            ),
        });
    }
    let fit = solve_weighted(&design, g, weights, "moment inversion")?;
    Ok(MomentFit {
        coeffs: fit
            .solution
            .iter()
            .zip(lambdas)
            .map(|(c, l)| c * l.powf(powers[0]))
            .collect(),
        condition: fit.condition,
        residual: fit.residual,
    })
}

/// A named scalar produced by one pipeline stage.
#[derive(Debug, Clone, PartialEq)]
pub struct StageValue {
    pub stage: String,
    pub value: f64,
}

fn stage(name: &str, value: f64) -> StageValue {
    StageValue {
        stage: name.to_string(),
        value,
    }
}

/// Recovered fields together with the per-stage diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct RecoveryReport {
    pub a_hat: SpatialField,
    /// Present for α > 1.
    pub b_hat: Option<SpatialField>,
    pub f_hat: SpatialField,
    /// Ratio c₂/c₁ of the source scaling; 1 when μ is known.
    pub mu_scale: f64,
    /// Terms per family that were actually fitted.
    pub terms: usize,
    pub residuals: Vec<StageValue>,
    pub condition_numbers: Vec<StageValue>,
}

impl RecoveryReport {
    fn fields(&self) -> Vec<(&'static str, &SpatialField)> {
        let mut out = vec![("a", &self.a_hat)];
        if let Some(b) = &self.b_hat {
            out.push(("b", b));
        }
        out.push(("f", &self.f_hat));
        out
    }

    /// CSV of recovered coefficients. With `truth` the columns are
    /// `field,mode,true,recovered,abs_err`, otherwise `field,mode,recovered`.
    pub fn to_csv(&self, truth: Option<&ProblemSpec>) -> String {
        let mut s = String::new();
        match truth {
            Some(spec) => {
                s.push_str("field,mode,true,recovered,abs_err\n");
                let b = spec.b_or_zero();
                for (name, field) in self.fields() {
                    let exact = match name {
                        "a" => &spec.a,
                        "b" => &b,
                        _ => &spec.f,
                    };
                    for (i, c) in field.coeffs.iter().enumerate() {
                        let t = exact.coeffs.get(i).copied().unwrap_or(0.0);
                        let _ = writeln!(
                            s,
                            "{name},{},{},{},{}",
                            i + 1,
                            fmt_f64(t),
                            fmt_f64(*c),
                            fmt_f64((c - t).abs())
                        );
                    }
                }
            }
            None => {
                s.push_str("field,mode,recovered\n");
                for (name, field) in self.fields() {
                    for (i, c) in field.coeffs.iter().enumerate() {
                        let _ = writeln!(s, "{name},{},{}", i + 1, fmt_f64(*c));
                    }
                }
            }
        }
        s
    }

    /// Plain-text summary of the diagnostics.
    pub fn to_report(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "terms per family: {}", self.terms);
        let _ = writeln!(s, "mu scale: {}", fmt_f64(self.mu_scale));
        for (name, field) in self.fields() {
            let _ = writeln!(s, "norm {name}_hat: {}", fmt_f64(field.norm()));
        }
        for r in &self.residuals {
            let _ = writeln!(s, "residual {}: {}", r.stage, fmt_f64(r.value));
        }
        for c in &self.condition_numbers {
            let _ = writeln!(s, "condition {}: {}", c.stage, fmt_f64(c.value));
        }
        s
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Family {
    Q,
    R,
    S,
}

/// One column of the late-time design: the family, its lattice value and
/// the leading exponent.
#[derive(Debug, Clone, Copy)]
struct Column {
    family: Family,
    m: usize,
    exponent: f64,
}

fn design_columns(alpha: FractionalOrder, ell0: usize, terms: usize) -> (Vec<Column>, f64) {
    let a = alpha.value();
    let lattice = exponent_lattice(alpha, terms + 1).indices;
    let superdiffusive = alpha.regime() == Regime::Super;
    let mut cols = Vec::new();
    for &m in &lattice[..terms] {
        let am = a * m as f64;
        cols.push(Column {
            family: Family::Q,
            m,
            exponent: am,
        });
        if superdiffusive {
            cols.push(Column {
                family: Family::R,
                m,
                exponent: am - 1.0,
            });
        }
        cols.push(Column {
            family: Family::S,
            m,
            exponent: am + ell0 as f64 + 1.0,
        });
    }
    cols.sort_by(|x, y| x.exponent.total_cmp(&y.exponent));
    let next = a * lattice[terms] as f64;
    let cutoff = if superdiffusive { next - 1.0 } else { next };
    (cols, cutoff)
}

/// Exact-in-ℓ design: Q and R columns are powers, S columns are the tail
/// integrals ∫(t−s)^{−αm−1}μ(s)ds that carry every moment of μ.
fn design_matrix(cols: &[Column], alpha: f64, mu: &SourceProfile, times: &[f64]) -> DMatrix<f64> {
    DMatrix::from_fn(times.len(), cols.len(), |i, j| {
        let c = cols[j];
        match c.family {
            Family::S => tail_integral(alpha * c.m as f64 + 1.0, mu, times[i]),
            _ => times[i].powf(-c.exponent),
        }
    })
}

/// Relative weights t^{p_min}, damped where the oscillatory transient of an
/// α > 1 solution, of size exp(λ₁^{1/α} t cos(π/α)), is above rounding level.
pub(crate) fn row_weights(
    alpha: FractionalOrder,
    lambda1: f64,
    p_min: f64,
    times: &[f64],
) -> Vec<f64> {
    let a = alpha.value();
    let decay = match alpha.regime() {
        Regime::Super => lambda1.powf(1.0 / a) * (std::f64::consts::PI / a).cos(),
        Regime::Sub => f64::NEG_INFINITY,
    };
    times
        .iter()
        .map(|t| t.powf(p_min) / (1.0 + (decay * t).exp() / f64::EPSILON))
        .collect()
}

fn prefactor(family: Family, alpha: f64, m: usize) -> f64 {
    match family {
        Family::Q => q_prefactor(alpha, m),
        Family::R => r_prefactor(alpha, m),
        Family::S => s_prefactor(alpha, m, 0),
    }
}

fn offset(family: Family) -> f64 {
    match family {
        Family::S => 1.0,
        _ => 0.0,
    }
}

fn check_observations(obs: &ObservationSet, horizon: f64, modes: usize) -> Result<()> {
    if obs.points.len() < modes {
        return Err(Error::invalid(format!(
            "{} observation points cannot resolve {modes} modes",
            obs.points.len()
        )));
    }
    if let Some(t) = obs.times.iter().find(|t| !(**t > 2.0 * horizon)) {
        return Err(Error::invalid(format!(
            "observation time {t} is not beyond twice the horizon {horizon}"
        )));
    }
    if obs.values.len() != obs.points.len() || obs.values.iter().any(|v| v.len() != obs.times.len())
    {
        return Err(Error::invalid(
            "observation matrix does not match points and times",
        ));
    }
    Ok(())
}

/// Terms per family that keep the joint fit below the conditioning limit on
/// a two-decade window: 6 for α < 1, 4 + ℓ₀ for α > 1.
pub fn default_terms(alpha: FractionalOrder, ell0: usize) -> usize {
    match alpha.regime() {
        Regime::Sub => 6,
        Regime::Super => 4 + ell0,
    }
}

/// Full reconstruction with `terms` terms per family and `modes` modes.
///
/// When the joint fit is too ill-conditioned the number of terms is reduced
/// one at a time down to [`MIN_TERMS`].
pub fn reconstruct(
    obs: &ObservationSet,
    alpha: FractionalOrder,
    op: &SpectralOperator,
    mu: &SourceProfile,
    terms: usize,
    modes: usize,
) -> Result<RecoveryReport> {
    let (ell0, mu_ell0) = mu.leading_index(MOMENT_TOL)?;
    let adm = admissible_alpha(alpha, ell0, COLLISION_TOL);
    if !adm.admissible {
        return Err(Error::InadmissibleAlpha {
            alpha: alpha.value(),
            ell: ell0,
            nearest: adm.nearest_excluded,
        });
    }
    if terms < MIN_TERMS {
        return Err(Error::invalid(format!(
            "need at least {MIN_TERMS} terms per family"
        )));
    }
    if modes == 0 || modes > op.modes() {
        return Err(Error::invalid(format!(
            "mode count {modes} outside 1..={}",
            op.modes()
        )));
    }
    check_observations(obs, mu.horizon(), modes)?;
    let op = op.truncated(modes)?;
    let mut k = terms;
    loop {
        match reconstruct_with(obs, alpha, &op, mu, ell0, mu_ell0, k) {
            Err(Error::IllConditioned { .. }) if k > MIN_TERMS => k -= 1,
            other => return other,
        }
    }
}

fn reconstruct_with(
    obs: &ObservationSet,
    alpha: FractionalOrder,
    op: &SpectralOperator,
    mu: &SourceProfile,
    ell0: usize,
    mu_ell0: f64,
    terms: usize,
) -> Result<RecoveryReport> {
    let a = alpha.value();
    let (cols, cutoff) = design_columns(alpha, ell0, terms);
    check_samples(&obs.times, &obs.times, cols.len())?;
    let design = design_matrix(&cols, a, mu, &obs.times);
    let p_min = cols[0].exponent;
    let weights = row_weights(alpha, op.eigenvalues()[0], p_min, &obs.times);
    let mut weighted = design.clone();
    for (i, w) in weights.iter().enumerate() {
        weighted.row_mut(i).scale_mut(*w);
    }
    let std_err = coefficient_scales(&weighted);

    // (i) joint fit at every observation point
    let fits: Vec<LeastSquares> = obs
        .values
        .par_iter()
        .map(|y| solve_weighted(&design, y, &weights, "late-time fit"))
        .collect::<Result<_>>()?;
    let peel_condition = fits.iter().map(|f| f.condition).fold(0.0, f64::max);
    let peel_residual = fits
        .iter()
        .zip(&obs.values)
        .map(|(f, y)| relative(f, y, &weights))
        .fold(0.0, f64::max);

    // (ii) pointwise coefficients to spectral coefficients
    let sample = op.sample_matrix(&obs.points);
    let mut spatial_condition: f64 = 0.0;
    let mut spatial_residual: f64 = 0.0;
    let mut spectral: Vec<Option<Vec<f64>>> = Vec::with_capacity(cols.len());
    for (j, col) in cols.iter().enumerate() {
        let trusted = col.exponent < cutoff;
        if !trusted {
            spectral.push(None);
            continue;
        }
        let pointwise: Vec<f64> = fits.iter().map(|f| f.solution[j]).collect();
        let fit = solve_scaled(&sample, &pointwise, "eigenfunction sample system")?;
        spatial_condition = spatial_condition.max(fit.condition);
        let scale = pointwise.iter().map(|v| v * v).sum::<f64>().sqrt();
        if scale > 0.0 {
            spatial_residual = spatial_residual.max(fit.residual / scale);
        }
        spectral.push(Some(fit.solution));
    }

    // (iii) moment inversion per family and mode
    let lambdas = op.eigenvalues();
    let mut residuals = vec![
        stage("fit", peel_residual),
        stage("spatial", spatial_residual),
    ];
    let mut conditions = vec![
        stage("fit", peel_condition),
        stage("spatial", spatial_condition),
    ];
    let mut invert = |family: Family, name: &str| -> Result<SpatialField> {
        let chosen: Vec<(usize, &Column)> = cols
            .iter()
            .enumerate()
            .filter(|(j, c)| c.family == family && spectral[*j].is_some())
            .collect();
        let powers: Vec<f64> = chosen
            .iter()
            .map(|(_, c)| c.m as f64 + offset(family))
            .collect();
        let row_weights: Vec<f64> = chosen
            .iter()
            .map(|(j, c)| prefactor(family, a, c.m).abs() / std_err[*j])
            .collect();
        let mut coeffs = Vec::with_capacity(lambdas.len());
        let (mut cond, mut res): (f64, f64) = (0.0, 0.0);
        for (n, &lambda) in lambdas.iter().enumerate() {
            let g: Vec<f64> = chosen
                .iter()
                .map(|(j, c)| spectral[*j].as_ref().unwrap()[n] / prefactor(family, a, c.m))
                .collect();
            let fit = invert_moment_weighted(&g, &powers, &[lambda], &row_weights)?;
            cond = cond.max(fit.condition);
            let scale = g.iter().map(|v| v * v).sum::<f64>().sqrt();
            if scale > 0.0 {
                res = res.max(fit.residual / scale);
            }
            coeffs.push(fit.coeffs[0]);
        }
        residuals.push(stage(name, res));
        conditions.push(stage(name, cond));
        Ok(SpatialField::new(coeffs))
    };
    let a_hat = invert(Family::Q, "moments a")?;
    let b_hat = match alpha.regime() {
        Regime::Super => Some(invert(Family::R, "moments b")?),
        Regime::Sub => None,
    };
    let f_hat = invert(Family::S, "moments f")?;
    debug_assert!(mu_ell0 != 0.0);
    Ok(RecoveryReport {
        a_hat,
        b_hat,
        f_hat,
        mu_scale: 1.0,
        terms,
        residuals,
        condition_numbers: conditions,
    })
}

/// Comparison of two reconstructions under the source scaling ambiguity.
#[derive(Debug, Clone, PartialEq)]
pub struct SimultaneousReport {
    /// ‖â − ã̂‖.
    pub a_diff_norm: f64,
    /// ‖b̂ − b̃̂‖ for α > 1.
    pub b_diff_norm: Option<f64>,
    /// Least-squares ratio c with f̃̂ ≈ c f̂.
    pub f_ratio: f64,
    /// ‖f̃̂ − c f̂‖ / ‖f̃̂‖.
    pub f_ratio_residual: f64,
    /// μ̃_{ℓ₁}(μ_m − c μ̃_m) for m = 0..=K.
    pub relation_residuals: Vec<f64>,
    pub first: RecoveryReport,
    pub second: RecoveryReport,
}

/// Reconstructs both data sets and reports how far they are from differing
/// only by the scaling (f, μ) → (cf, μ/c).
#[allow(clippy::too_many_arguments)]
pub fn simultaneous_reconstruct(
    obs: &ObservationSet,
    obs2: &ObservationSet,
    alpha: FractionalOrder,
    op: &SpectralOperator,
    mu: &SourceProfile,
    mu2: &SourceProfile,
    terms: usize,
    modes: usize,
) -> Result<SimultaneousReport> {
    if obs.points != obs2.points || obs.times != obs2.times {
        return Err(Error::invalid(
            "observation sets must share points and times",
        ));
    }
    let ell1 = pair_leading_index(mu, mu2, MOMENT_TOL)?;
    let adm = admissible_alpha(alpha, ell1, COLLISION_TOL);
    if !adm.admissible {
        return Err(Error::InadmissibleAlpha {
            alpha: alpha.value(),
            ell: ell1,
            nearest: adm.nearest_excluded,
        });
    }
    let first = reconstruct(obs, alpha, op, mu, terms, modes)?;
    let second = reconstruct(obs2, alpha, op, mu2, terms, modes)?;
    let a_diff_norm = first.a_hat.sub(&second.a_hat).norm();
    let b_diff_norm = match (&first.b_hat, &second.b_hat) {
        (Some(x), Some(y)) => Some(x.sub(y).norm()),
        _ => None,
    };
    let (f1, f2) = (&first.f_hat.coeffs, &second.f_hat.coeffs);
    let denom: f64 = f1.iter().map(|v| v * v).sum();
    if denom == 0.0 {
        return Err(Error::invalid(
            "first data set carries no recoverable source",
        ));
    }
    let f_ratio = f1.iter().zip(f2).map(|(x, y)| x * y).sum::<f64>() / denom;
    let f2_norm = second.f_hat.norm();
    let f_ratio_residual = if f2_norm == 0.0 {
        f64::INFINITY
    } else {
        second.f_hat.sub(&first.f_hat.scaled(f_ratio)).norm() / f2_norm
    };
    let mu2_ell1 = mu2.moment(ell1);
    let relation_residuals = (0..=terms)
        .map(|m| mu2_ell1 * (mu.moment(m) - f_ratio * mu2.moment(m)))
        .collect();
    Ok(SimultaneousReport {
        a_diff_norm,
        b_diff_norm,
        f_ratio,
        f_ratio_residual,
        relation_residuals,
        first,
        second,
    })
}

/// Classical order of a non-uniqueness witness.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WitnessOrder {
    /// du/dt = −λu + μf.
    One,
    /// d²u/dt² = −r²u + μf.
    Two,
}

/// Initial data and source for which the classical tail vanishes after T,
/// with μ ≡ 1 on (0, T).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Witness {
    pub order: WitnessOrder,
    /// λ for order one, r for order two.
    pub param: f64,
    pub horizon: f64,
    pub a: f64,
    pub b: Option<f64>,
    pub f: f64,
}

/// Builds the witness (a, f) or (a, b, f) for the given classical order.
pub fn nonuniqueness_witness(order: WitnessOrder, param: f64, horizon: f64) -> Result<Witness> {
    if !(horizon > 0.0) || !horizon.is_finite() {
        return Err(Error::invalid(format!(
            "horizon must be positive, got {horizon}"
        )));
    }
    let (a, b) = match order {
        WitnessOrder::One => {
            if param == 0.0 || !param.is_finite() {
                return Err(Error::invalid("lambda must be nonzero and finite"));
            }
            (-(param * horizon).exp_m1() / param, None)
        }
        WitnessOrder::Two => {
            if !(param > 0.0) || !param.is_finite() {
                return Err(Error::invalid("r must be positive and finite"));
            }
            let r = param;
            (
                -((r * horizon).cos() - 1.0) / (r * r),
                Some(-(r * horizon).sin() / r),
            )
        }
    };
    Ok(Witness {
        order,
        param,
        horizon,
        a,
        b,
        f: 1.0,
    })
}

impl Witness {
    /// Eigenvalue of the scalar operator: λ or r².
    pub fn lambda(&self) -> f64 {
        match self.order {
            WitnessOrder::One => self.param,
            WitnessOrder::Two => self.param * self.param,
        }
    }

    /// Single-mode problem with this data at order α; b is dropped for α ≤ 1
    /// and set to zero when the witness has none.
    pub fn spec(&self, alpha: FractionalOrder) -> Result<ProblemSpec> {
        let op = SpectralOperator::diagonal(vec![self.lambda()], 1.0)?;
        let b = match alpha.regime() {
            Regime::Super => Some(SpatialField::new(vec![self.b.unwrap_or(0.0)])),
            Regime::Sub => None,
        };
        let mu = SourceProfile::constant(1.0, 0.0, self.horizon, self.horizon)?;
        ProblemSpec::new(
            alpha,
            op,
            SpatialField::new(vec![self.a]),
            b,
            SpatialField::new(vec![self.f]),
            mu,
        )
    }

    /// Modal solution u(t) at order α for each time.
    pub fn tail(&self, alpha: FractionalOrder, times: &[f64]) -> Result<Vec<f64>> {
        let solver = Solver::new(self.spec(alpha)?);
        times
            .iter()
            .map(|&t| solver.solve(t).map(|u| u.coeffs[0]))
            .collect()
    }
}
