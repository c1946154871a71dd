//! Experiment configuration.
//!
//! A config is a JSON object with a `schema` version, the problem data shared
//! by the subcommands and one optional block per subcommand. An optional
//! `cases` array holds override objects; each is merged into the base
//! (objects recursively, `null` removes a key) and run on its own.

use std::f64::consts::FRAC_1_SQRT_2;

use serde::Deserialize;
use serde_json::{Map, Value};

use fdw_core::forward::{Noise, ProblemSpec};
use fdw_core::inverse::WitnessOrder;
use fdw_core::special::MlOrderPair;
use fdw_core::{FractionalOrder, Piece, Regime, SourceProfile, SpatialField, SpectralOperator};

use crate::error::{CliError, CliResult};

pub const SCHEMA_VERSION: u64 = 1;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawConfig {
    pub schema: u64,
    pub alpha: Option<f64>,
    pub operator: Option<OperatorConfig>,
    pub a: Option<Vec<f64>>,
    pub b: Option<Vec<f64>>,
    pub f: Option<Vec<f64>>,
    pub mu: Option<MuConfig>,
    pub omega: Option<[f64; 2]>,
    pub times: Option<TimesConfig>,
    #[serde(default)]
    pub noise: f64,
    #[serde(default)]
    pub seed: u64,
    pub terms: Option<usize>,
    pub modes: Option<usize>,
    pub ell: Option<usize>,
    pub expand: Option<ExpandConfig>,
    pub caputo: Option<CaputoConfig>,
    pub second: Option<SecondConfig>,
    pub ode: Option<OdeConfig>,
    pub witness: Option<WitnessConfig>,
    pub ml: Option<MlConfig>,
    /// Checked for shape here, expanded by [`load`].
    #[serde(default, rename = "cases")]
    _cases: Option<Vec<Map<String, Value>>>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", deny_unknown_fields)]
pub enum OperatorConfig {
    #[serde(rename = "dirichlet-laplacian-1d")]
    DirichletLaplacian1d { length: f64, modes: usize },
    #[serde(rename = "diagonal")]
    Diagonal {
        eigenvalues: Vec<f64>,
        #[serde(default = "one")]
        length: f64,
    },
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MuConfig {
    pub horizon: f64,
    pub pieces: Vec<Piece>,
}

#[derive(Debug, Clone, Copy, Default, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Spacing {
    #[default]
    Log,
    Linear,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimesConfig {
    pub start: f64,
    pub end: f64,
    pub count: usize,
    #[serde(default)]
    pub spacing: Spacing,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExpandConfig {
    /// Terms per family.
    pub terms: usize,
    /// Time window of the remainder slope fit; [8T, 512T] when absent.
    pub window: Option<[f64; 2]>,
    #[serde(default = "default_samples")]
    pub samples: usize,
}

fn default_samples() -> usize {
    16
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CaputoConfig {
    pub horizon: f64,
    pub steps: Vec<usize>,
    #[serde(default = "default_from")]
    pub from: f64,
    /// Interior points of (0, L) where the residual is taken.
    #[serde(default = "default_caputo_points")]
    pub points: usize,
}

fn default_from() -> f64 {
    0.1
}

fn default_caputo_points() -> usize {
    5
}

/// The second data set of `simul-invert`: either the first one rescaled by
/// (f, μ) → (c f, μ / c) or explicit replacements for f and μ.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SecondConfig {
    pub scale: Option<f64>,
    pub f: Option<Vec<f64>>,
    pub mu: Option<MuConfig>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OdeConfig {
    /// Eigenvalue of the scalar problem; absent in point mode.
    pub lambda: Option<f64>,
    #[serde(default)]
    pub a: f64,
    #[serde(default)]
    pub b: f64,
    /// Source amplitude; the fit recovers the moments of f·μ.
    #[serde(default = "one")]
    pub f: f64,
    #[serde(default = "default_moments")]
    pub moments: usize,
    /// Observation point; switches to point mode on the full problem.
    pub x0: Option<f64>,
}

fn default_moments() -> usize {
    fdw_core::ode_lab::DEFAULT_MOMENTS
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OrderName {
    One,
    Two,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WitnessConfig {
    pub order: OrderName,
    /// λ for order one, r for order two.
    pub param: f64,
    #[serde(default = "one")]
    pub horizon: f64,
    #[serde(default = "default_contrast")]
    pub contrast_alpha: f64,
    #[serde(default = "default_count")]
    pub count: usize,
}

fn default_contrast() -> f64 {
    FRAC_1_SQRT_2
}

fn default_count() -> usize {
    200
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MlConfig {
    /// Without β the classical identity checks run instead.
    pub beta: Option<f64>,
    #[serde(default = "one")]
    pub gamma: f64,
    #[serde(default)]
    pub z: Vec<f64>,
    #[serde(default = "default_count")]
    pub points: usize,
    #[serde(default = "default_x_max")]
    pub x_max: f64,
    #[serde(default = "one")]
    pub r: f64,
    #[serde(default = "default_t_max")]
    pub t_max: f64,
}

fn default_x_max() -> f64 {
    50.0
}

fn default_t_max() -> f64 {
    30.0
}

impl Default for MlConfig {
    fn default() -> Self {
        MlConfig {
            beta: None,
            gamma: 1.0,
            z: Vec::new(),
            points: default_count(),
            x_max: default_x_max(),
            r: 1.0,
            t_max: default_t_max(),
        }
    }
}

#[derive(Debug, Clone)]
pub enum Second {
    Scale(f64),
    Data {
        f: Option<SpatialField>,
        mu: Option<SourceProfile>,
    },
}

#[derive(Debug, Clone)]
pub struct Witness {
    pub order: WitnessOrder,
    pub param: f64,
    pub horizon: f64,
    pub contrast: FractionalOrder,
    pub count: usize,
}

#[derive(Debug, Clone)]
pub enum MlTask {
    Identities {
        points: usize,
        x_max: f64,
        r: f64,
        t_max: f64,
    },
    Values {
        pair: MlOrderPair,
        z: Vec<f64>,
    },
}

/// A config after validation. Every present value satisfies the checks of
/// the library types; absent values are reported by the subcommand that
/// needs them.
#[derive(Debug, Clone)]
pub struct Experiment {
    pub alpha: Option<FractionalOrder>,
    pub op: Option<SpectralOperator>,
    pub spec: Option<ProblemSpec>,
    pub mu: Option<SourceProfile>,
    pub omega: Option<(f64, f64)>,
    pub times: Option<Vec<f64>>,
    pub noise: Noise,
    pub terms: Option<usize>,
    pub modes: Option<usize>,
    pub ell: Option<usize>,
    pub expand: Option<ExpandConfig>,
    pub caputo: Option<CaputoConfig>,
    pub second: Option<Second>,
    pub ode: Option<OdeConfig>,
    pub witness: Option<Witness>,
    pub ml: MlTask,
}

impl Experiment {
    pub fn alpha(&self) -> CliResult<FractionalOrder> {
        self.alpha.ok_or(CliError::Missing("alpha"))
    }

    pub fn op(&self) -> CliResult<&SpectralOperator> {
        self.op.as_ref().ok_or(CliError::Missing("operator"))
    }

    pub fn mu(&self) -> CliResult<&SourceProfile> {
        self.mu.as_ref().ok_or(CliError::Missing("mu"))
    }

    /// The full problem; needs alpha, operator, a, f, mu and b for α > 1.
    pub fn spec(&self) -> CliResult<&ProblemSpec> {
        if let Some(s) = &self.spec {
            return Ok(s);
        }
        self.alpha()?;
        self.op()?;
        self.mu()?;
        Err(CliError::Config(
            "the problem needs both `a` and `f`".into(),
        ))
    }

    pub fn omega(&self) -> CliResult<(f64, f64)> {
        self.omega.ok_or(CliError::Missing("omega"))
    }

    pub fn times(&self) -> CliResult<&[f64]> {
        self.times.as_deref().ok_or(CliError::Missing("times"))
    }
}

/// Merges `patch` into `base`: objects recursively, `null` deletes.
pub fn merge(base: &mut Map<String, Value>, patch: &Map<String, Value>) {
    for (k, v) in patch {
        match (base.get_mut(k), v) {
            (_, Value::Null) => {
                base.remove(k);
            }
            (Some(Value::Object(b)), Value::Object(p)) => merge(b, p),
            _ => {
                base.insert(k.clone(), v.clone());
            }
        }
    }
}

/// Parses a config (or an empty one when `text` is `None`), applies the
/// command line `overrides` last and validates every case. Returns the
/// experiments and whether the config listed cases.
pub fn load(
    text: Option<&str>,
    overrides: &Map<String, Value>,
) -> CliResult<(Vec<Experiment>, bool)> {
    let mut base = match text {
        Some(text) => {
            // typed pass first for line and field diagnostics
            let de = &mut serde_json::Deserializer::from_str(text);
            serde_path_to_error::deserialize::<_, RawConfig>(de)
                .map_err(|e| CliError::Config(e.to_string()))?;
            match serde_json::from_str::<Value>(text) {
                Ok(Value::Object(m)) => m,
                _ => return Err(CliError::Config("top level must be an object".into())),
            }
        }
        None => {
            let mut m = Map::new();
            m.insert("schema".into(), Value::from(SCHEMA_VERSION));
            m
        }
    };
    let cases = match base.remove("cases") {
        Some(Value::Array(items)) => Some(
            items
                .into_iter()
                .map(|v| match v {
                    Value::Object(m) => m,
                    _ => Map::new(),
                })
                .collect::<Vec<_>>(),
        ),
        _ => None,
    };
    match cases {
        None => {
            merge(&mut base, overrides);
            Ok((vec![build(Value::Object(base))?], false))
        }
        Some(cases) if cases.is_empty() => Err(CliError::Config("`cases` is empty".into())),
        Some(cases) => {
            let experiments = cases
                .iter()
                .enumerate()
                .map(|(i, case)| {
                    let mut merged = base.clone();
                    merge(&mut merged, case);
                    merge(&mut merged, overrides);
                    build(Value::Object(merged)).map_err(|e| CliError::Case {
                        index: i + 1,
                        source: Box::new(e),
                    })
                })
                .collect::<CliResult<Vec<_>>>()?;
            Ok((experiments, true))
        }
    }
}

fn build(value: Value) -> CliResult<Experiment> {
    let raw: RawConfig =
        serde_path_to_error::deserialize(value).map_err(|e| CliError::Config(e.to_string()))?;
    validate(raw)
}

fn check_finite(field: &str, v: f64) -> CliResult<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(CliError::invalid(field, format!("must be finite, got {v}")))
    }
}

fn field_of(name: &str, coeffs: &[f64], modes: Option<usize>) -> CliResult<SpatialField> {
    if let Some((i, c)) = coeffs.iter().enumerate().find(|(_, c)| !c.is_finite()) {
        return Err(CliError::invalid(
            format!("{name}[{i}]"),
            format!("must be finite, got {c}"),
        ));
    }
    if let Some(m) = modes {
        if coeffs.len() > m {
            return Err(CliError::invalid(
                name,
                format!(
                    "{} coefficients but the operator keeps {m} modes",
                    coeffs.len()
                ),
            ));
        }
    }
    Ok(SpatialField::new(coeffs.to_vec()))
}

fn profile(field: &str, mu: MuConfig) -> CliResult<SourceProfile> {
    SourceProfile::new(mu.pieces, mu.horizon).map_err(|e| CliError::field(field, e))
}

fn time_grid(t: &TimesConfig, horizon: Option<f64>) -> CliResult<Vec<f64>> {
    check_finite("times.start", t.start)?;
    check_finite("times.end", t.end)?;
    if !(t.start > 0.0) {
        return Err(CliError::invalid(
            "times.start",
            format!("must be positive, got {}", t.start),
        ));
    }
    if !(t.end > t.start) {
        return Err(CliError::invalid("times.end", "must exceed times.start"));
    }
    if t.count < 2 {
        return Err(CliError::invalid("times.count", "needs at least 2 samples"));
    }
    if let Some(h) = horizon {
        if !(t.start > h) {
            return Err(CliError::invalid(
                "times.start",
                format!("must exceed the source horizon T = {h}, got {}", t.start),
            ));
        }
    }
    let n = (t.count - 1) as f64;
    Ok((0..t.count)
        .map(|i| {
            let s = i as f64 / n;
            match t.spacing {
                Spacing::Log => t.start * (t.end / t.start).powf(s),
                Spacing::Linear => t.start + (t.end - t.start) * s,
            }
        })
        .collect())
}

fn validate(raw: RawConfig) -> CliResult<Experiment> {
    if raw.schema != SCHEMA_VERSION {
        return Err(CliError::invalid(
            "schema",
            format!(
                "unsupported version {}, expected {SCHEMA_VERSION}",
                raw.schema
            ),
        ));
    }
    let alpha = raw
        .alpha
        .map(|a| FractionalOrder::new(a).map_err(|e| CliError::field("alpha", e)))
        .transpose()?;
    let op = match raw.operator {
        None => None,
        Some(OperatorConfig::DirichletLaplacian1d { length, modes }) => Some(
            SpectralOperator::dirichlet_laplacian_1d(length, modes)
                .map_err(|e| CliError::field("operator", e))?,
        ),
        Some(OperatorConfig::Diagonal {
            eigenvalues,
            length,
        }) => Some(
            SpectralOperator::diagonal(eigenvalues, length)
                .map_err(|e| CliError::field("operator", e))?,
        ),
    };
    let modes_avail = op.as_ref().map(|o| o.modes());
    let a = raw
        .a
        .as_deref()
        .map(|c| field_of("a", c, modes_avail))
        .transpose()?;
    let b = raw
        .b
        .as_deref()
        .map(|c| field_of("b", c, modes_avail))
        .transpose()?;
    let f = raw
        .f
        .as_deref()
        .map(|c| field_of("f", c, modes_avail))
        .transpose()?;
    if let (Some(alpha), Some(_)) = (alpha, &b) {
        if alpha.regime() == Regime::Sub {
            return Err(CliError::invalid(
                "b",
                "initial velocity is only allowed when alpha > 1",
            ));
        }
    }
    let mu = raw.mu.map(|m| profile("mu", m)).transpose()?;
    let horizon = mu.as_ref().map(|m| m.horizon());

    let spec = match (alpha, &op, a, f, &mu) {
        (Some(alpha), Some(op), Some(a), Some(f), Some(mu)) => {
            if alpha.regime() == Regime::Super && b.is_none() {
                return Err(CliError::invalid(
                    "b",
                    "initial velocity is required when alpha > 1",
                ));
            }
            Some(ProblemSpec::new(alpha, op.clone(), a, b, f, mu.clone())?)
        }
        _ => None,
    };

    let omega = match raw.omega {
        None => None,
        Some([lo, hi]) => {
            check_finite("omega", lo)?;
            check_finite("omega", hi)?;
            let length = op.as_ref().map_or(f64::INFINITY, |o| o.length());
            if !(0.0 <= lo && lo < hi && hi <= length) {
                return Err(CliError::invalid(
                    "omega",
                    format!("({lo}, {hi}) must be a nonempty subinterval of the domain"),
                ));
            }
            Some((lo, hi))
        }
    };
    let times = raw
        .times
        .as_ref()
        .map(|t| time_grid(t, horizon))
        .transpose()?;
    if !(raw.noise >= 0.0 && raw.noise.is_finite()) {
        return Err(CliError::invalid(
            "noise",
            format!("must be >= 0, got {}", raw.noise),
        ));
    }
    let noise = Noise {
        sigma: raw.noise,
        seed: raw.seed,
    };
    if let Some(t) = raw.terms {
        if t < fdw_core::inverse::MIN_TERMS {
            return Err(CliError::invalid(
                "terms",
                format!(
                    "needs at least {} terms, got {t}",
                    fdw_core::inverse::MIN_TERMS
                ),
            ));
        }
    }
    if let (Some(m), Some(avail)) = (raw.modes, modes_avail) {
        if m == 0 || m > avail {
            return Err(CliError::invalid(
                "modes",
                format!("must lie in 1..={avail}, got {m}"),
            ));
        }
    }

    if let Some(e) = &raw.expand {
        if e.terms == 0 {
            return Err(CliError::invalid("expand.terms", "needs at least one term"));
        }
        if e.samples < 3 {
            return Err(CliError::invalid(
                "expand.samples",
                "needs at least 3 samples",
            ));
        }
        if let Some([lo, hi]) = e.window {
            if !(lo > 0.0 && hi > lo && hi.is_finite()) {
                return Err(CliError::invalid(
                    "expand.window",
                    "must be an increasing positive pair",
                ));
            }
        }
    }
    if let Some(c) = &raw.caputo {
        if !(c.horizon > 0.0 && c.horizon.is_finite()) {
            return Err(CliError::invalid("caputo.horizon", "must be positive"));
        }
        if c.steps.is_empty() || c.steps.iter().any(|s| *s < 2) {
            return Err(CliError::invalid(
                "caputo.steps",
                "needs step counts of at least 2",
            ));
        }
        if !(0.0..c.horizon).contains(&c.from) {
            return Err(CliError::invalid("caputo.from", "must lie in [0, horizon)"));
        }
        if c.points == 0 {
            return Err(CliError::invalid(
                "caputo.points",
                "needs at least one point",
            ));
        }
    }
    let second = match raw.second {
        None => None,
        Some(s) => match (s.scale, s.f, s.mu) {
            (Some(c), None, None) => {
                check_finite("second.scale", c)?;
                if c == 0.0 {
                    return Err(CliError::invalid("second.scale", "must be nonzero"));
                }
                Some(Second::Scale(c))
            }
            (None, f, m) if f.is_some() || m.is_some() => Some(Second::Data {
                f: f.as_deref()
                    .map(|c| field_of("second.f", c, modes_avail))
                    .transpose()?,
                mu: m.map(|m| profile("second.mu", m)).transpose()?,
            }),
            _ => {
                return Err(CliError::invalid(
                    "second",
                    "give either `scale` or replacements `f` and/or `mu`",
                ))
            }
        },
    };
    if let Some(o) = &raw.ode {
        if let Some(l) = o.lambda {
            if !(l > 0.0 && l.is_finite()) {
                return Err(CliError::invalid(
                    "ode.lambda",
                    format!("must be positive, got {l}"),
                ));
            }
        }
        check_finite("ode.a", o.a)?;
        check_finite("ode.b", o.b)?;
        check_finite("ode.f", o.f)?;
        if let Some(x0) = o.x0 {
            check_finite("ode.x0", x0)?;
        }
        if o.lambda.is_none() && o.x0.is_none() {
            return Err(CliError::invalid(
                "ode",
                "set `lambda` (scalar mode) or `x0` (point mode)",
            ));
        }
    }
    let witness = raw
        .witness
        .map(|w| -> CliResult<Witness> {
            check_finite("witness.param", w.param)?;
            if w.count < 2 {
                return Err(CliError::invalid(
                    "witness.count",
                    "needs at least 2 samples",
                ));
            }
            Ok(Witness {
                order: match w.order {
                    OrderName::One => WitnessOrder::One,
                    OrderName::Two => WitnessOrder::Two,
                },
                param: w.param,
                horizon: w.horizon,
                contrast: FractionalOrder::new(w.contrast_alpha)
                    .map_err(|e| CliError::field("witness.contrast_alpha", e))?,
                count: w.count,
            })
        })
        .transpose()?;
    let ml_raw = raw.ml.unwrap_or_default();
    let ml = match ml_raw.beta {
        Some(beta) => {
            let pair =
                MlOrderPair::new(beta, ml_raw.gamma).map_err(|e| CliError::field("ml", e))?;
            if ml_raw.z.is_empty() {
                return Err(CliError::invalid("ml.z", "needs at least one argument"));
            }
            if let Some(z) = ml_raw.z.iter().find(|z| !z.is_finite()) {
                return Err(CliError::invalid(
                    "ml.z",
                    format!("must be finite, got {z}"),
                ));
            }
            MlTask::Values { pair, z: ml_raw.z }
        }
        None => {
            if ml_raw.points < 2 {
                return Err(CliError::invalid("ml.points", "needs at least 2 points"));
            }
            for (name, v) in [
                ("ml.x_max", ml_raw.x_max),
                ("ml.r", ml_raw.r),
                ("ml.t_max", ml_raw.t_max),
            ] {
                if !(v > 0.0 && v.is_finite()) {
                    return Err(CliError::invalid(
                        name,
                        format!("must be positive, got {v}"),
                    ));
                }
            }
            MlTask::Identities {
                points: ml_raw.points,
                x_max: ml_raw.x_max,
                r: ml_raw.r,
                t_max: ml_raw.t_max,
            }
        }
    };

    Ok(Experiment {
        alpha,
        op,
        spec,
        mu,
        omega,
        times,
        noise,
        terms: raw.terms,
        modes: raw.modes,
        ell: raw.ell,
        expand: raw.expand,
        caputo: raw.caputo,
        second,
        ode: raw.ode,
        witness,
        ml,
    })
}
