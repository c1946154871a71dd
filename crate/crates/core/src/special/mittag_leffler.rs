//! Two-parameter Mittag-Leffler function E_{β,γ}(z) on the real axis.
//!
//! Branches are chosen by the natural scale `c = |z|^{1/β}`: the Taylor
//! terms of E_{β,γ}(-x) peak near e^{c} before cancelling down to O(1), and the
//! smallest asymptotic term is of size e^{-c}.
//!
//! * `c <= 4` or `z >= 0`: Taylor series in double precision with compensated
//!   summation.
//! * `4 < c < 36`: Taylor series in 384-bit MPFR arithmetic. The reciprocal
//!   gamma coefficients are computed once per (β, γ) and cached for the
//!   lifetime of the process.
//! * `c >= 36`: algebraic asymptotic series with optimal truncation, plus the
//!   oscillatory exponential contribution when β >= 1.
//!
//! Every evaluation carries an error bound; a branch whose bound exceeds
//! `1e-10 · max(1, |value|)` is rejected and the others are tried.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, Mutex, OnceLock};

use rug::Float;

use super::gamma::{gamma_recip, ln_gamma_abs, recip_gamma_parts};
use crate::error::{Error, Result};

/// Below this scale the double precision Taylor series is accurate.
pub const TAYLOR_MAX_SCALE: f64 = 4.0;
/// From this scale on the asymptotic series is used.
pub const ASYMPTOTIC_MIN_SCALE: f64 = 36.0;
/// Largest scale the cached high precision coefficients are sized for.
pub const HIGH_PRECISION_MAX_SCALE: f64 = 64.0;
/// Acceptance threshold for `abs_error_bound / max(1, |value|)`.
pub const ACCEPT_TOL: f64 = 1e-10;

const HP_PREC: u32 = 384;
const MAX_TAYLOR_TERMS: usize = 4000;
const MAX_ASYMPTOTIC_TERMS: usize = 4000;
const F64_ROUND: f64 = 1.2e-16;

/// Parameters (β, γ) of E_{β,γ}; both strictly positive.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MlOrderPair {
    beta: f64,
    gamma: f64,
}

impl MlOrderPair {
    pub fn new(beta: f64, gamma: f64) -> Result<Self> {
        if !(beta > 0.0 && beta.is_finite()) {
            return Err(Error::invalid(format!(
                "Mittag-Leffler beta must be positive, got {beta}"
            )));
        }
        if !(gamma > 0.0 && gamma.is_finite()) {
            return Err(Error::invalid(format!(
                "Mittag-Leffler gamma must be positive, got {gamma}"
            )));
        }
        Ok(Self { beta, gamma })
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Branch {
    TaylorSeries,
    AsymptoticSeries,
    HighPrecisionFallback,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MlEvaluation {
    pub value: f64,
    pub abs_error_bound: f64,
    pub branch: Branch,
}

impl MlEvaluation {
    fn accepted(&self) -> bool {
        self.value.is_finite()
            && self.abs_error_bound.is_finite()
            && self.abs_error_bound <= ACCEPT_TOL * self.value.abs().max(1.0)
    }
}

/// Compensated (Neumaier) running sum.
#[derive(Default, Clone, Copy)]
struct KahanSum {
    sum: f64,
    comp: f64,
}

impl KahanSum {
    fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

struct HighPrecisionSeries {
    coeffs: Vec<Float>,
    ln_abs: Vec<f64>,
}

impl HighPrecisionSeries {
    fn build(pair: MlOrderPair) -> Self {
        let beta = Float::with_val(HP_PREC, pair.beta);
        let gamma = Float::with_val(HP_PREC, pair.gamma);
        let ln_x_max = pair.beta * HIGH_PRECISION_MAX_SCALE.ln();
        let floor = -(HP_PREC as f64) * std::f64::consts::LN_2;
        let mut coeffs = Vec::new();
        let mut ln_abs = Vec::new();
        let mut k = 0usize;
        loop {
            let arg = Float::with_val(HP_PREC, &beta * k as u32) + &gamma;
            let c = arg.gamma().recip();
            let lc = ln_gamma_abs(pair.beta * k as f64 + pair.gamma);
            coeffs.push(c);
            ln_abs.push(-lc);
            // past the peak and negligible even at the largest supported |z|
            let past_peak = pair.beta * k as f64 + pair.gamma > 2.0 * HIGH_PRECISION_MAX_SCALE;
            if (past_peak && -lc + k as f64 * ln_x_max < floor) || k >= 3 * MAX_TAYLOR_TERMS {
                break;
            }
            k += 1;
        }
        Self { coeffs, ln_abs }
    }
}

type SeriesTables = Mutex<HashMap<(u64, u64), Arc<HighPrecisionSeries>>>;

/// Process-wide high precision tables keyed by the bits of (β, γ).
fn shared_series(pair: MlOrderPair) -> Arc<HighPrecisionSeries> {
    static TABLES: OnceLock<SeriesTables> = OnceLock::new();
    let key = (pair.beta.to_bits(), pair.gamma.to_bits());
    let tables = TABLES.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(t) = tables.lock().unwrap_or_else(|e| e.into_inner()).get(&key) {
        return Arc::clone(t);
    }
    // built outside the lock; a concurrent duplicate build is harmless
    let built = Arc::new(HighPrecisionSeries::build(pair));
    let mut guard = tables.lock().unwrap_or_else(|e| e.into_inner());
    Arc::clone(guard.entry(key).or_insert(built))
}

/// Evaluator for a fixed (β, γ). Cheap to construct; the high precision
/// coefficient table is built on first use and shared by every evaluator
/// with the same parameters.
pub struct MittagLeffler {
    pair: MlOrderPair,
    hp: OnceLock<Arc<HighPrecisionSeries>>,
}

impl std::fmt::Debug for MittagLeffler {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("MittagLeffler")
            .field("pair", &self.pair)
            .finish()
    }
}

impl Clone for MittagLeffler {
    fn clone(&self) -> Self {
        Self::new(self.pair)
    }
}

impl MittagLeffler {
    pub fn new(pair: MlOrderPair) -> Self {
        Self {
            pair,
            hp: OnceLock::new(),
        }
    }

    pub fn pair(&self) -> MlOrderPair {
        self.pair
    }

    /// The branch the automatic selection tries first for `z`.
    pub fn preferred_branch(&self, z: f64) -> Branch {
        if z >= 0.0 {
            return Branch::TaylorSeries;
        }
        let scale = (-z).powf(1.0 / self.pair.beta);
        if scale <= TAYLOR_MAX_SCALE {
            Branch::TaylorSeries
        } else if scale < ASYMPTOTIC_MIN_SCALE {
            Branch::HighPrecisionFallback
        } else {
            Branch::AsymptoticSeries
        }
    }

    pub fn eval(&self, z: f64) -> Result<MlEvaluation> {
        if !z.is_finite() {
            return Err(Error::invalid(format!(
                "Mittag-Leffler argument must be finite, got {z}"
            )));
        }
        let first = self.preferred_branch(z);
        let order: &[Branch] = match first {
            Branch::TaylorSeries => &[Branch::TaylorSeries, Branch::HighPrecisionFallback],
            Branch::HighPrecisionFallback => &[
                Branch::HighPrecisionFallback,
                Branch::AsymptoticSeries,
                Branch::TaylorSeries,
            ],
            Branch::AsymptoticSeries => &[Branch::AsymptoticSeries, Branch::HighPrecisionFallback],
        };
        let mut best: Option<MlEvaluation> = None;
        for &branch in order {
            if branch == Branch::AsymptoticSeries && z >= 0.0 {
                continue;
            }
            let ev = self.eval_branch(z, branch);
            if ev.accepted() {
                return Ok(ev);
            }
            if best.is_none_or(|b| ev.abs_error_bound < b.abs_error_bound) {
                best = Some(ev);
            }
        }
        let best = best.expect("at least one branch attempted");
        Err(Error::NonConvergence(format!(
            "E_{{{},{}}}({z}): best bound {:e} from {:?}",
            self.pair.beta, self.pair.gamma, best.abs_error_bound, best.branch
        )))
    }

    /// Evaluates with a forced branch, without the acceptance test.
    /// The asymptotic branch requires `z < 0`.
    pub fn eval_branch(&self, z: f64, branch: Branch) -> MlEvaluation {
        match branch {
            Branch::TaylorSeries => self.taylor(z),
            Branch::HighPrecisionFallback => self.taylor_high_precision(z),
            Branch::AsymptoticSeries => self.asymptotic(-z),
        }
    }

    fn taylor(&self, z: f64) -> MlEvaluation {
        let MlOrderPair { beta, gamma } = self.pair;
        let failed = |value: f64| MlEvaluation {
            value,
            abs_error_bound: f64::INFINITY,
            branch: Branch::TaylorSeries,
        };
        if z == 0.0 {
            return MlEvaluation {
                value: gamma_recip(gamma),
                abs_error_bound: F64_ROUND * gamma_recip(gamma).abs(),
                branch: Branch::TaylorSeries,
            };
        }
        let ln_z = z.abs().ln();
        let mut sum = KahanSum::default();
        let mut rounding = 0.0;
        for k in 0..MAX_TAYLOR_TERMS {
            let arg = beta * k as f64 + gamma;
            let ln_coef = ln_gamma_abs(arg);
            let ln_mag = k as f64 * ln_z - ln_coef;
            if ln_mag > 700.0 {
                return failed(sum.value());
            }
            let sign = if z < 0.0 && k % 2 == 1 { -1.0 } else { 1.0 };
            let term = sign * ln_mag.exp();
            sum.add(term);
            rounding += term.abs() * 1e-15 * (1.0 + ln_coef.abs() + k as f64 * ln_z.abs() * 0.1);

            // ratios |t_{j+1}/t_j| decrease in j, so the tail is geometric
            let next_ratio = (ln_z + ln_coef - ln_gamma_abs(arg + beta)).exp();
            if next_ratio < 1.0 {
                let next = term.abs() * next_ratio;
                let tail = next / (1.0 - next_ratio);
                if tail <= 1e-17 * sum.value().abs().max(1e-300) || tail < 1e-300 {
                    let value = sum.value();
                    return MlEvaluation {
                        value,
                        abs_error_bound: tail + rounding + F64_ROUND * value.abs(),
                        branch: Branch::TaylorSeries,
                    };
                }
            }
        }
        failed(sum.value())
    }

    fn taylor_high_precision(&self, z: f64) -> MlEvaluation {
        let hp = self.hp.get_or_init(|| shared_series(self.pair));
        let failed = MlEvaluation {
            value: f64::NAN,
            abs_error_bound: f64::INFINITY,
            branch: Branch::HighPrecisionFallback,
        };
        let zf = Float::with_val(HP_PREC, z);
        let mut acc = Float::with_val(HP_PREC, 0.0);
        let mut power = Float::with_val(HP_PREC, 1.0);
        let ln_z = if z == 0.0 {
            f64::NEG_INFINITY
        } else {
            z.abs().ln()
        };
        let mut max_ln_term = f64::NEG_INFINITY;
        let n = hp.coeffs.len();
        for k in 0..n {
            acc += &power * &hp.coeffs[k];
            let ln_term = hp.ln_abs[k] + k as f64 * ln_z;
            max_ln_term = max_ln_term.max(ln_term);
            if k + 1 < n {
                let ratio = (ln_z + hp.ln_abs[k + 1] - hp.ln_abs[k]).exp();
                let acc_ln = acc.to_f64().abs().max(1e-300).ln();
                if ratio < 1.0 {
                    let next_ln = ln_term + ratio.ln();
                    let tail_ln = next_ln - (1.0 - ratio).ln();
                    if tail_ln < acc_ln - 90.0 || tail_ln < -700.0 {
                        let value = acc.to_f64();
                        let rounding = (max_ln_term + (n as f64).ln()
                            - (HP_PREC as f64 - 8.0) * std::f64::consts::LN_2)
                            .exp();
                        return MlEvaluation {
                            value,
                            abs_error_bound: tail_ln.exp() + rounding + F64_ROUND * value.abs(),
                            branch: Branch::HighPrecisionFallback,
                        };
                    }
                }
            }
            power *= &zf;
        }
        failed
    }

    /// E_{β,γ}(-x) for large x: algebraic series plus the exponential part.
    fn asymptotic(&self, x: f64) -> MlEvaluation {
        if !(x > 0.0) {
            return MlEvaluation {
                value: f64::NAN,
                abs_error_bound: f64::INFINITY,
                branch: Branch::AsymptoticSeries,
            };
        }
        let (exp_value, exp_err) = exponential_part(self.pair, x);
        let alg = algebraic_series(self.pair, x, None);
        let value = alg.sum + exp_value;

        MlEvaluation {
            value,
            abs_error_bound: alg.omitted + alg.rounding + exp_err + F64_ROUND * value.abs(),
            branch: Branch::AsymptoticSeries,
        }
    }
}

struct AlgebraicSum {
    sum: f64,
    /// Magnitude of the first omitted nonzero term.
    omitted: f64,
    rounding: f64,
    /// Index of the last nonzero term included.
    last_included: usize,
    /// Set when the nonzero term magnitudes started increasing at or before
    /// the requested count.
    diverged_at: Option<usize>,
}

/// Partial sums of -Σ_{k>=1} (-x)^{-k} / Γ(γ - βk). With `n_terms = None` the
/// series is truncated optimally (just before the smallest term, or once the
/// terms are negligible).
fn algebraic_series(pair: MlOrderPair, x: f64, n_terms: Option<usize>) -> AlgebraicSum {
    let ln_x = x.ln();
    let mut sum = KahanSum::default();
    let mut rounding = 0.0;
    let mut prev_ln: Option<f64> = None;
    let mut last_included = 0;
    let mut diverged_at = None;
    let cap = n_terms.unwrap_or(MAX_ASYMPTOTIC_TERMS);
    let mut k = 1;
    loop {
        let y = pair.gamma - pair.beta * k as f64;
        let parts = recip_gamma_parts(y);
        if let Some((sign, ln_recip)) = parts {
            let ln_mag = ln_recip - k as f64 * ln_x;
            // |1/Γ(y)| <= Γ(1-y)/π for y < 0; the envelope drives truncation
            // because sin(πy) makes individual terms irregular
            let ln_env = if y > 0.0 {
                ln_mag
            } else {
                ln_gamma_abs(1.0 - y) - PI.ln() - k as f64 * ln_x
            };
            let increasing = prev_ln.is_some_and(|p| ln_env > p);
            if k > cap || (n_terms.is_none() && increasing) {
                return AlgebraicSum {
                    sum: sum.value(),
                    omitted: ln_env.exp(),
                    rounding,
                    last_included,
                    diverged_at,
                };
            }
            if increasing && diverged_at.is_none() {
                diverged_at = Some(k);
            }
            let term = if k % 2 == 1 { sign } else { -sign } * ln_mag.exp();
            if n_terms.is_none() && ln_env.exp() < 1e-18 * sum.value().abs() {
                return AlgebraicSum {
                    sum: sum.value(),
                    omitted: ln_env.exp(),
                    rounding,
                    last_included,
                    diverged_at,
                };
            }
            sum.add(term);
            // y = γ - βk carries a rounding error that 1/Γ amplifies near its zeros
            let dy = 4.4e-16 * (pair.gamma.abs() + pair.beta * k as f64);
            let sensitivity = if y > 0.0 {
                (1.0 + y).ln() + 1.0
            } else {
                (2.0 - y).ln() + 1.0 + PI / (PI * y).tan().abs()
            };
            rounding += term.abs() * (5e-15 * (1.0 + ln_recip.abs() * 0.05) + dy * sensitivity);
            prev_ln = Some(ln_env);
            last_included = k;
        } else if k > cap && k > cap + 64 {
            // every remaining coefficient vanished within the search window
            return AlgebraicSum {
                sum: sum.value(),
                omitted: 0.0,
                rounding,
                last_included,
                diverged_at,
            };
        }
        if n_terms.is_none() && k >= MAX_ASYMPTOTIC_TERMS {
            return AlgebraicSum {
                sum: sum.value(),
                omitted: 0.0,
                rounding,
                last_included,
                diverged_at,
            };
        }
        k += 1;
    }
}

/// Exponential (non-algebraic) part of E_{β,γ}(-x) and an error estimate.
/// Zero for β < 1; a single decaying term at β = 1; two conjugate saddle
/// contributions for 1 < β <= 2.
fn exponential_part(pair: MlOrderPair, x: f64) -> (f64, f64) {
    let MlOrderPair { beta, gamma } = pair;
    let c = x.powf(1.0 / beta);
    if beta < 1.0 - 1e-14 {
        // no exponential term on the principal sheet, but near β = 1 its
        // Stokes-smoothed remnant is not negligible at double precision
        let theta = PI / beta;
        if theta.cos() < 0.0 {
            let delta = theta - PI;
            let smoothing = (-c * delta * delta / 4.0).exp();
            let amp = (2.0 / beta) * c.powf(1.0 - gamma) * (c * theta.cos()).exp();
            return (0.0, amp * smoothing);
        }
        return (0.0, 0.0);
    }
    if (beta - 1.0).abs() <= 1e-14 {
        // z^{1-γ} e^{z} at z = -x, averaged over the two branches of the power
        let amp = x.powf(1.0 - gamma) * (-x).exp();
        let value = amp * (PI * (1.0 - gamma)).cos();
        let err = if (gamma - gamma.round()).abs() < 1e-14 {
            1e-15 * amp
        } else {
            amp
        };
        return (value, err);
    }
    let theta = PI / beta;
    let amp = (2.0 / beta) * c.powf(1.0 - gamma) * (c * theta.cos()).exp();
    let phase = c * theta.sin() + theta * (1.0 - gamma);
    // Stokes smoothing leaves part of the switched-on exponential uncertain
    // when π/β is close to π
    let delta = PI - theta;
    let smoothing = (-c * delta * delta / 4.0).exp();
    (
        amp * phase.cos(),
        amp * (1e-15 + 4.4e-16 * c * (2.0 + c.ln()) + smoothing),
    )
}

/// E_{β,γ}(z) with automatic branch selection.
pub fn ml_eval(pair: MlOrderPair, z: f64) -> Result<MlEvaluation> {
    MittagLeffler::new(pair).eval(z)
}

/// Truncated asymptotic series E_{β,γ}(-x) ≈ -Σ_{k=1}^{n} (-x)^{-k}/Γ(γ - βk).
///
/// The returned bound is `x^{-(n+1)} C(p, n)` with
/// `C(p, n) = |1/Γ(γ - βk*)| x^{n+1-k*}` for the first `k* > n` whose
/// coefficient does not vanish, plus the size of the exponentially small
/// oscillatory part that this series omits when β >= 1. It is the usual
/// first-omitted-term estimate, not a proven enclosure.
pub fn ml_asym_neg(pair: MlOrderPair, x: f64, n_terms: usize) -> Result<MlEvaluation> {
    if !(x >= 1.0) {
        return Err(Error::invalid(format!(
            "asymptotic series needs x >= 1, got {x}"
        )));
    }
    if pair.beta >= 2.0 {
        return Err(Error::invalid(format!(
            "asymptotic series needs 0 < beta < 2, got {}",
            pair.beta
        )));
    }
    if n_terms == 0 {
        return Err(Error::invalid("n_terms must be positive"));
    }
    let alg = algebraic_series(pair, x, Some(n_terms));
    if let Some(k) = alg.diverged_at {
        return Err(Error::AsymptoticDivergence {
            requested: n_terms,
            optimal: k - 1,
        });
    }
    let (_, exp_err) = exponential_part(pair, x);
    let exp_mag = if pair.beta >= 1.0 - 1e-14 {
        exponential_part(pair, x).0.abs() + exp_err
    } else {
        0.0
    };
    debug_assert!(alg.last_included <= n_terms);
    Ok(MlEvaluation {
        value: alg.sum,
        abs_error_bound: alg.omitted + alg.rounding + exp_mag + F64_ROUND * alg.sum.abs(),
        branch: Branch::AsymptoticSeries,
    })
}
