//! The source time factor μ(t), its signed moments, the fractional order and
//! the exponent bookkeeping that depends on both.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance for deciding that α·j is an integer.
pub const INTEGER_TOL: f64 = 1e-12;
/// Largest denominator tried when looking for a rational form of α.
pub const MAX_DENOMINATOR: u64 = 1_000_000;
/// Moment indices searched for ℓ₀.
pub const MAX_MOMENT_INDEX: usize = 64;
/// Default relative zero-test tolerance for moments.
pub const MOMENT_TOL: f64 = 1e-10;

/// Sub-diffusive (α ≤ 1, no initial velocity) or wave-like (α > 1).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Regime {
    Sub,
    Super,
}

/// The order α ∈ (0, 2] with regime and rationality metadata.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FractionalOrder {
    value: f64,
    rational: Option<(u64, u64)>,
}

impl FractionalOrder {
    /// Accepts α ∈ (0, 2]; the classical orders 1 and 2 are allowed so the
    /// forward solver can reproduce heat and wave solutions.
    pub fn new(value: f64) -> Result<Self> {
        if !(value > 0.0 && value <= 2.0) {
            return Err(Error::invalid(format!(
                "alpha must lie in (0, 2], got {value}"
            )));
        }
        Ok(FractionalOrder {
            value,
            rational: rational_approximation(value, MAX_DENOMINATOR, INTEGER_TOL),
        })
    }

    /// Like [`new`](Self::new) but refusing α = 1 and α = 2.
    pub fn fractional(value: f64) -> Result<Self> {
        let a = Self::new(value)?;
        if a.is_classical() {
            return Err(Error::invalid(format!(
                "alpha must lie in (0,1) or (1,2), got {value}"
            )));
        }
        Ok(a)
    }

    pub fn value(&self) -> f64 {
        self.value
    }

    pub fn regime(&self) -> Regime {
        if self.value > 1.0 {
            Regime::Super
        } else {
            Regime::Sub
        }
    }

    pub fn is_classical(&self) -> bool {
        (self.value - 1.0).abs() < INTEGER_TOL || (self.value - 2.0).abs() < INTEGER_TOL
    }

    /// `(p, q)` with α ≈ p/q, or `None` when no such pair with q ≤ 10⁶ exists.
    pub fn rational(&self) -> Option<(u64, u64)> {
        self.rational
    }

    pub fn is_rational(&self) -> bool {
        self.rational.is_some()
    }
}

/// Continued-fraction search for p/q with |x − p/q| < tol and q ≤ max_q.
pub fn rational_approximation(x: f64, max_q: u64, tol: f64) -> Option<(u64, u64)> {
    if !(x >= 0.0) || !x.is_finite() {
        return None;
    }
    let (mut p0, mut q0, mut p1, mut q1) = (0u64, 1u64, 1u64, 0u64);
    let mut r = x;
    for _ in 0..64 {
        let a = r.floor();
        if a > u32::MAX as f64 {
            return None;
        }
        let a = a as u64;
        let p2 = a.checked_mul(p1)?.checked_add(p0)?;
        let q2 = a.checked_mul(q1)?.checked_add(q0)?;
        if q2 > max_q {
            return None;
        }
        if (x - p2 as f64 / q2 as f64).abs() < tol {
            return Some((p2, q2));
        }
        let frac = r - a as f64;
        if frac == 0.0 {
            return None;
        }
        r = 1.0 / frac;
        (p0, q0, p1, q1) = (p1, q1, p2, q2);
    }
    None
}

/// One polynomial piece p(s) = Σ_j coeffs[j]·s^j on [start, end].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Piece {
    pub start: f64,
    pub end: f64,
    pub coeffs: Vec<f64>,
}

impl Piece {
    pub fn eval(&self, s: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, c| acc * s + c)
    }

    /// ∫_start^end (−s)^m p(s) ds in closed form.
    fn moment(&self, m: usize) -> f64 {
        let sign = if m.is_multiple_of(2) { 1.0 } else { -1.0 };
        let total: f64 = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(j, c)| {
                let e = (m + j + 1) as i32;
                c * (self.end.powi(e) - self.start.powi(e)) / e as f64
            })
            .sum();
        sign * total
    }

    /// Σ |coeffs[j]|·max(|start|,|end|)^j, an upper bound for |p| on the piece.
    fn coefficient_bound(&self) -> f64 {
        let r = self.start.abs().max(self.end.abs());
        self.coeffs
            .iter()
            .rev()
            .fold(0.0, |acc, c| acc * r + c.abs())
    }
}

/// Piecewise polynomial source factor supported in [0, T].
#[derive(Debug, Clone, PartialEq)]
pub struct SourceProfile {
    pieces: Vec<Piece>,
    horizon: f64,
    sup_norm: f64,
}

impl SourceProfile {
    /// Builds μ from pieces inside [0, T]. Pieces may overlap, in which case
    /// they add. μ ≡ 0 is refused.
    pub fn new(pieces: Vec<Piece>, horizon: f64) -> Result<Self> {
        if !(horizon > 0.0 && horizon.is_finite()) {
            return Err(Error::invalid(format!(
                "horizon T must be positive, got {horizon}"
            )));
        }
        for p in &pieces {
            if !(0.0 <= p.start && p.start < p.end && p.end <= horizon) {
                return Err(Error::invalid(format!(
                    "piece [{}, {}] must satisfy 0 <= start < end <= T = {horizon}",
                    p.start, p.end
                )));
            }
            if p.coeffs.iter().any(|c| !c.is_finite()) {
                return Err(Error::invalid("piece coefficients must be finite"));
            }
        }
        if pieces.iter().all(|p| p.coeffs.iter().all(|c| *c == 0.0)) {
            return Err(Error::invalid("source profile is identically zero"));
        }
        let mut profile = SourceProfile {
            pieces,
            horizon,
            sup_norm: 0.0,
        };
        profile.sup_norm = profile.sampled_sup();
        Ok(profile)
    }

    /// μ ≡ c on [start, end] ⊂ [0, T].
    pub fn constant(c: f64, start: f64, end: f64, horizon: f64) -> Result<Self> {
        Self::new(
            vec![Piece {
                start,
                end,
                coeffs: vec![c],
            }],
            horizon,
        )
    }

    /// Single polynomial piece on [0, T].
    pub fn polynomial(coeffs: Vec<f64>, horizon: f64) -> Result<Self> {
        Self::new(
            vec![Piece {
                start: 0.0,
                end: horizon,
                coeffs,
            }],
            horizon,
        )
    }

    pub fn pieces(&self) -> &[Piece] {
        &self.pieces
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn eval(&self, s: f64) -> f64 {
        self.pieces
            .iter()
            .filter(|p| p.start <= s && s <= p.end)
            .map(|p| p.eval(s))
            .sum()
    }

    /// The same profile multiplied by `c` (c ≠ 0).
    pub fn scaled(&self, c: f64) -> Result<Self> {
        let pieces = self
            .pieces
            .iter()
            .map(|p| Piece {
                start: p.start,
                end: p.end,
                coeffs: p.coeffs.iter().map(|x| x * c).collect(),
            })
            .collect();
        Self::new(pieces, self.horizon)
    }

    /// ‖μ‖_∞ estimated on a dense sample of every piece.
    pub fn sup_norm(&self) -> f64 {
        self.sup_norm
    }

    fn sampled_sup(&self) -> f64 {
        let mut best: f64 = 0.0;
        for p in &self.pieces {
            for i in 0..=512 {
                let s = p.start + (p.end - p.start) * i as f64 / 512.0;
                best = best.max(self.eval(s).abs());
            }
        }
        // tiny pieces can hide between samples; fall back to the coefficient bound
        if best == 0.0 {
            best = self.pieces.iter().map(Piece::coefficient_bound).sum();
        }
        best
    }

    /// μ_m = ∫_0^T (−s)^m μ(s) ds.
    pub fn moment(&self, m: usize) -> f64 {
        self.pieces.iter().map(|p| p.moment(m)).sum()
    }

    /// Natural size ‖μ‖_∞ T^{m+1}/(m+1) of the m-th moment.
    pub fn moment_scale(&self, m: usize) -> f64 {
        self.sup_norm * self.horizon.powi(m as i32 + 1) / (m as f64 + 1.0)
    }

    /// `true` when μ_m is distinguishable from zero at relative tolerance `tol`.
    pub fn moment_is_nonzero(&self, m: usize, tol: f64) -> bool {
        self.moment(m).abs() > tol * self.moment_scale(m)
    }

    /// (ℓ₀, μ_{ℓ₀}): the first moment that is not zero.
    pub fn leading_index(&self, tol: f64) -> Result<(usize, f64)> {
        (0..=MAX_MOMENT_INDEX)
            .find(|&m| self.moment_is_nonzero(m, tol))
            .map(|m| (m, self.moment(m)))
            .ok_or(Error::IndexSearchExhausted {
                max_index: MAX_MOMENT_INDEX,
            })
    }

    /// First nonzero moment index strictly after `after`, if any within the cap.
    pub fn next_nonzero_index(&self, after: usize, tol: f64) -> Option<usize> {
        (after + 1..=MAX_MOMENT_INDEX).find(|&m| self.moment_is_nonzero(m, tol))
    }
}

/// ℓ₁: the first index at which either profile has a nonzero moment.
pub fn pair_leading_index(mu: &SourceProfile, mu2: &SourceProfile, tol: f64) -> Result<usize> {
    (0..=MAX_MOMENT_INDEX)
        .find(|&m| mu.moment_is_nonzero(m, tol) || mu2.moment_is_nonzero(m, tol))
        .ok_or(Error::IndexSearchExhausted {
            max_index: MAX_MOMENT_INDEX,
        })
}

/// Increasing integers m(1) < m(2) < … with α·m(k) not an integer.
#[derive(Debug, Clone, PartialEq)]
pub struct ExponentLattice {
    pub alpha: FractionalOrder,
    pub indices: Vec<usize>,
}

impl ExponentLattice {
    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }
}

/// `true` when α·j is within [`INTEGER_TOL`] of an integer.
pub fn hits_integer(alpha: f64, j: usize) -> bool {
    let v = alpha * j as f64;
    (v - v.round()).abs() < INTEGER_TOL
}

/// The first `count` lattice indices. For α = 1 or 2 the lattice is empty.
pub fn exponent_lattice(alpha: FractionalOrder, count: usize) -> ExponentLattice {
    let indices = if alpha.is_classical() {
        Vec::new()
    } else {
        (1..)
            .filter(|&j| !hits_integer(alpha.value(), j))
            .take(count)
            .collect()
    };
    ExponentLattice { alpha, indices }
}

/// Outcome of the excluded-order test.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Admissibility {
    pub admissible: bool,
    /// Closest member of the excluded set.
    pub nearest_excluded: f64,
    /// Its representation (numerator, n) as (ℓ+1)/n or (ℓ+2)/n.
    pub nearest_fraction: (usize, usize),
}

/// Tests α against {(ℓ+1)/n} and, in the wave-like regime, {(ℓ+2)/n}.
pub fn admissible_alpha(alpha: FractionalOrder, ell: usize, tol: f64) -> Admissibility {
    let a = alpha.value();
    let mut numerators = vec![ell + 1];
    if alpha.regime() == Regime::Super {
        numerators.push(ell + 2);
    }
    let mut best = (f64::INFINITY, 0.0, (0, 0));
    for num in numerators {
        let q = num as f64 / a;
        let lo = (q.floor() as usize).max(1);
        for n in [lo, lo + 1] {
            let v = num as f64 / n as f64;
            let d = (v - a).abs();
            if d < best.0 {
                best = (d, v, (num, n));
            }
        }
    }
    Admissibility {
        admissible: best.0 > tol,
        nearest_excluded: best.1,
        nearest_fraction: best.2,
    }
}
