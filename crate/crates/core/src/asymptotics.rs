//! Late-time power-law expansion of the series solution.
//!
//! For t > 2T every mode behaves like
//!
//! u_n(t) ≈ Σ_k Q_k t^{−αm(k)} + Σ_k R_k t^{−αm(k)+1} + Σ_k S_k μ_{ℓ₀} t^{−αm(k)−ℓ₀−1},
//!
//! where m(k) runs over the exponent lattice and ℓ₀ is the first nonzero
//! moment of μ. The R family exists only for α > 1.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::forward::{fmt_f64, ProblemSpec};
use crate::quadrature::Rule;
use crate::source_profile::{exponent_lattice, ExponentLattice, SourceProfile, MOMENT_TOL};
use crate::special::gamma_recip;
use crate::spectrum::{SpatialField, SpectralOperator};

/// Exponents closer than this are treated as colliding.
pub const COLLISION_TOL: f64 = 1e-9;

/// x(x−1)⋯(x−ℓ+1)/ℓ!, with the empty product for ℓ = 0.
pub fn gen_binom(x: f64, ell: usize) -> f64 {
    (0..ell).fold(1.0, |acc, i| acc * (x - i as f64) / (i + 1) as f64)
}

fn sign(m: usize) -> f64 {
    if m.is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

/// (−1)^{m+1}/Γ(1−αm): weight of a_n λ_n^{−m} in Q_k.
pub fn q_prefactor(alpha: f64, m: usize) -> f64 {
    -sign(m) * gamma_recip(1.0 - alpha * m as f64)
}

/// (−1)^{m+1}/Γ(2−αm): weight of b_n λ_n^{−m} in R_k.
pub fn r_prefactor(alpha: f64, m: usize) -> f64 {
    -sign(m) * gamma_recip(2.0 - alpha * m as f64)
}

/// (−1)^m/Γ(−αm)·binom(−αm−1, ℓ): weight of μ_ℓ f_n λ_n^{−m−1} in the
/// source term with exponent αm + ℓ + 1.
pub fn s_prefactor(alpha: f64, m: usize, ell: usize) -> f64 {
    let am = alpha * m as f64;
    sign(m) * gamma_recip(-am) * gen_binom(-am - 1.0, ell)
}

/// One term t^{−σ−ℓ} of the expansion of ∫_0^T (t−s)^{−σ} μ(s) ds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailTerm {
    pub ell: usize,
    pub exponent: f64,
    /// binom(−σ, ℓ)·μ_ℓ.
    pub coeff: f64,
}

/// Expansion Σ_ℓ binom(−σ,ℓ) μ_ℓ t^{−σ−ℓ} of the tail integral up to order L.
#[derive(Debug, Clone, PartialEq)]
pub struct TailExpansion {
    pub sigma: f64,
    pub order: usize,
    pub terms: Vec<TailTerm>,
    sup_norm: f64,
    horizon: f64,
}

impl TailExpansion {
    pub fn eval(&self, t: f64) -> f64 {
        self.terms
            .iter()
            .map(|k| k.coeff * t.powf(-k.exponent))
            .sum()
    }

    /// Bound on |∫(t−s)^{−σ}μ ds − eval(t)| for t > 2T.
    ///
    /// With η = s/t ≤ 1/2 the Lagrange remainder of (1−η)^{−σ} after order L is
    /// at most |binom(−σ, L+1)| η^{L+1} 2^{σ+L+1}; integrating against |μ| gives
    /// |binom(−σ,L+1)| 2^{σ+L+1} ‖μ‖_∞ T^{L+2}/(L+2) t^{−σ−L−1}.
    /// Returns infinity for t ≤ 2T, where the bound does not apply.
    pub fn remainder_bound(&self, t: f64) -> f64 {
        if !(t > 2.0 * self.horizon) {
            return f64::INFINITY;
        }
        let l = self.order as f64;
        gen_binom(-self.sigma, self.order + 1).abs()
            * 2f64.powf(self.sigma + l + 1.0)
            * self.sup_norm
            * self.horizon.powf(l + 2.0)
            / (l + 2.0)
            * t.powf(-self.sigma - l - 1.0)
    }
}

/// Moment expansion of ∫_0^T (t−s)^{−σ} μ(s) ds for ℓ = ℓ₀..=L. Orders with a
/// vanishing moment are left out.
pub fn tail_integral_expansion(
    sigma: f64,
    mu: &SourceProfile,
    ell0: usize,
    order: usize,
) -> TailExpansion {
    let terms = (ell0..=order)
        .filter(|&l| mu.moment_is_nonzero(l, MOMENT_TOL))
        .map(|l| TailTerm {
            ell: l,
            exponent: sigma + l as f64,
            coeff: gen_binom(-sigma, l) * mu.moment(l),
        })
        .collect();
    TailExpansion {
        sigma,
        order,
        terms,
        sup_norm: mu.sup_norm(),
        horizon: mu.horizon(),
    }
}

/// ∫_0^T (t−s)^{−σ} μ(s) ds by Gauss-Legendre on every piece, for t > 2T.
pub fn tail_integral(sigma: f64, mu: &SourceProfile, t: f64) -> f64 {
    let rule = Rule::new(TAIL_NODES);
    mu.pieces()
        .iter()
        .map(|p| rule.integrate(p.start, p.end, |s| (t - s).powf(-sigma) * p.eval(s)))
        .sum()
}

const TAIL_NODES: usize = 48;

/// Q_k, R_k and S_k as spectral fields, without the μ_{ℓ₀} factor on S_k.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientFields {
    pub lattice: ExponentLattice,
    pub ell0: usize,
    pub mu_ell0: f64,
    pub q: Vec<SpatialField>,
    /// Present only for α > 1.
    pub r: Option<Vec<SpatialField>>,
    pub s: Vec<SpatialField>,
}

/// Coefficient fields for k = 1..=K.
pub fn coefficient_fields(spec: &ProblemSpec, count: usize) -> Result<CoefficientFields> {
    let alpha = spec.alpha.value();
    let lattice = exponent_lattice(spec.alpha, count);
    let (ell0, mu_ell0) = spec.mu.leading_index(MOMENT_TOL)?;
    let lambdas = spec.op.eigenvalues();
    let field = |data: &SpatialField, pref: f64, power: i32| {
        SpatialField::new(
            data.coeffs
                .iter()
                .zip(lambdas)
                .map(|(c, l)| pref * c * l.powi(-power))
                .collect(),
        )
    };
    let q = lattice
        .indices
        .iter()
        .map(|&m| field(&spec.a, q_prefactor(alpha, m), m as i32))
        .collect();
    let r = spec.b.as_ref().map(|b| {
        lattice
            .indices
            .iter()
            .map(|&m| field(b, r_prefactor(alpha, m), m as i32))
            .collect()
    });
    let s = lattice
        .indices
        .iter()
        .map(|&m| field(&spec.f, s_prefactor(alpha, m, ell0), m as i32 + 1))
        .collect();
    Ok(CoefficientFields {
        lattice,
        ell0,
        mu_ell0,
        q,
        r,
        s,
    })
}

/// Which family a term belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TermKind {
    Q,
    R,
    S,
}

impl TermKind {
    pub fn label(&self) -> &'static str {
        match self {
            TermKind::Q => "Q",
            TermKind::R => "R",
            TermKind::S => "S",
        }
    }
}

/// coeff · t^{−exponent}; S terms carry the μ_{ℓ₀} factor.
#[derive(Debug, Clone, PartialEq)]
pub struct ExpansionTerm {
    pub kind: TermKind,
    /// 1-based position k in the lattice.
    pub k: usize,
    /// Lattice value m(k).
    pub m: usize,
    pub exponent: f64,
    pub coeff: SpatialField,
}

/// Sorted expansion terms with the exponent of the leading omitted term.
#[derive(Debug, Clone, PartialEq)]
pub struct LateTimeExpansion {
    pub terms: Vec<ExpansionTerm>,
    /// Exponent p of the remainder O(t^{−p}).
    pub error_exponent: f64,
    /// Smallest gap between consecutive exponents (infinite for < 2 terms).
    pub min_gap: f64,
}

impl LateTimeExpansion {
    pub fn exponents(&self) -> Vec<f64> {
        self.terms.iter().map(|t| t.exponent).collect()
    }

    /// Σ coeff · t^{−p} as spectral coefficients.
    pub fn eval_spectral(&self, t: f64) -> SpatialField {
        let modes = self
            .terms
            .iter()
            .map(|t| t.coeff.modes())
            .max()
            .unwrap_or(0);
        let mut out = SpatialField::zeros(modes);
        for term in &self.terms {
            out = out.add(&term.coeff.scaled(t.powf(-term.exponent)));
        }
        out
    }

    /// CSV with header `kind,k,exponent,mode,coeff`, modes numbered from 1.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("kind,k,exponent,mode,coeff\n");
        for term in &self.terms {
            for (i, c) in term.coeff.coeffs.iter().enumerate() {
                let _ = writeln!(
                    s,
                    "{},{},{},{},{}",
                    term.kind.label(),
                    term.k,
                    fmt_f64(term.exponent),
                    i + 1,
                    fmt_f64(*c)
                );
            }
        }
        s
    }
}

/// Merges the Q, R and S families for k = 1..=N.
///
/// A family whose data (a, b or f) is identically zero is left out; terms
/// with small but nonzero coefficients are kept. Fails with
/// `ExponentCollision` when two terms of different kinds have exponents
/// closer than `tol`.
pub fn late_time_expansion(spec: &ProblemSpec, n: usize, tol: f64) -> Result<LateTimeExpansion> {
    if n == 0 {
        return Err(Error::invalid(
            "expansion needs at least one term per family",
        ));
    }
    let alpha = spec.alpha.value();
    let fields = coefficient_fields(spec, n + 1)?;
    let lat = &fields.lattice.indices;
    if lat.len() < n + 1 {
        return Err(Error::invalid(format!(
            "alpha = {alpha} has no power-law expansion (classical order)"
        )));
    }
    let ell0 = fields.ell0;
    let mut terms = Vec::new();
    let mut error_exponent = f64::INFINITY;
    let am = |k: usize| alpha * lat[k] as f64;
    if !spec.a.is_zero() {
        for k in 0..n {
            terms.push(ExpansionTerm {
                kind: TermKind::Q,
                k: k + 1,
                m: lat[k],
                exponent: am(k),
                coeff: fields.q[k].clone(),
            });
        }
        error_exponent = error_exponent.min(am(n));
    }
    if let (Some(r), Some(b)) = (&fields.r, &spec.b) {
        if !b.is_zero() {
            for k in 0..n {
                terms.push(ExpansionTerm {
                    kind: TermKind::R,
                    k: k + 1,
                    m: lat[k],
                    exponent: am(k) - 1.0,
                    coeff: r[k].clone(),
                });
            }
            error_exponent = error_exponent.min(am(n) - 1.0);
        }
    }
    if !spec.f.is_zero() {
        for k in 0..n {
            terms.push(ExpansionTerm {
                kind: TermKind::S,
                k: k + 1,
                m: lat[k],
                exponent: am(k) + ell0 as f64 + 1.0,
                coeff: fields.s[k].scaled(fields.mu_ell0),
            });
        }
        error_exponent = error_exponent.min(am(n) + ell0 as f64 + 1.0);
        if let Some(next) = spec.mu.next_nonzero_index(ell0, MOMENT_TOL) {
            error_exponent = error_exponent.min(am(0) + next as f64 + 1.0);
        }
    }
    terms.sort_by(|x, y| x.exponent.total_cmp(&y.exponent).then(x.kind.cmp(&y.kind)));
    let mut min_gap = f64::INFINITY;
    for w in terms.windows(2) {
        let gap = w[1].exponent - w[0].exponent;
        min_gap = min_gap.min(gap);
    }
    // distinct kinds may collide even when not adjacent after sorting ties
    for (i, x) in terms.iter().enumerate() {
        for y in &terms[i + 1..] {
            let gap = (y.exponent - x.exponent).abs();
            if x.kind != y.kind && gap < tol {
                return Err(Error::ExponentCollision {
                    first: format!("{}{}", x.kind.label(), x.k),
                    second: format!("{}{}", y.kind.label(), y.k),
                    gap,
                });
            }
        }
    }
    Ok(LateTimeExpansion {
        terms,
        error_exponent,
        min_gap,
    })
}

/// Σ coeff(x) t^{−p} at one point.
pub fn expansion_eval(terms: &[ExpansionTerm], op: &SpectralOperator, x: f64, t: f64) -> f64 {
    terms
        .iter()
        .map(|term| op.eval(&term.coeff, x) * t.powf(-term.exponent))
        .sum()
}
