//! Gamma function and its reciprocal on the whole real line.
//!
//! Positive arguments use a Lanczos approximation (g = 7, nine terms) below 10
//! and Stirling's series above, both in product form so that ln Γ inherits the
//! relative accuracy of Γ. Negative arguments go through the reflection formula. The reciprocal is entire, so it is returned as an
//! exact zero at the poles of Γ.

use std::f64::consts::PI;

/// Distance to the nearest integer below which an argument is treated as a pole.
pub const INTEGER_TOL: f64 = 1e-12;

const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

// B_{2j} / (2j (2j - 1)) for j = 1..8
const STIRLING: [f64; 8] = [
    1.0 / 12.0,
    -1.0 / 360.0,
    1.0 / 1260.0,
    -1.0 / 1680.0,
    1.0 / 1188.0,
    -691.0 / 360_360.0,
    1.0 / 156.0,
    -3617.0 / 122_400.0,
];

/// Returns `Some(n)` when `x` lies within [`INTEGER_TOL`] of the integer `n`.
pub fn near_integer(x: f64) -> Option<i64> {
    let r = x.round();
    ((x - r).abs() < INTEGER_TOL).then_some(r as i64)
}

/// `true` when `x` is a pole of Γ, i.e. a nonpositive integer within tolerance.
pub fn is_gamma_pole(x: f64) -> bool {
    matches!(near_integer(x), Some(n) if n <= 0)
}

/// sin(πx) with argument reduction done before the multiplication by π.
pub fn sin_pi(x: f64) -> f64 {
    let r = x - 2.0 * (x * 0.5).round();
    // r in [-1, 1]
    if r.abs() <= 0.25 {
        (PI * r).sin()
    } else if r > 0.0 {
        (PI * (1.0 - r)).sin()
    } else {
        -(PI * (1.0 + r)).sin()
    }
}

fn stirling_series(x: f64) -> f64 {
    let inv = 1.0 / x;
    let inv2 = inv * inv;
    let mut series = 0.0;
    let mut pow = inv;
    for c in STIRLING {
        series += c * pow;
        pow *= inv2;
    }
    series
}

/// Γ(x) for 0 < x < 171 without passing through a logarithm.
fn gamma_positive(x: f64) -> f64 {
    debug_assert!(x > 0.0 && x < 171.7);
    if x < 0.5 {
        return gamma_positive(x + 1.0) / x;
    }
    if x < 10.0 {
        let y = x - 1.0;
        let mut sum = LANCZOS[0];
        for (i, c) in LANCZOS.iter().enumerate().skip(1) {
            sum += c / (y + i as f64);
        }
        let t = y + LANCZOS_G + 0.5;
        let half = t.powf(0.5 * (y + 0.5));
        return (2.0 * PI).sqrt() * half * (half * (-t).exp()) * sum;
    }
    // x^{x-1/2} split in two factors so the intermediate never overflows
    let half = x.powf(0.5 * (x - 0.5));
    (2.0 * PI).sqrt() * half * (half * (-x).exp()) * stirling_series(x).exp()
}

fn ln_gamma_positive(x: f64) -> f64 {
    debug_assert!(x > 0.0);
    if x < 171.0 {
        gamma_positive(x).ln()
    } else {
        (x - 0.5) * x.ln() - x + 0.5 * (2.0 * PI).ln() + stirling_series(x)
    }
}

/// Γ(x) for real `x`; `NaN` at the poles.
pub fn gamma(x: f64) -> f64 {
    if is_gamma_pole(x) {
        return f64::NAN;
    }
    if x > 0.0 {
        if let Some(n) = near_integer(x) {
            if (1..=25).contains(&n) {
                return (1..n).map(|k| k as f64).product();
            }
        }
        if x < 171.0 {
            return gamma_positive(x);
        }
        return ln_gamma_positive(x).exp();
    }
    // Γ(x) = π / (sin(πx) Γ(1 - x))
    PI / (sin_pi(x) * gamma(1.0 - x))
}

/// ln|Γ(x)| for real `x` away from the poles.
pub fn ln_gamma_abs(x: f64) -> f64 {
    if x > 0.0 {
        ln_gamma_positive(x)
    } else {
        PI.ln() - sin_pi(x).abs().ln() - ln_gamma_positive(1.0 - x)
    }
}

/// 1/Γ(x) split as `(sign, ln|1/Γ(x)|)`; `None` at a pole where the value is
/// exactly zero. Used where the reciprocal itself would overflow.
pub fn recip_gamma_parts(x: f64) -> Option<(f64, f64)> {
    if is_gamma_pole(x) {
        return None;
    }
    if x > 0.0 {
        return Some((1.0, -ln_gamma_positive(x)));
    }
    // 1/Γ(x) = sin(πx) Γ(1 - x) / π
    let s = sin_pi(x);
    Some((
        s.signum(),
        s.abs().ln() + ln_gamma_positive(1.0 - x) - PI.ln(),
    ))
}

/// The reciprocal gamma function 1/Γ(x), exactly zero at nonpositive integers.
pub fn gamma_recip(x: f64) -> f64 {
    if is_gamma_pole(x) {
        return 0.0;
    }
    if x > 0.0 {
        if x < 170.0 {
            return 1.0 / gamma(x);
        }
        return (-ln_gamma_positive(x)).exp();
    }
    if x > -170.0 {
        return sin_pi(x) * gamma(1.0 - x) / PI;
    }
    match recip_gamma_parts(x) {
        Some((sign, ln_abs)) => sign * ln_abs.exp(),
        None => 0.0,
    }
}
