//! Mittag-Leffler accuracy against an arbitrary precision Taylor oracle.

use std::f64::consts::FRAC_1_SQRT_2;

use fdw_core::special::{ml_asym_neg, ml_eval, Branch, MittagLeffler, MlOrderPair};
use rug::Float;

/// E_{β,γ}(z) by plain Taylor summation at `bits` of precision. Independent of
/// the library code path: no cached coefficients, no branch logic.
fn oracle(beta: f64, gamma: f64, z: f64, bits: u32) -> f64 {
    let b = Float::with_val(bits, beta);
    let g = Float::with_val(bits, gamma);
    let zf = Float::with_val(bits, z);
    let mut acc = Float::with_val(bits, 0);
    let mut pow = Float::with_val(bits, 1);
    let tiny = Float::with_val(bits, 1e-60);
    let mut k = 0u32;
    loop {
        let arg = Float::with_val(bits, &b * k) + &g;
        let term = Float::with_val(bits, &pow / arg.gamma());
        acc += &term;
        if k > 10
            && Float::with_val(bits, term.abs_ref()) < tiny
            && (beta * k as f64 + gamma) > 2.0 * z.abs().powf(1.0 / beta)
        {
            break;
        }
        pow *= &zf;
        k += 1;
    }
    acc.to_f64()
}

fn pair(b: f64, g: f64) -> MlOrderPair {
    MlOrderPair::new(b, g).unwrap()
}

#[test]
fn matches_oracle_across_regimes() {
    for &beta in &[0.3, 0.5, FRAC_1_SQRT_2, 0.8, 1.3, 1.5, 1.7] {
        for &gamma in &[1.0, 2.0, beta] {
            let ml = MittagLeffler::new(pair(beta, gamma));
            for &c in &[0.5, 2.0, 3.9, 6.0, 12.0, 25.0, 35.0, 37.0, 50.0, 80.0] {
                let x: f64 = f64::powf(c, beta);
                let ev = ml
                    .eval(-x)
                    .unwrap_or_else(|e| panic!("beta={beta} gamma={gamma} x={x}: {e}"));
                let bits = 256 + (2.0 * c / std::f64::consts::LN_2) as u32;
                let want = oracle(beta, gamma, -x, bits);
                let err = (ev.value - want).abs();
                assert!(
                    err <= ev.abs_error_bound.max(1e-15 * want.abs()) * 1.000001 + 1e-300,
                    "beta={beta} gamma={gamma} x={x} branch={:?}: got {} want {want} err {err:e} bound {:e}",
                    ev.branch, ev.value, ev.abs_error_bound
                );
                assert!(
                    err <= 1e-12 * want.abs().max(1.0),
                    "beta={beta} gamma={gamma} x={x}: err {err:e}"
                );
            }
        }
    }
}

#[test]
fn exponential_identity_on_grid() {
    let ml = MittagLeffler::new(pair(1.0, 1.0));
    for i in 0..=100 {
        let x = 50.0 * i as f64 / 100.0;
        let v = ml.eval(-x).unwrap().value;
        let e = (-x).exp();
        assert!((v - e).abs() <= 1e-10 * e.max(1.0), "x={x}: {v} vs {e}");
    }
}

#[test]
fn trigonometric_identities_on_grid() {
    let cos_ml = MittagLeffler::new(pair(2.0, 1.0));
    let sin_ml = MittagLeffler::new(pair(2.0, 2.0));
    for &r in &[0.5, 1.0, 3.0] {
        for i in 0..=60 {
            let t = (30.0 / r) * i as f64 / 60.0;
            let z = -(r * t) * (r * t);
            let c = cos_ml.eval(z).unwrap().value;
            let s = t * sin_ml.eval(z).unwrap().value;
            assert!((c - (r * t).cos()).abs() <= 1e-9, "cos r={r} t={t}");
            assert!((s - (r * t).sin() / r).abs() <= 1e-9, "sin r={r} t={t}");
        }
    }
}

#[test]
fn branches_agree_in_crossover_band() {
    for &beta in &[0.3, 0.5, 0.8, 1.3, 1.7] {
        for &gamma in &[1.0, 2.0, beta] {
            let ml = MittagLeffler::new(pair(beta, gamma));
            for &c in &[36.0, 40.0, 45.0, 55.0] {
                let x: f64 = f64::powf(c, beta);
                let hp = ml.eval_branch(-x, Branch::HighPrecisionFallback);
                let asy = ml.eval_branch(-x, Branch::AsymptoticSeries);
                let gap = (hp.value - asy.value).abs();
                assert!(
                    gap <= hp.abs_error_bound + asy.abs_error_bound,
                    "beta={beta} gamma={gamma} x={x}: gap {gap:e}, bounds {:e} + {:e}",
                    hp.abs_error_bound,
                    asy.abs_error_bound
                );
            }
        }
    }
}

#[test]
fn completely_monotone_decay_below_one() {
    for &beta in &[0.2, 0.5, 0.9] {
        let ml = MittagLeffler::new(pair(beta, 1.0));
        let mut prev = f64::INFINITY;
        for i in 0..400 {
            let x = 0.25 * i as f64;
            let v = ml.eval(-x).unwrap().value;
            assert!(v > 0.0 && v < prev, "beta={beta} x={x}: {v} after {prev}");
            prev = v;
        }
    }
}

#[test]
fn asymptotic_truncation_agrees_at_large_argument() {
    // E_{1/2,1}(-x) = exp(x^2) erfc(x) at x = 1e6 (50-digit reference)
    let reference = 5.641_895_835_474_741_921_563e-7;
    let p = pair(0.5, 1.0);
    let three = ml_asym_neg(p, 1e6, 3).unwrap();
    let full = ml_eval(p, -1e6).unwrap();
    assert!(((three.value - full.value) / full.value).abs() < 1e-9);
    assert!(((full.value - reference) / reference).abs() < 1e-13);
    assert!(three.abs_error_bound < 1e-9 * reference);
}
