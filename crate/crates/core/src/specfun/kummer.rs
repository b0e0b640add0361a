//! Confluent hypergeometric function ₁F₁(a; b; x).

use super::{KahanSum, SeriesControl, SpecFunError};
use crate::specfun::lgamma;

/// ₁F₁(a; b; x) by the ascending Pochhammer series
/// Σ_{n≥0} (a)_n / (b)_n · x^n / n!, with compensated summation.
///
/// Negative arguments go through the reflection
/// ₁F₁(a;b;x) = e^x ₁F₁(b−a;b;−x) first, so the summed series never
/// alternates and compensated summation keeps full precision.
///
/// `b` must not be zero or a negative integer.  Termination follows `ctl`;
/// running out of terms reports the partial sum and the last term.
pub fn kummer_1f1(a: f64, b: f64, x: f64, ctl: &SeriesControl) -> Result<f64, SpecFunError> {
    ctl.validate()?;
    if b <= 0.0 && b == b.floor() {
        return Err(SpecFunError::Domain(
            "kummer_1f1 requires b not a non-positive integer",
        ));
    }
    if x == 0.0 {
        return Ok(1.0);
    }
    if x < 0.0 {
        return Ok(x.exp() * kummer_1f1(b - a, b, -x, ctl)?);
    }

    let mut sum = KahanSum::new(1.0);
    let mut term = 1.0_f64;
    for n in 0..ctl.max_terms {
        let nf = n as f64;
        term *= (a + nf) / (b + nf) * x / (nf + 1.0);
        sum.add(term);
        // a negative integer `a` truncates the series exactly
        if term == 0.0 || ctl.converged(term, sum.value()) {
            return Ok(sum.value());
        }
    }
    Err(SpecFunError::NoConvergence {
        partial: sum.value(),
        last_term: term,
        terms: ctl.max_terms,
    })
}

/// Threshold beyond which the series value would dwarf f64 range when
/// combined with the exponential prefactors of the densities using it.
const ASYMPTOTIC_SWITCH: f64 = 500.0;

/// ln ₁F₁(a; b; x) for a > 0, b > 0, x ≥ 0.
///
/// For moderate x this is the log of the plain series.  For large x it uses
/// the standard large-argument expansion
/// ₁F₁(a;b;x) ~ Γ(b)/Γ(a) · e^x x^{a−b} · Σ_k (b−a)_k (1−a)_k / (k! x^k),
/// truncated at the smallest term, so callers can fold the e^x growth into
/// their own exponential factors without overflow.
pub fn ln_kummer_1f1(a: f64, b: f64, x: f64, ctl: &SeriesControl) -> Result<f64, SpecFunError> {
    if !(a > 0.0) || !(b > 0.0) {
        return Err(SpecFunError::Domain("ln_kummer_1f1 requires a > 0, b > 0"));
    }
    if !(x >= 0.0) {
        return Err(SpecFunError::Domain("ln_kummer_1f1 requires x >= 0"));
    }
    if x <= ASYMPTOTIC_SWITCH {
        return Ok(kummer_1f1(a, b, x, ctl)?.ln());
    }

    // asymptotic correction series: terms shrink while k ≲ x; stop at the
    // smallest term (for integer a the series terminates exactly)
    let mut term = 1.0_f64;
    let mut sum = KahanSum::new(1.0);
    let mut prev = f64::INFINITY;
    for k in 0..ctl.max_terms {
        let kf = k as f64;
        term *= (b - a + kf) * (1.0 - a + kf) / ((kf + 1.0) * x);
        if term == 0.0 || term.abs() >= prev {
            break;
        }
        sum.add(term);
        prev = term.abs();
        if ctl.converged(term, sum.value()) {
            break;
        }
    }
    Ok(x + (a - b) * x.ln() + lgamma(b) - lgamma(a) + sum.value().ln())
}
