//! Humbert Φ₁, the two-variable confluent hypergeometric series.

use super::{KahanSum, SeriesControl, SpecFunError};
use crate::specfun::kummer_1f1;

/// Φ₁(a, b; c; x, y) = Σ_{m,n≥0} (a)_{m+n} (b)_m / ((c)_{m+n} m! n!) x^m y^n,
/// for |x| < 1 and any finite y.
///
/// The double sum is evaluated row-wise through the exact regrouping
/// Φ₁ = Σ_m (a)_m (b)_m / ((c)_m m!) x^m · ₁F₁(a+m; c+m; y),
/// which keeps every row well-scaled even when y^n underflows long before
/// the x-powers have decayed (x close to 1 with small y).  Each row and the
/// inner series follow the same truncation policy `ctl`.
pub fn humbert_phi1(
    a: f64,
    b: f64,
    c: f64,
    x: f64,
    y: f64,
    ctl: &SeriesControl,
) -> Result<f64, SpecFunError> {
    ctl.validate()?;
    if !(x.abs() < 1.0) {
        return Err(SpecFunError::Domain("humbert_phi1 requires |x| < 1"));
    }
    if c <= 0.0 && c == c.floor() {
        return Err(SpecFunError::Domain(
            "humbert_phi1 requires c not a non-positive integer",
        ));
    }

    let mut coeff = 1.0_f64; // (a)_m (b)_m / ((c)_m m!) x^m
    let mut sum = KahanSum::new(0.0);
    for m in 0..ctl.max_terms {
        let mf = m as f64;
        let row = coeff * kummer_1f1(a + mf, c + mf, y, ctl)?;
        sum.add(row);
        if m >= 1 && (row == 0.0 || ctl.converged(row, sum.value())) {
            return Ok(sum.value());
        }
        coeff *= (a + mf) * (b + mf) / ((c + mf) * (mf + 1.0)) * x;
        if coeff == 0.0 {
            // (a)_m or (b)_m hit a negative-integer zero: series terminates
            return Ok(sum.value());
        }
    }
    Err(SpecFunError::NoConvergence {
        partial: sum.value(),
        last_term: coeff,
        terms: ctl.max_terms,
    })
}
