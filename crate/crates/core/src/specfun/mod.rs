//! Special-function kernel backing the closed-form SNR distributions.
//!
//! Everything here is plain `f64` arithmetic with explicit truncation
//! policies, so identical inputs always produce bit-identical outputs.
//!
//! | Function | Description |
//! |----------|-------------|
//! | [`reg_lower_gamma`] | Regularized lower incomplete gamma P(a,x) |
//! | [`reg_upper_gamma`] | Regularized upper incomplete gamma Q(a,x) = 1−P(a,x) |
//! | [`lgamma`] | Log-gamma ln Γ(x), x > 0 |
//! | [`kummer_1f1`] | Confluent hypergeometric ₁F₁(a;b;x) by ascending series |
//! | [`ln_kummer_1f1`] | ln ₁F₁(a;b;x) for x ≥ 0, stable for large x |
//! | [`humbert_phi1`] | Two-variable confluent series Φ₁(a,b;c;x,y), \|x\| < 1 |
//! | [`quad::integrate`] | Adaptive Gauss quadrature with an embedded error estimate |

use core::fmt;

mod humbert;
mod incgamma;
mod kummer;
pub mod quad;

pub use humbert::humbert_phi1;
pub use incgamma::{lgamma, reg_lower_gamma, reg_upper_gamma};
pub use kummer::{kummer_1f1, ln_kummer_1f1};

/// Truncation policy for the hypergeometric series.
///
/// A series terminates once the magnitude of the last term drops below
/// `rel_tol` times the magnitude of the partial sum, or below `abs_tol`
/// outright.  If neither happens within `max_terms` terms the evaluation
/// reports [`SpecFunError::NoConvergence`] carrying the partial sum and the
/// last term, so the caller can judge how bad the truncation is.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesControl {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_terms: u32,
}

impl Default for SeriesControl {
    /// Tight enough that downstream quadrature error dominates.
    fn default() -> Self {
        Self {
            rel_tol: 1e-12,
            abs_tol: 1e-300,
            max_terms: 10_000,
        }
    }
}

impl SeriesControl {
    pub fn validate(&self) -> Result<(), SpecFunError> {
        if !(self.rel_tol > 0.0) || !(self.abs_tol > 0.0) || self.max_terms == 0 {
            return Err(SpecFunError::Domain(
                "SeriesControl requires rel_tol > 0, abs_tol > 0, max_terms >= 1",
            ));
        }
        Ok(())
    }

    fn converged(&self, term: f64, partial: f64) -> bool {
        let t = term.abs();
        t < self.rel_tol * partial.abs() || t < self.abs_tol
    }
}

/// Errors from the special-function kernel.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SpecFunError {
    /// Input outside the function's domain.
    #[error("domain error: {0}")]
    Domain(&'static str),
    /// Series hit `max_terms` before reaching the tolerance.
    #[error("series did not converge after {terms} terms (partial sum {partial:e}, last term {last_term:e})")]
    NoConvergence {
        partial: f64,
        last_term: f64,
        terms: u32,
    },
    /// Adaptive quadrature ran out of subdivisions before reaching tolerance.
    #[error("quadrature stalled at {intervals} intervals (estimate {value:e}, error estimate {error:e})")]
    Quadrature {
        value: f64,
        error: f64,
        intervals: u32,
    },
}

/// Kahan-compensated accumulator; keeps long positive series honest.
#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct KahanSum {
    sum: f64,
    carry: f64,
}

impl KahanSum {
    pub(crate) fn new(initial: f64) -> Self {
        Self {
            sum: initial,
            carry: 0.0,
        }
    }

    #[inline]
    pub(crate) fn add(&mut self, term: f64) {
        let y = term - self.carry;
        let t = self.sum + y;
        self.carry = (t - self.sum) - y;
        self.sum = t;
    }

    #[inline]
    pub(crate) fn value(&self) -> f64 {
        self.sum
    }
}

impl fmt::Display for KahanSum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.sum)
    }
}
