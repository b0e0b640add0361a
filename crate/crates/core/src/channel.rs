//! SNR distributions for the two hops.
//!
//! Per-branch fading is Nakagami-m, so branch SNR is Gamma distributed with
//! shape `m` and mean `γ̄`.  The roadside receiver combines its `M` antennas
//! by maximal ratio combining; two structured correlation models describe
//! the crowding of those antennas:
//!
//! * **CC** — every antenna pair shares one power-correlation coefficient ρ;
//! * **EC** — the power correlation between antennas i and j is ρ^{|i−j|}.
//!
//! Throughout, ρ is the correlation between branch *powers* (the squared
//! envelopes).  The underlying complex-gain correlation is √ρ, which is the
//! coefficient that enters the CC combiner density; the Monte Carlo sampler
//! in [`crate::montecarlo`] uses the same convention, so closed forms and
//! sampled histograms describe the same array.
//!
//! Fading power is normalized to E[|h|²] = 1, so a hop's mean SNR is the
//! purely deterministic factor φP/(dᵅN₀): reproducible from geometry alone.

use crate::specfun::{
    self,
    quad::{self, QuadControl},
    SeriesControl, SpecFunError,
};

/// Errors from distribution evaluation and parameter validation.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ChannelError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(&'static str),
    #[error(transparent)]
    SpecFun(#[from] SpecFunError),
    /// The finite-sum form of the CC combiner CDF only exists when its upper
    /// summation limit is a non-negative integer; refuse to guess otherwise.
    #[error("series CDF path unavailable: summation limit {limit} is not a non-negative integer")]
    SeriesLimitNotInteger { limit: f64 },
}

/// One Nakagami-m hop.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FadingLink {
    /// Nakagami shape, m ≥ 1/2; m = 1 is Rayleigh, larger m is milder fading.
    pub m: f64,
    /// Mean SNR (linear).
    pub mean_snr: f64,
    /// Transmitter-receiver distance in meters.
    pub distance: f64,
    /// Path loss exponent α ≥ 2.
    pub pathloss_exp: f64,
}

impl FadingLink {
    pub fn new(m: f64, mean_snr: f64, distance: f64, pathloss_exp: f64) -> Result<Self, ChannelError> {
        if !(m >= 0.5) {
            return Err(ChannelError::InvalidParameter("fading shape m must be >= 0.5"));
        }
        if !(mean_snr > 0.0) {
            return Err(ChannelError::InvalidParameter("mean SNR must be positive"));
        }
        if !(distance > 0.0) {
            return Err(ChannelError::InvalidParameter("distance must be positive"));
        }
        if !(pathloss_exp >= 2.0) {
            return Err(ChannelError::InvalidParameter("path loss exponent must be >= 2"));
        }
        Ok(Self { m, mean_snr, distance, pathloss_exp })
    }
}

/// Antenna correlation structure; the payload is the power-correlation
/// coefficient ρ ∈ [0, 1).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CorrelationModel {
    /// Constant correlation: every pair of branches shares ρ.
    Cc(f64),
    /// Exponential correlation: branches i, j have ρ^{|i−j|}.
    Ec(f64),
}

impl CorrelationModel {
    pub fn rho(&self) -> f64 {
        match *self {
            CorrelationModel::Cc(r) | CorrelationModel::Ec(r) => r,
        }
    }
}

/// The receiver array: M antennas with a common per-branch fading law.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorrelatedArray {
    pub antennas: u32,
    pub model: CorrelationModel,
    /// Per-branch fading; `branch.distance` is the helper-to-receiver distance.
    pub branch: FadingLink,
}

impl CorrelatedArray {
    pub fn new(antennas: u32, model: CorrelationModel, branch: FadingLink) -> Result<Self, ChannelError> {
        if antennas == 0 {
            return Err(ChannelError::InvalidParameter("antenna count must be >= 1"));
        }
        let rho = model.rho();
        if !(0.0..1.0).contains(&rho) {
            return Err(ChannelError::InvalidParameter("correlation must lie in [0, 1)"));
        }
        Ok(Self { antennas, model, branch })
    }
}

/// Total transmit power and its two-phase split.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerBudget {
    /// Total transmit power P in Watts.
    pub total_power: f64,
    /// Fraction φ ∈ (0, 1] spent in the first phase.
    pub split: f64,
    /// Noise power N₀ in Watts.
    pub noise: f64,
}

impl PowerBudget {
    pub fn new(total_power: f64, split: f64, noise: f64) -> Result<Self, ChannelError> {
        if !(total_power > 0.0) {
            return Err(ChannelError::InvalidParameter("total power must be positive"));
        }
        if !(split > 0.0 && split <= 1.0) {
            return Err(ChannelError::InvalidParameter("power split must lie in (0, 1]"));
        }
        if !(noise > 0.0) {
            return Err(ChannelError::InvalidParameter("noise power must be positive"));
        }
        Ok(Self { total_power, split, noise })
    }
}

/// Which transmission phase a mean SNR refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Phase {
    First,
    Second,
}

/// Deterministic mean SNR of a hop: φP/(dᵅN₀) in the first phase,
/// (1−φ)P/(dᵅN₀) in the second (unit-mean fading power).
///
/// φ = 1 with `Phase::Second` legitimately yields 0 — no second-phase power
/// remains — rather than an error; downstream CDFs treat a zero-mean hop as
/// always in outage.
pub fn mean_snr(budget: &PowerBudget, phase: Phase, distance: f64, alpha: f64) -> Result<f64, ChannelError> {
    if !(distance > 0.0) {
        return Err(ChannelError::InvalidParameter("distance must be positive"));
    }
    let fraction = match phase {
        Phase::First => budget.split,
        Phase::Second => 1.0 - budget.split,
    };
    Ok(fraction * budget.total_power / (distance.powf(alpha) * budget.noise))
}

/// CDF of a single branch's SNR: P(m, m γ₀ / γ̄).
pub fn iid_snr_cdf(link: &FadingLink, gamma0: f64) -> Result<f64, ChannelError> {
    if !(gamma0 >= 0.0) {
        return Err(ChannelError::InvalidParameter("threshold must be >= 0"));
    }
    if gamma0 == 0.0 {
        return Ok(0.0);
    }
    if link.mean_snr == 0.0 {
        return Ok(1.0); // dead hop: always below any positive threshold
    }
    Ok(specfun::reg_lower_gamma(link.m, link.m * gamma0 / link.mean_snr)?)
}

/// CDF of the combiner output for M independent branches: P(Mm, m γ₀ / γ̄).
/// Also the ρ = 0 reduction of both correlated models.
pub fn iid_mrc_cdf(antennas: u32, branch: &FadingLink, gamma0: f64) -> Result<f64, ChannelError> {
    if !(gamma0 >= 0.0) {
        return Err(ChannelError::InvalidParameter("threshold must be >= 0"));
    }
    if gamma0 == 0.0 {
        return Ok(0.0);
    }
    if branch.mean_snr == 0.0 {
        return Ok(1.0);
    }
    let shape = antennas as f64 * branch.m;
    Ok(specfun::reg_lower_gamma(shape, branch.m * gamma0 / branch.mean_snr)?)
}

/// Complex-gain correlation coefficient underlying a power correlation ρ:
/// power correlation of circular Gaussians is the squared gain correlation.
#[inline]
fn gain_corr(rho_power: f64) -> f64 {
    rho_power.sqrt()
}

/// Density of the CC combiner output at z > 0.
///
/// Writing r = √ρ for the complex-gain correlation, the combiner output is
/// the sum of a Gamma(m, γ̄(1+(M−1)r)/m) component along the array's common
/// eigendirection and an independent Gamma(m(M−1), γ̄(1−r)/m) remainder; the
/// convolution closes into a ₁F₁ form:
///
/// f(z) = (zm/γ̄)^{Mm−1} e^{−zm/(γ̄(1−r))}
///        ₁F₁(m, Mm; Mmrz/(γ̄(1−r)(1−r+Mr)))
///        / [(γ̄/m)(1−r)^{m(M−1)}(1−r+Mr)^m Γ(Mm)]
///
/// Evaluated in log space so the e^x growth of ₁F₁ and the exponential decay
/// cancel analytically; no overflow for any z in the support.
///
/// Requires ρ ∈ (0, 1); for ρ = 0 or M = 1 use the closed Gamma reductions
/// ([`iid_mrc_cdf`], [`iid_snr_cdf`]) instead of a numerical limit.
pub fn cc_combiner_pdf(array: &CorrelatedArray, z: f64) -> Result<f64, ChannelError> {
    let rho = require_cc(array)?;
    if !(z > 0.0) {
        return Err(ChannelError::InvalidParameter("density argument must be positive"));
    }
    cc_pdf_inner(array, gain_corr(rho), z).map_err(ChannelError::from)
}

fn require_cc(array: &CorrelatedArray) -> Result<f64, ChannelError> {
    match array.model {
        CorrelationModel::Cc(rho) => {
            if !(rho > 0.0 && rho < 1.0) {
                return Err(ChannelError::InvalidParameter(
                    "CC density requires rho in (0,1); rho = 0 reduces to the Gamma law",
                ));
            }
            Ok(rho)
        }
        CorrelationModel::Ec(_) => Err(ChannelError::InvalidParameter(
            "CC density called with an EC-model array",
        )),
    }
}

fn cc_pdf_inner(array: &CorrelatedArray, r: f64, z: f64) -> Result<f64, SpecFunError> {
    let m = array.branch.m;
    let mf = array.antennas as f64;
    let zbar = array.branch.mean_snr;
    let ctl = SeriesControl::default();

    let big_shape = mf * m;
    let kummer_arg = mf * m * r * z / (zbar * (1.0 - r) * (1.0 - r + mf * r));
    let ln_f1 = specfun::ln_kummer_1f1(m, big_shape, kummer_arg, &ctl)?;
    let ln_pdf = (big_shape - 1.0) * (z * m / zbar).ln() - z * m / (zbar * (1.0 - r)) + ln_f1
        - (zbar / m).ln()
        - m * (mf - 1.0) * (1.0 - r).ln()
        - m * (1.0 - r + mf * r).ln()
        - specfun::lgamma(big_shape);
    Ok(ln_pdf.exp())
}

/// CDF of the CC combiner output by adaptive quadrature of
/// [`cc_combiner_pdf`] over [0, γ₀], with default tolerances.
///
/// ρ = 0 and M = 1 route to the exact Gamma reductions.
pub fn cc_combiner_cdf(array: &CorrelatedArray, gamma0: f64) -> Result<f64, ChannelError> {
    cc_combiner_cdf_with(array, gamma0, &QuadControl::default())
}

/// [`cc_combiner_cdf`] with caller-supplied quadrature tolerances.
pub fn cc_combiner_cdf_with(
    array: &CorrelatedArray,
    gamma0: f64,
    ctl: &QuadControl,
) -> Result<f64, ChannelError> {
    match array.model {
        CorrelationModel::Cc(rho) => {
            if rho == 0.0 || array.antennas == 1 {
                return iid_mrc_cdf(array.antennas, &array.branch, gamma0);
            }
        }
        CorrelationModel::Ec(_) => {
            return Err(ChannelError::InvalidParameter(
                "CC CDF called with an EC-model array",
            ))
        }
    }
    cc_combiner_cdf_quadrature(array, gamma0, ctl)
}

/// The raw quadrature path of the CC CDF, without the ρ = 0 / M = 1 routing.
/// Valid for any M ≥ 1 and ρ ∈ (0, 1); exposed so cross-checks can compare
/// it directly against the closed reductions.
pub fn cc_combiner_cdf_quadrature(
    array: &CorrelatedArray,
    gamma0: f64,
    ctl: &QuadControl,
) -> Result<f64, ChannelError> {
    let rho = require_cc(array)?;
    if !(gamma0 >= 0.0) {
        return Err(ChannelError::InvalidParameter("threshold must be >= 0"));
    }
    if gamma0 == 0.0 {
        return Ok(0.0);
    }
    if array.branch.mean_snr == 0.0 {
        return Ok(1.0); // dead hop
    }
    let r = gain_corr(rho);
    let m = array.branch.m;
    let mf = array.antennas as f64;
    let zbar = array.branch.mean_snr;

    // Beyond the heaviest component's far tail the remaining mass is < 1e−13;
    // the heaviest scale is the common-eigendirection Gamma component.
    let total_shape = mf * m;
    let scale_max = zbar * (1.0 - r + mf * r) / m;
    let cutoff = scale_max * (total_shape + 12.0 * total_shape.sqrt() + 45.0);
    let hi = gamma0.min(cutoff);

    // Seed panels geometrically around the combiner mean Mγ̄ so the adaptive
    // pass cannot overlook the bulk when γ₀ is far out in the tail.
    let mean = mf * zbar;
    let mut breakpoints = Vec::new();
    let mut bp = mean / 64.0;
    while bp < hi {
        breakpoints.push(bp);
        bp *= 2.0;
    }

    let f = |z: f64| {
        if z <= 0.0 {
            0.0
        } else {
            cc_pdf_inner(array, r, z).unwrap_or(f64::NAN)
        }
    };
    let result = quad::integrate(f, 0.0, hi, &breakpoints, ctl)?;
    if result.value.is_nan() {
        return Err(ChannelError::SpecFun(SpecFunError::NoConvergence {
            partial: f64::NAN,
            last_term: f64::NAN,
            terms: 0,
        }));
    }
    Ok(result.value.clamp(0.0, 1.0))
}

/// The finite-sum form of the CC combiner CDF built from Humbert Φ₁ terms.
///
/// The expression only makes sense when its summation limit
/// (1−r+Mr)/(Mr) − 1 is a non-negative integer (r = √ρ); anything else
/// returns [`ChannelError::SeriesLimitNotInteger`] rather than guessing an
/// interpolation.  This path exists as an opt-in cross-check; the quadrature
/// CDF is the authoritative evaluation.
pub fn cc_combiner_cdf_series(
    array: &CorrelatedArray,
    gamma0: f64,
    ctl: &SeriesControl,
) -> Result<f64, ChannelError> {
    let rho = require_cc(array)?;
    if !(gamma0 >= 0.0) {
        return Err(ChannelError::InvalidParameter("threshold must be >= 0"));
    }
    let m = array.branch.m;
    let mf = array.antennas as f64;
    if mf < 2.0 {
        return Err(ChannelError::InvalidParameter(
            "series CDF requires M >= 2 (Gamma(Mm - m) must be finite)",
        ));
    }
    let zbar = array.branch.mean_snr;
    let r = gain_corr(rho);

    let limit = (1.0 - r + mf * r) / (mf * r) - 1.0;
    let rounded = limit.round();
    if rounded < 0.0 || (limit - rounded).abs() > 1e-9 {
        return Err(ChannelError::SeriesLimitNotInteger { limit });
    }
    let n_max = rounded as u32;

    let v = mf * m - m;
    let ln_pref = -(specfun::lgamma(m) + specfun::lgamma(v))
        + m * ((1.0 - r) / (mf * r)).ln()
        + v * ((1.0 - r + mf * r) / (mf * r)).ln();
    let pref = ln_pref.exp();
    let x = mf * r / (1.0 - r + mf * r);
    let y = mf * r * m * gamma0 / (zbar * (1.0 - r) * (1.0 - r + mf * r));

    let t1 = pref * specfun::humbert_phi1(m, mf * m, mf * m, x, 0.0, ctl)?;

    let mut sum = 0.0;
    let mut pow_over_fact = 1.0; // γ₀^n / n!
    for n in 0..=n_max {
        let nf = n as f64;
        if n > 0 {
            pow_over_fact *= gamma0 / nf;
        }
        sum += pow_over_fact * specfun::humbert_phi1(m, mf * m - nf, mf * m, x, y, ctl)?;
    }
    let t2 = pref * (-(1.0 - r + mf * r) * gamma0 / (mf * r)).exp() * sum;

    Ok(t1 - t2)
}

/// Effective correlation load λ of the EC array: the sum of all pairwise
/// power correlations, Σ_{i,j} ρ^{|i−j|}, in closed form:
///
/// λ = M + (2ρ/(1−ρ)) (M − (1−ρ^M)/(1−ρ))
///
/// λ = M exactly at ρ = 0, grows monotonically with ρ, and approaches M²
/// as ρ → 1 (fully correlated branches).
pub fn ec_lambda(antennas: u32, rho_e: f64) -> Result<f64, ChannelError> {
    if antennas == 0 {
        return Err(ChannelError::InvalidParameter("antenna count must be >= 1"));
    }
    if !(0.0..1.0).contains(&rho_e) {
        return Err(ChannelError::InvalidParameter("correlation must lie in [0, 1)"));
    }
    let mf = antennas as f64;
    Ok(mf + (2.0 * rho_e / (1.0 - rho_e)) * (mf - (1.0 - rho_e.powi(antennas as i32)) / (1.0 - rho_e)))
}

/// CDF of the EC combiner output: the two-moment Gamma fit with shape
/// mM²/λ and scale λγ̄/(Mm), evaluated as the regularized lower incomplete
/// gamma P(mM²/λ, Mmγ₀/(λγ̄)).
///
/// This is the integral of the fitted density, so it is increasing in γ₀,
/// 0 at γ₀ = 0 and → 1; an upper-incomplete (unregularized) reading would be
/// neither normalized nor increasing, and the Monte Carlo oracle confirms
/// the lower-regularized one.
pub fn ec_combiner_cdf(array: &CorrelatedArray, gamma0: f64) -> Result<f64, ChannelError> {
    let rho = match array.model {
        CorrelationModel::Ec(rho) => rho,
        CorrelationModel::Cc(_) => {
            return Err(ChannelError::InvalidParameter(
                "EC CDF called with a CC-model array",
            ))
        }
    };
    if !(gamma0 >= 0.0) {
        return Err(ChannelError::InvalidParameter("threshold must be >= 0"));
    }
    if gamma0 == 0.0 {
        return Ok(0.0);
    }
    if array.branch.mean_snr == 0.0 {
        return Ok(1.0);
    }
    let m = array.branch.m;
    let mf = array.antennas as f64;
    let lambda = ec_lambda(array.antennas, rho)?;
    let shape = m * mf * mf / lambda;
    let x = mf * m * gamma0 / (lambda * array.branch.mean_snr);
    Ok(specfun::reg_lower_gamma(shape, x)?)
}

/// Combiner-output CDF dispatched on the array's model.
pub fn combiner_cdf(array: &CorrelatedArray, gamma0: f64) -> Result<f64, ChannelError> {
    match array.model {
        CorrelationModel::Cc(rho) => {
            if rho == 0.0 || array.antennas == 1 {
                iid_mrc_cdf(array.antennas, &array.branch, gamma0)
            } else {
                cc_combiner_cdf(array, gamma0)
            }
        }
        CorrelationModel::Ec(_) => ec_combiner_cdf(array, gamma0),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn branch(m: f64, mean_snr: f64) -> FadingLink {
        FadingLink::new(m, mean_snr, 10.0, 2.0).unwrap()
    }

    fn cc_array(antennas: u32, m: f64, mean_snr: f64, rho: f64) -> CorrelatedArray {
        CorrelatedArray::new(antennas, CorrelationModel::Cc(rho), branch(m, mean_snr)).unwrap()
    }

    fn ec_array(antennas: u32, m: f64, mean_snr: f64, rho: f64) -> CorrelatedArray {
        CorrelatedArray::new(antennas, CorrelationModel::Ec(rho), branch(m, mean_snr)).unwrap()
    }

    #[test]
    fn mean_snr_basics() {
        let b = PowerBudget::new(316.22776601683796, 0.5, 1.0).unwrap();
        assert_relative_eq!(
            mean_snr(&b, Phase::First, 1.0, 2.0).unwrap(),
            158.11388300841898,
            max_relative = 1e-12
        );
        let full = PowerBudget::new(10.0, 1.0, 1.0).unwrap();
        assert_eq!(mean_snr(&full, Phase::Second, 3.0, 2.0).unwrap(), 0.0);
        let b2 = PowerBudget::new(100.0, 0.25, 1.0).unwrap();
        assert_relative_eq!(
            mean_snr(&b2, Phase::Second, 10.0, 3.0).unwrap(),
            0.075,
            max_relative = 1e-14
        );
    }

    #[test]
    fn iid_cdf_rayleigh_median() {
        // m = 1 is an exponential SNR: CDF(ln 2 · γ̄) = 1/2
        let l = branch(1.0, 1.0);
        assert_relative_eq!(
            iid_snr_cdf(&l, 2.0_f64.ln()).unwrap(),
            0.5,
            max_relative = 1e-13
        );
        assert_eq!(iid_snr_cdf(&l, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn cc_pdf_normalizes_to_one() {
        for &(mm, m, rho) in &[(4u32, 1.0, 0.3), (10, 1.0, 0.1), (4, 2.0, 0.25), (3, 0.5, 0.6)] {
            let a = cc_array(mm, m, 1.3, rho);
            let hi = 60.0 * mm as f64 * a.branch.mean_snr;
            let bks: Vec<f64> = (0..14)
                .map(|k| mm as f64 * a.branch.mean_snr * 2.0_f64.powi(k - 6))
                .collect();
            let r = quad::integrate(
                |z| if z > 0.0 { cc_combiner_pdf(&a, z).unwrap() } else { 0.0 },
                0.0,
                hi,
                &bks,
                &QuadControl::default(),
            )
            .unwrap();
            assert_relative_eq!(r.value, 1.0, max_relative = 1e-8);
        }
    }

    #[test]
    fn cc_pdf_independence_limit() {
        // ρ → 0⁺: density approaches the Gamma(Mm, γ̄/m) law
        let a = cc_array(4, 2.0, 1.0, 1e-9);
        let gamma_pdf = |z: f64| {
            let shape = 8.0;
            let scale = 0.5;
            ((shape - 1.0) * (z / scale).ln() - z / scale - specfun::lgamma(shape)).exp() / scale
        };
        for &z in &[0.5, 2.0, 4.0, 8.0, 16.0] {
            assert_relative_eq!(
                cc_combiner_pdf(&a, z).unwrap(),
                gamma_pdf(z),
                max_relative = 1e-4
            );
        }
    }

    #[test]
    fn cc_cdf_boundaries_and_mass() {
        let a = cc_array(10, 1.0, 31.6, 0.1);
        assert_eq!(cc_combiner_cdf(&a, 0.0).unwrap(), 0.0);
        let total = cc_combiner_cdf(&a, 50.0 * 10.0 * 31.6).unwrap();
        assert!(total >= 1.0 - 1e-6, "total mass {total}");
    }

    #[test]
    fn cc_cdf_routes_exact_reductions() {
        // ρ = 0 routes to the Gamma law rather than a numerical limit
        let a0 = cc_array(5, 2.0, 2.0, 0.0);
        let direct = iid_mrc_cdf(5, &a0.branch, 3.0).unwrap();
        assert_eq!(cc_combiner_cdf(&a0, 3.0).unwrap(), direct);

        // M = 1 quadrature agrees with the single-branch law for any ρ
        let a1 = cc_array(1, 1.5, 2.0, 0.4);
        let quadr = cc_combiner_cdf_quadrature(&a1, 1.7, &QuadControl::default()).unwrap();
        let single = iid_snr_cdf(&a1.branch, 1.7).unwrap();
        assert_relative_eq!(quadr, single, max_relative = 1e-6);
    }

    #[test]
    fn cc_series_path_refuses_non_integer_limit() {
        // limit (1−r+Mr)/(Mr) − 1 is generically non-integer
        let a = cc_array(10, 1.0, 1.0, 0.1);
        match cc_combiner_cdf_series(&a, 0.5, &SeriesControl::default()) {
            Err(ChannelError::SeriesLimitNotInteger { limit }) => {
                assert!(limit > 0.0 && limit.fract().abs() > 1e-9)
            }
            other => panic!("expected refusal, got {other:?}"),
        }
    }

    #[test]
    fn cc_series_path_evaluates_on_integer_limit() {
        // choose ρ so the summation limit is exactly 2: r = 1/(1+M(k−1)),
        // k = 3, M = 4 → r = 1/9, ρ = r²
        let r: f64 = 1.0 / 9.0;
        let a = cc_array(4, 1.0, 1.0, r * r);
        let v = cc_combiner_cdf_series(&a, 2.0, &SeriesControl::default()).unwrap();
        assert!(v.is_finite());
    }

    #[test]
    fn ec_lambda_values() {
        assert_eq!(ec_lambda(7, 0.0).unwrap(), 7.0);
        assert_eq!(ec_lambda(1, 0.37).unwrap(), 1.0);
        // frozen from independent evaluation of the closed form
        assert_relative_eq!(
            ec_lambda(10, 0.1).unwrap(),
            11.975_308_642,
            max_relative = 1e-10
        );
        // identity: λ equals the sum of all pairwise power correlations
        for &(mm, rho) in &[(5u32, 0.3), (8, 0.7), (12, 0.05)] {
            let brute: f64 = (0..mm as i32)
                .flat_map(|i| (0..mm as i32).map(move |j| rho_pow(rho, (i - j).abs())))
                .sum();
            assert_relative_eq!(ec_lambda(mm, rho).unwrap(), brute, max_relative = 1e-12);
        }

        fn rho_pow(rho: f64, k: i32) -> f64 {
            rho.powi(k)
        }
    }

    #[test]
    fn ec_lambda_monotone_toward_full_correlation() {
        let mut prev = 0.0;
        for i in 0..100 {
            let rho = i as f64 / 100.0;
            let l = ec_lambda(6, rho).unwrap();
            assert!(l > prev);
            prev = l;
        }
        assert!((ec_lambda(6, 0.999999).unwrap() - 36.0).abs() < 0.01);
    }

    #[test]
    fn ec_cdf_reductions() {
        // ρ = 0: identical to the independent MRC law
        let a = ec_array(6, 2.0, 1.5, 0.0);
        for &g in &[0.5, 2.0, 9.0, 20.0] {
            assert_relative_eq!(
                ec_combiner_cdf(&a, g).unwrap(),
                iid_mrc_cdf(6, &a.branch, g).unwrap(),
                max_relative = 1e-12
            );
        }
        // M = 1: the single-branch law, for any ρ
        let a1 = ec_array(1, 1.0, 2.0, 0.55);
        for &g in &[0.2, 1.0, 5.0] {
            assert_relative_eq!(
                ec_combiner_cdf(&a1, g).unwrap(),
                iid_snr_cdf(&a1.branch, g).unwrap(),
                max_relative = 1e-12
            );
        }
    }

    #[test]
    fn cdfs_monotone_and_saturating() {
        for arrays in [
            vec![cc_array(4, 1.0, 1.0, 0.25), cc_array(8, 2.0, 0.5, 0.6)],
            vec![ec_array(4, 1.0, 1.0, 0.25), ec_array(8, 2.0, 0.5, 0.6)],
        ] {
            for a in arrays {
                let mut prev = -1.0;
                let hi = 50.0 * a.antennas as f64 * a.branch.mean_snr;
                for i in 0..=40 {
                    let g = hi * i as f64 / 40.0;
                    let v = combiner_cdf(&a, g).unwrap();
                    assert!(v >= prev - 1e-12, "CDF dipped at {g}");
                    assert!((0.0..=1.0).contains(&v));
                    prev = v;
                }
                assert!(prev > 1.0 - 1e-6);
            }
        }
    }

    #[test]
    fn correlation_increases_outage_below_the_mean() {
        // fixed γ₀ below the combiner mean: outage grows with ρ
        let g0 = 1.0; // mean is M·γ̄ = 4
        let rhos = [0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9];
        let mut prev_cc = -1.0;
        let mut prev_ec = -1.0;
        for &rho in &rhos {
            let vc = combiner_cdf(&cc_array(4, 1.0, 1.0, rho), g0).unwrap();
            let ve = combiner_cdf(&ec_array(4, 1.0, 1.0, rho), g0).unwrap();
            assert!(vc >= prev_cc - 1e-10, "CC dipped at rho={rho}");
            assert!(ve >= prev_ec - 1e-10, "EC dipped at rho={rho}");
            prev_cc = vc;
            prev_ec = ve;
        }
    }

    #[test]
    fn both_models_converge_to_iid_at_vanishing_rho() {
        let g0 = 2.5;
        let iid = iid_mrc_cdf(5, &branch(1.0, 1.0), g0).unwrap();
        let cc = cc_combiner_cdf_quadrature(&cc_array(5, 1.0, 1.0, 1e-6), g0, &QuadControl::default()).unwrap();
        let ec = ec_combiner_cdf(&ec_array(5, 1.0, 1.0, 1e-6), g0).unwrap();
        assert_relative_eq!(cc, iid, max_relative = 1e-3);
        assert_relative_eq!(ec, iid, max_relative = 1e-3);
    }

    #[test]
    fn cc_cdf_matches_exact_convolution() {
        // M = 10, m = 1, ρ = 0.1: the combiner law is exactly
        // Gamma(9, 1−r) ⊕ Gamma(1, 1+9r) with r = √0.1 in branch-mean
        // units; values frozen from a 30-digit convolution quadrature
        let a = cc_array(10, 1.0, 1.0, 0.1);
        for &(g0, expect) in &[
            (1.0, 6.548595321e-7),
            (5.0, 0.06801116482),
            (10.0, 0.5884797071),
        ] {
            assert_relative_eq!(
                cc_combiner_cdf(&a, g0).unwrap(),
                expect,
                max_relative = 1e-7
            );
        }
    }

    #[test]
    fn quadrature_stable_under_tolerance_tightening() {
        let a = cc_array(10, 1.0, 31.6, 0.1);
        let loose = QuadControl::default();
        let tight = QuadControl {
            abs_tol: loose.abs_tol / 10.0,
            rel_tol: loose.rel_tol / 10.0,
            max_intervals: loose.max_intervals * 4,
        };
        for &g in &[3.0, 31.6, 158.0, 316.0] {
            let v1 = cc_combiner_cdf_with(&a, g, &loose).unwrap();
            let v2 = cc_combiner_cdf_with(&a, g, &tight).unwrap();
            assert!((v1 - v2).abs() < 1e-6, "unstable at γ₀={g}: {v1} vs {v2}");
        }
    }

    #[test]
    fn parameter_validation() {
        assert!(FadingLink::new(0.3, 1.0, 1.0, 2.0).is_err());
        assert!(FadingLink::new(1.0, -1.0, 1.0, 2.0).is_err());
        assert!(FadingLink::new(1.0, 1.0, 0.0, 2.0).is_err());
        assert!(PowerBudget::new(1.0, 0.0, 1.0).is_err());
        assert!(PowerBudget::new(1.0, 1.1, 1.0).is_err());
        assert!(CorrelatedArray::new(0, CorrelationModel::Cc(0.1), branch(1.0, 1.0)).is_err());
        assert!(CorrelatedArray::new(2, CorrelationModel::Ec(1.0), branch(1.0, 1.0)).is_err());
    }
}
