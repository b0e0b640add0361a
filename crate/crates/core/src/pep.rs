//! End-to-end packet error probability.
//!
//! A packet spans `L` coherence-time blocks.  Within one block the link is
//! in outage when either hop drops below the threshold γ₀; hop outages are
//! independent, so the block error combines them by inclusion-exclusion.
//! Block fading is independent across blocks, so the packet fails when any
//! of the `L` blocks does: PEP = 1 − (1 − p_block)^L, the ideal-coding
//! outage bound.

use crate::channel::{
    self, ChannelError, CorrelatedArray, CorrelationModel, FadingLink, Phase, PowerBudget,
};

/// Speed of light in m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Which coherence-time expression feeds the block count.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TcModel {
    /// T_c = 3 c f_c / (4 √π (c + v)), taken exactly as printed in the
    /// system model this crate implements, unusual dimensions included.
    #[default]
    Paper,
    /// The textbook Doppler-spread form T_c = 9 c / (16 π v f_c), offered
    /// for sanity sweeps only.
    Classical,
}

/// A full network instance: source → N helpers → multi-antenna receiver.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    /// Source-to-helper links, one per helper, each with its own geometry.
    pub source_links: Vec<FadingLink>,
    /// The receiving array; `helper_to_rsu.branch.distance` is the
    /// helper-to-receiver distance.
    pub helper_to_rsu: CorrelatedArray,
    pub budget: PowerBudget,
    /// Decoding threshold γ₀ (linear SNR).
    pub gamma0: f64,
    /// Packet size Ψ in bits.
    pub packet_bits: f64,
    /// Carrier frequency in Hz.
    pub carrier_hz: f64,
    /// Vehicle speed in m/s.
    pub speed_mps: f64,
    /// When set, overrides the coherence-time block count (the sweeps over
    /// L ∈ {5, 10, 20} force it directly).
    pub forced_blocks: Option<u32>,
    pub tc_model: TcModel,
}

impl Scenario {
    /// Validates the invariants: at least one helper, positive distances,
    /// positive threshold.
    pub fn validate(&self) -> Result<(), ChannelError> {
        if self.source_links.is_empty() {
            return Err(ChannelError::InvalidParameter("scenario needs >= 1 helper"));
        }
        if !(self.gamma0 > 0.0) {
            return Err(ChannelError::InvalidParameter("threshold must be positive"));
        }
        if !(self.packet_bits > 0.0) || !(self.carrier_hz > 0.0) || !(self.speed_mps >= 0.0) {
            return Err(ChannelError::InvalidParameter(
                "packet size and carrier must be positive, speed non-negative",
            ));
        }
        Ok(())
    }

    /// Builds a scenario from the power budget and geometry alone, with all
    /// helpers at a common distance.  Fading power is unit mean, so the mean
    /// SNRs are exactly φP/(d₁ᵅN₀) and (1−φ)P/(d₂ᵅN₀).
    #[allow(clippy::too_many_arguments)]
    pub fn from_geometry(
        budget: PowerBudget,
        n_helpers: u32,
        fading_m: f64,
        d_first: f64,
        antennas: u32,
        model: CorrelationModel,
        d_second: f64,
        alpha: f64,
        gamma0: f64,
        packet_bits: f64,
        carrier_hz: f64,
        speed_mps: f64,
    ) -> Result<Self, ChannelError> {
        if n_helpers == 0 {
            return Err(ChannelError::InvalidParameter("scenario needs >= 1 helper"));
        }
        let g1 = channel::mean_snr(&budget, Phase::First, d_first, alpha)?;
        let g2 = channel::mean_snr(&budget, Phase::Second, d_second, alpha)?;
        let first = FadingLink::new(fading_m, g1, d_first, alpha)?;
        let helper_to_rsu = if g2 > 0.0 {
            CorrelatedArray::new(antennas, model, FadingLink::new(fading_m, g2, d_second, alpha)?)?
        } else {
            // φ = 1 leaves the second hop with zero power; keep the dead
            // branch representable (CDFs treat it as certain outage)
            if antennas == 0 || !(0.0..1.0).contains(&model.rho()) {
                return Err(ChannelError::InvalidParameter("invalid array"));
            }
            CorrelatedArray {
                antennas,
                model,
                branch: FadingLink {
                    m: fading_m,
                    mean_snr: 0.0,
                    distance: d_second,
                    pathloss_exp: alpha,
                },
            }
        };
        let scenario = Scenario {
            source_links: vec![first; n_helpers as usize],
            helper_to_rsu,
            budget,
            gamma0,
            packet_bits,
            carrier_hz,
            speed_mps,
            forced_blocks: None,
            tc_model: TcModel::Paper,
        };
        scenario.validate()?;
        Ok(scenario)
    }

    /// Coherence time under this scenario's model.
    pub fn coherence_time(&self) -> f64 {
        match self.tc_model {
            TcModel::Paper => coherence_time(self.carrier_hz, self.speed_mps),
            TcModel::Classical => coherence_time_classical(self.carrier_hz, self.speed_mps),
        }
    }
}

/// Coherence time T_c = 3 c f_c / (4 √π (c + v)), evaluated literally.
/// Strictly decreasing in v; at v = 0 it reduces to 3 f_c / (4 √π).
pub fn coherence_time(carrier_hz: f64, speed_mps: f64) -> f64 {
    3.0 * SPEED_OF_LIGHT * carrier_hz
        / (4.0 * core::f64::consts::PI.sqrt() * (SPEED_OF_LIGHT + speed_mps))
}

/// Textbook coherence time 9 c / (16 π v f_c); infinite at v = 0.
pub fn coherence_time_classical(carrier_hz: f64, speed_mps: f64) -> f64 {
    9.0 * SPEED_OF_LIGHT / (16.0 * core::f64::consts::PI * speed_mps * carrier_hz)
}

/// Number of blocks a packet spans: L = ⌈Ψ / (T_c ln(1 + γ₀))⌉, floored at
/// 1, unless the scenario forces L outright.
pub fn num_blocks(scenario: &Scenario) -> u32 {
    if let Some(l) = scenario.forced_blocks {
        return l.max(1);
    }
    let tc = scenario.coherence_time();
    let denom = tc * scenario.gamma0.ln_1p();
    if !denom.is_finite() || denom <= 0.0 {
        return 1;
    }
    let raw = scenario.packet_bits / denom;
    if !raw.is_finite() {
        return 1;
    }
    (raw.ceil() as u32).max(1)
}

/// Outage probability of the best-helper first hop: the selected helper is
/// the SNR argmax over independent links, so the max is below γ₀ only when
/// every link is, giving ∏ᵢ P(mᵢ, mᵢγ₀/γ̄ᵢ).
pub fn best_relay_outage(source_links: &[FadingLink], gamma0: f64) -> Result<f64, ChannelError> {
    if source_links.is_empty() {
        return Err(ChannelError::InvalidParameter("scenario needs >= 1 helper"));
    }
    let mut product = 1.0;
    for link in source_links {
        product *= channel::iid_snr_cdf(link, gamma0)?;
    }
    Ok(product)
}

/// Per-block error probability by inclusion-exclusion over the two hops:
/// P_A + P_B − P_A P_B with A the first-hop and B the second-hop outage.
pub fn block_error_prob(scenario: &Scenario) -> Result<f64, ChannelError> {
    scenario.validate()?;
    let pa = best_relay_outage(&scenario.source_links, scenario.gamma0)?;
    let pb = channel::combiner_cdf(&scenario.helper_to_rsu, scenario.gamma0)?;
    Ok((pa + pb - pa * pb).clamp(0.0, 1.0))
}

/// Packet error over `blocks` independent blocks: 1 − (1 − p_block)^L,
/// computed via log1p/expm1 so tiny block errors keep full precision.
pub fn packet_error_from_block(p_block: f64, blocks: u32) -> f64 {
    let p = p_block.clamp(0.0, 1.0);
    if p == 1.0 {
        return 1.0;
    }
    -f64::exp_m1(blocks as f64 * f64::ln_1p(-p))
}

/// Packet error probability of a scenario over `blocks` blocks.
pub fn packet_error_prob(scenario: &Scenario, blocks: u32) -> Result<f64, ChannelError> {
    Ok(packet_error_from_block(block_error_prob(scenario)?, blocks))
}

/// How a probability estimate was produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    /// Fully closed-form evaluation.
    ClosedForm,
    /// Closed form with a numerically integrated combiner CDF inside.
    Quadrature,
    /// Empirical trial fraction from the link simulator.
    MonteCarlo,
}

/// A packet error probability with its provenance and, for Monte Carlo
/// estimates, the trial count and 95% confidence half-widths.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PepEstimate {
    pub pep: f64,
    pub block_error: f64,
    pub provenance: Provenance,
    pub trials: Option<u64>,
    pub block_half_width: Option<f64>,
    pub pep_half_width: Option<f64>,
}

impl PepEstimate {
    pub fn closed_form(pep: f64, block_error: f64, provenance: Provenance) -> Self {
        Self {
            pep,
            block_error,
            provenance,
            trials: None,
            block_half_width: None,
            pep_half_width: None,
        }
    }
}

/// Analytic packet error estimate, tagged with the evaluation route the
/// array model implies (quadrature for a correlated CC array, closed form
/// otherwise).
pub fn packet_error_estimate(scenario: &Scenario, blocks: u32) -> Result<PepEstimate, ChannelError> {
    let p_block = block_error_prob(scenario)?;
    let provenance = match scenario.helper_to_rsu.model {
        CorrelationModel::Cc(rho) if rho > 0.0 && scenario.helper_to_rsu.antennas > 1 => {
            Provenance::Quadrature
        }
        _ => Provenance::ClosedForm,
    };
    Ok(PepEstimate::closed_form(
        packet_error_from_block(p_block, blocks),
        p_block,
        provenance,
    ))
}
