//! Link-level analysis of a two-hop cooperative vehicular uplink.
//!
//! A source vehicle broadcasts to the strongest of `N` helper vehicles, the
//! selected helper decodes and forwards to a roadside unit with `M` receive
//! antennas combined by maximal ratio combining, and the end-to-end link is
//! in outage whenever either hop falls below an SNR threshold.  The antennas
//! at the roadside unit are closely spaced, so their fading is correlated;
//! two structured array models are supported (one power-correlation
//! coefficient shared by every antenna pair, or a coefficient decaying
//! geometrically with antenna separation).
//!
//! The crate provides:
//!
//! * [`channel`] — per-hop and combiner-output SNR distributions under
//!   Nakagami-m fading, for independent and correlated branches;
//! * [`pep`] — block segmentation from coherence time, best-helper order
//!   statistics, and per-block / per-packet error probabilities;
//! * [`montecarlo`] — an independent link simulator with reproducible
//!   counter-based RNG streams, used as the oracle for every closed form;
//! * [`game`] — the leader-follower power/pricing solver for the
//!   source-helper transaction (closed-form split, power and price optima);
//! * [`specfun`] — the special-function kernel behind the closed forms
//!   (regularized incomplete gamma, confluent and two-variable
//!   hypergeometric series, adaptive quadrature).

pub mod channel;
pub mod game;
pub mod montecarlo;
pub mod pep;
pub mod specfun;

pub use channel::{ChannelError, CorrelatedArray, CorrelationModel, FadingLink, Phase, PowerBudget};
pub use game::{ChannelRealization, Equilibrium, GameError, GameParams};
pub use montecarlo::{RngSpec, SampleError, TrialResult};
pub use pep::{PepEstimate, Provenance, Scenario, TcModel};
