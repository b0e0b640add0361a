//! Run configuration: built-in defaults, config-file overlay, flag overlay.
//!
//! Precedence is flags > config file > built-in defaults.  The fully
//! resolved configuration is serialized into every output header, and an
//! output file (or a bare JSON object) can be fed back through `--config`
//! to reproduce a run byte for byte.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};

use cooplink::channel::{CorrelationModel, PowerBudget};
use cooplink::pep::{Scenario, TcModel};

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn linear_to_db(linear: f64) -> f64 {
    10.0 * linear.log10()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum ModelChoice {
    Cc,
    Ec,
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum TcChoice {
    Paper,
    Classical,
}

impl From<TcChoice> for TcModel {
    fn from(c: TcChoice) -> Self {
        match c {
            TcChoice::Paper => TcModel::Paper,
            TcChoice::Classical => TcModel::Classical,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum RealizationChoice {
    /// Every fading power at its unit mean (η = M, |h|² = 1).
    Mean,
    /// One seeded draw, held fixed across the sweep.
    Draw,
    /// Average the game outputs over `draws` seeded draws.
    Average,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum FormatChoice {
    Csv,
    Json,
}

/// Which scalar a sweep varies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SweepVar {
    SnrDb,
    Gamma0Db,
    Rho,
    Phi,
    DFirst,
    DSecond,
    Alpha,
    NHelpers,
    MAntennas,
    Blocks,
    MFading,
    Speed,
    Price,
}

impl SweepVar {
    pub fn name(&self) -> &'static str {
        match self {
            SweepVar::SnrDb => "snr-db",
            SweepVar::Gamma0Db => "gamma0-db",
            SweepVar::Rho => "rho",
            SweepVar::Phi => "phi",
            SweepVar::DFirst => "d-first",
            SweepVar::DSecond => "d-second",
            SweepVar::Alpha => "alpha",
            SweepVar::NHelpers => "n-helpers",
            SweepVar::MAntennas => "m-antennas",
            SweepVar::Blocks => "blocks",
            SweepVar::MFading => "m-fading",
            SweepVar::Speed => "speed",
            SweepVar::Price => "price",
        }
    }
}

impl FromStr for SweepVar {
    type Err = anyhow::Error;
    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "snr-db" => SweepVar::SnrDb,
            "gamma0-db" => SweepVar::Gamma0Db,
            "rho" => SweepVar::Rho,
            "phi" => SweepVar::Phi,
            "d-first" => SweepVar::DFirst,
            "d-second" => SweepVar::DSecond,
            "alpha" => SweepVar::Alpha,
            "n-helpers" => SweepVar::NHelpers,
            "m-antennas" => SweepVar::MAntennas,
            "blocks" => SweepVar::Blocks,
            "m-fading" => SweepVar::MFading,
            "speed" => SweepVar::Speed,
            "price" => SweepVar::Price,
            other => bail!("unknown sweep variable '{other}'"),
        })
    }
}

/// One swept variable: `VAR:START:STOP:POINTS[:log]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub var: SweepVar,
    pub start: f64,
    pub stop: f64,
    pub points: u32,
    pub log: bool,
}

impl SweepSpec {
    pub fn values(&self) -> Vec<f64> {
        if self.points <= 1 {
            return vec![self.start];
        }
        let n = self.points as usize;
        (0..n)
            .map(|i| {
                let t = i as f64 / (n - 1) as f64;
                if self.log {
                    (self.start.ln() + t * (self.stop.ln() - self.start.ln())).exp()
                } else {
                    self.start + t * (self.stop - self.start)
                }
            })
            .collect()
    }

    pub fn apply(&self, cfg: &mut RunConfig, value: f64) {
        match self.var {
            SweepVar::SnrDb => cfg.snr_db = value,
            SweepVar::Gamma0Db => cfg.gamma0_db = value,
            SweepVar::Rho => cfg.rho = value,
            SweepVar::Phi => cfg.phi = value,
            SweepVar::DFirst => cfg.d_first = value,
            SweepVar::DSecond => cfg.d_second = value,
            SweepVar::Alpha => cfg.alpha = value,
            SweepVar::NHelpers => cfg.n_helpers = value.round().max(1.0) as u32,
            SweepVar::MAntennas => cfg.m_antennas = value.round().max(1.0) as u32,
            SweepVar::Blocks => cfg.blocks = Some(value.round().max(1.0) as u32),
            SweepVar::MFading => cfg.m_fading = value,
            SweepVar::Speed => cfg.speed = value,
            SweepVar::Price => cfg.price = value,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !self.start.is_finite() || !self.stop.is_finite() {
            bail!("sweep bounds must be finite");
        }
        if self.points == 0 {
            bail!("sweep needs at least one point");
        }
        if self.log && (self.start <= 0.0 || self.stop <= 0.0) {
            bail!("log sweeps need positive bounds");
        }
        Ok(())
    }
}

impl FromStr for SweepSpec {
    type Err = anyhow::Error;
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        if parts.len() != 4 && parts.len() != 5 {
            bail!("sweep must be VAR:START:STOP:POINTS[:log], got '{s}'");
        }
        let log = match parts.get(4) {
            None => false,
            Some(&"log") => true,
            Some(other) => bail!("unknown sweep scale '{other}' (expected 'log')"),
        };
        let spec = SweepSpec {
            var: parts[0].parse()?,
            start: parts[1].parse().context("bad sweep start")?,
            stop: parts[2].parse().context("bad sweep stop")?,
            points: parts[3].parse().context("bad sweep point count")?,
            log,
        };
        spec.validate()?;
        Ok(spec)
    }
}

impl fmt::Display for SweepSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}:{}:{}:{}{}",
            self.var.name(),
            self.start,
            self.stop,
            self.points,
            if self.log { ":log" } else { "" }
        )
    }
}

/// A fully resolved run configuration.  Defaults follow the reference
/// operating point: γ₀ = −10 dB, N = 5, M = 10, φ = 0.5, m = 1,
/// P/N₀ = 25 dB, ρ = 0.1, L = 10, with the calibrated geometry
/// d₁ = 25 m, d₂ = 8 m, α = 2.5.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RunConfig {
    pub snr_db: f64,
    pub gamma0_db: f64,
    pub n_helpers: u32,
    pub m_antennas: u32,
    pub phi: f64,
    pub m_fading: f64,
    pub rho: f64,
    pub model: ModelChoice,
    pub blocks: Option<u32>,
    pub packet_bits: f64,
    pub carrier_hz: f64,
    pub speed: f64,
    pub d_first: f64,
    pub d_second: f64,
    pub alpha: f64,
    pub trials: u64,
    pub seed: u64,
    pub tc_model: TcChoice,
    pub price: f64,
    pub steepness: f64,
    pub revenue_weight: f64,
    pub helper_cost: f64,
    pub noise: f64,
    pub realization: RealizationChoice,
    pub draws: u32,
    pub sweep: Option<SweepSpec>,
    pub format: FormatChoice,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            snr_db: 25.0,
            gamma0_db: -10.0,
            n_helpers: 5,
            m_antennas: 10,
            phi: 0.5,
            m_fading: 1.0,
            rho: 0.1,
            model: ModelChoice::Both,
            blocks: Some(10),
            packet_bits: 1024.0,
            carrier_hz: 5.9e9,
            speed: 20.0,
            d_first: 25.0,
            d_second: 8.0,
            alpha: 2.5,
            trials: 100_000,
            seed: 42,
            tc_model: TcChoice::Paper,
            price: 10.0,
            steepness: 5.0,
            revenue_weight: 150.0,
            helper_cost: 1e-4,
            noise: 1.0,
            realization: RealizationChoice::Mean,
            draws: 500,
            sweep: None,
            format: FormatChoice::Csv,
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.phi > 0.0 && self.phi <= 1.0) {
            bail!("phi must lie in (0, 1]");
        }
        if !(0.0..1.0).contains(&self.rho) {
            bail!("rho must lie in [0, 1)");
        }
        if self.n_helpers == 0 || self.m_antennas == 0 {
            bail!("n-helpers and m-antennas must be >= 1");
        }
        if !(self.m_fading >= 0.5) {
            bail!("m-fading must be >= 0.5");
        }
        if !(self.d_first > 0.0 && self.d_second > 0.0) {
            bail!("distances must be positive");
        }
        // link-level runs additionally require alpha >= 2 (enforced when a
        // scenario is built); pure game runs accept any positive exponent
        if !(self.alpha > 0.0) {
            bail!("alpha must be positive");
        }
        if !(self.noise > 0.0) {
            bail!("noise must be positive");
        }
        if let Some(s) = &self.sweep {
            s.validate()?;
        }
        Ok(())
    }

    pub fn gamma0_linear(&self) -> f64 {
        db_to_linear(self.gamma0_db)
    }

    pub fn budget(&self) -> Result<PowerBudget> {
        // P/N₀ is the dB-facing quantity; powers are expressed against N₀
        let p = db_to_linear(self.snr_db) * self.noise;
        Ok(PowerBudget::new(p, self.phi, self.noise)?)
    }

    /// The concrete models this run covers, with column labels.
    pub fn models(&self) -> Vec<(&'static str, CorrelationModel)> {
        match self.model {
            ModelChoice::Cc => vec![("cc", CorrelationModel::Cc(self.rho))],
            ModelChoice::Ec => vec![("ec", CorrelationModel::Ec(self.rho))],
            ModelChoice::Both => vec![
                ("cc", CorrelationModel::Cc(self.rho)),
                ("ec", CorrelationModel::Ec(self.rho)),
            ],
        }
    }

    pub fn scenario(&self, model: CorrelationModel) -> Result<Scenario> {
        let mut sc = Scenario::from_geometry(
            self.budget()?,
            self.n_helpers,
            self.m_fading,
            self.d_first,
            self.m_antennas,
            model,
            self.d_second,
            self.alpha,
            self.gamma0_linear(),
            self.packet_bits,
            self.carrier_hz,
            self.speed,
        )?;
        sc.forced_blocks = self.blocks;
        sc.tc_model = TcModel::from(self.tc_model);
        Ok(sc)
    }
}

/// Optional overrides: the shape shared by command-line flags, config
/// files, and recipe tables.  Anything left unset falls through to the
/// layer below.
#[derive(Debug, Clone, Default, PartialEq, clap::Args, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConfigOverlay {
    /// Total-to-noise power ratio P/N₀ in dB
    #[arg(long)]
    pub snr_db: Option<f64>,
    /// Decoding threshold γ₀ in dB
    #[arg(long)]
    pub gamma0_db: Option<f64>,
    /// Number of helper vehicles N
    #[arg(long)]
    pub n_helpers: Option<u32>,
    /// Number of receiver antennas M
    #[arg(long)]
    pub m_antennas: Option<u32>,
    /// First-phase power fraction φ in (0, 1]
    #[arg(long)]
    pub phi: Option<f64>,
    /// Nakagami fading shape m (integer for Monte Carlo runs)
    #[arg(long)]
    pub m_fading: Option<f64>,
    /// Antenna power-correlation coefficient ρ in [0, 1)
    #[arg(long)]
    pub rho: Option<f64>,
    /// Array correlation model
    #[arg(long, value_enum)]
    pub model: Option<ModelChoice>,
    /// Force the block count L (otherwise derived from coherence time)
    #[arg(long)]
    pub blocks: Option<u32>,
    /// Packet size Ψ in bits (used when L is not forced)
    #[arg(long)]
    pub packet_bits: Option<f64>,
    /// Carrier frequency in Hz
    #[arg(long)]
    pub carrier_hz: Option<f64>,
    /// Vehicle speed in m/s
    #[arg(long)]
    pub speed: Option<f64>,
    /// Source-to-helper distance in meters
    #[arg(long)]
    pub d_first: Option<f64>,
    /// Helper-to-receiver distance in meters
    #[arg(long)]
    pub d_second: Option<f64>,
    /// Path loss exponent α
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Monte Carlo trial count
    #[arg(long)]
    pub trials: Option<u64>,
    /// RNG seed
    #[arg(long)]
    pub seed: Option<u64>,
    /// Coherence-time expression
    #[arg(long, value_enum)]
    pub tc_model: Option<TcChoice>,
    /// Helper's asking price per Watt (game runs)
    #[arg(long)]
    pub price: Option<f64>,
    /// Sigmoid steepness a (game runs)
    #[arg(long)]
    pub steepness: Option<f64>,
    /// Revenue weight w_p (game runs)
    #[arg(long)]
    pub revenue_weight: Option<f64>,
    /// Helper's cost per Watt (game runs)
    #[arg(long)]
    pub helper_cost: Option<f64>,
    /// Noise power N₀ in Watts
    #[arg(long)]
    pub noise: Option<f64>,
    /// Channel realization policy for game runs
    #[arg(long, value_enum)]
    pub realization: Option<RealizationChoice>,
    /// Number of channel draws averaged when --realization average
    #[arg(long)]
    pub draws: Option<u32>,
    /// Swept variable, VAR:START:STOP:POINTS[:log]
    #[arg(long, value_parser = SweepSpec::from_str)]
    pub sweep: Option<SweepSpec>,
    /// Output format
    #[arg(long, value_enum)]
    pub format: Option<FormatChoice>,
}

macro_rules! overlay_fields {
    ($cfg:ident, $self:ident; $($field:ident),* $(,)?) => {
        $(if let Some(v) = &$self.$field {
            $cfg.$field = v.clone().into();
        })*
    };
}

impl ConfigOverlay {
    pub fn apply(&self, cfg: &mut RunConfig) {
        overlay_fields!(
            cfg, self;
            snr_db, gamma0_db, n_helpers, m_antennas, phi, m_fading, rho, model,
            packet_bits, carrier_hz, speed, d_first, d_second, alpha, trials,
            seed, tc_model, price, steepness, revenue_weight, helper_cost,
            noise, realization, draws, format,
        );
        if let Some(b) = self.blocks {
            cfg.blocks = Some(b);
        }
        if let Some(s) = self.sweep {
            cfg.sweep = Some(s);
        }
    }
}

/// Reads a configuration from a JSON file, or from a previous output file
/// whose first line is the `# {...}` header.
pub fn read_config_file(path: &Path) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("cannot read config {}", path.display()))?;
    let first = text.lines().next().unwrap_or("");
    let json = if let Some(stripped) = first.strip_prefix("# ") {
        stripped.to_string()
    } else {
        text
    };
    let value: serde_json::Value =
        serde_json::from_str(&json).context("config is not valid JSON")?;
    let config_value = value.get("config").cloned().unwrap_or(value);
    let cfg: RunConfig =
        serde_json::from_value(config_value).context("config JSON has unexpected shape")?;
    Ok(cfg)
}
