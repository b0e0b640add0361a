//! The five subcommands: pep, validate, game, reproduce, selftest.

use std::path::Path;

use anyhow::{bail, Result};

use cooplink::channel::{self, CorrelationModel};
use cooplink::game::{self, ChannelRealization, GameParams};
use cooplink::montecarlo::{estimate_pep, CorrelatedGainSampler, RngSpec};
use cooplink::pep;
use cooplink::specfun;

use crate::config::{db_to_linear, linear_to_db, ModelChoice, RealizationChoice, RunConfig, SweepVar};
use crate::output::{Cell, Table};

/// Stand-in sweep when none is requested: a single point at the
/// configured value of γ₀ (pep/validate) or price (game).
fn effective_points(cfg: &RunConfig, fallback: SweepVar) -> (SweepVar, Vec<f64>) {
    match &cfg.sweep {
        Some(s) => (s.var, s.values()),
        None => {
            let v = match fallback {
                SweepVar::Gamma0Db => cfg.gamma0_db,
                SweepVar::Price => cfg.price,
                _ => unreachable!("fallback is one of the two defaults"),
            };
            (fallback, vec![v])
        }
    }
}

fn point_config(cfg: &RunConfig, var: SweepVar, value: f64) -> RunConfig {
    let mut point = cfg.clone();
    let spec = crate::config::SweepSpec {
        var,
        start: value,
        stop: value,
        points: 1,
        log: false,
    };
    spec.apply(&mut point, value);
    point
}

/// Closed-form packet error sweep: one row per point with the first-hop
/// outage, per-model second-hop outage, block error and PEP.
pub fn cmd_pep(cfg: &RunConfig, out: &Path) -> Result<String> {
    cfg.validate()?;
    let models = cfg.models();
    let (var, values) = effective_points(cfg, SweepVar::Gamma0Db);

    let mut columns = vec![var.name().to_string(), "l".into(), "p_first_hop".into()];
    for (label, _) in &models {
        columns.push(format!("p_second_{label}"));
        columns.push(format!("block_{label}"));
        columns.push(format!("pep_{label}"));
    }
    let mut table = Table::new(columns);

    for &value in &values {
        let point = point_config(cfg, var, value);
        let mut row: Vec<Cell> = Vec::new();
        let mut l_shared = None;
        let mut pa_shared = None;
        let mut model_cells = Vec::new();
        for (_, model) in point.models() {
            let sc = point.scenario(model)?;
            let l = pep::num_blocks(&sc);
            let pa = pep::best_relay_outage(&sc.source_links, sc.gamma0)?;
            let pb = channel::combiner_cdf(&sc.helper_to_rsu, sc.gamma0)?;
            let block = (pa + pb - pa * pb).clamp(0.0, 1.0);
            let pep_v = pep::packet_error_from_block(block, l);
            l_shared = Some(l);
            pa_shared = Some(pa);
            model_cells.push(Cell::Float(pb));
            model_cells.push(Cell::Float(block));
            model_cells.push(Cell::Float(pep_v));
        }
        row.push(Cell::Float(value));
        row.push(Cell::Int(l_shared.unwrap() as i64));
        row.push(Cell::Float(pa_shared.unwrap()));
        row.extend(model_cells);
        table.push(row);
    }

    let rows = table.len();
    table.write(out, cfg, "pep", &[])?;
    Ok(format!("pep: wrote {rows} rows to {}", out.display()))
}

pub struct ValidateOutcome {
    pub summary: String,
    pub passed: bool,
}

/// Analytic block outage versus a Monte Carlo estimate, per sweep point and
/// model, with binomial z-scores.  Fails (exit 3) when any |z| > 3.
///
/// `corrupt_analytic` shifts every analytic value by the given amount; it
/// exists so the FAIL path itself can be exercised.
pub fn cmd_validate(
    cfg: &RunConfig,
    out: &Path,
    corrupt_analytic: Option<f64>,
) -> Result<ValidateOutcome> {
    cfg.validate()?;
    let (var, values) = effective_points(cfg, SweepVar::Gamma0Db);

    let mut table = Table::new(vec![
        var.name(),
        "model",
        "l",
        "block_analytic",
        "block_mc",
        "block_half_width",
        "pep_analytic",
        "pep_mc",
        "z",
        "pass",
    ]);

    let mut max_abs_z: f64 = 0.0;
    for (point_idx, &value) in values.iter().enumerate() {
        let point = point_config(cfg, var, value);
        for (model_idx, (label, model)) in point.models().into_iter().enumerate() {
            let sc = point.scenario(model)?;
            let l = pep::num_blocks(&sc);
            let analytic = pep::packet_error_estimate(&sc, l)?;
            let mut block_analytic = analytic.block_error;
            if let Some(delta) = corrupt_analytic {
                block_analytic = (block_analytic + delta).clamp(0.0, 1.0);
            }
            let stream = (point_idx * 2 + model_idx) as u64;
            let mc = estimate_pep(&sc, l, cfg.trials, RngSpec::new(cfg.seed, stream))?;
            let se = (block_analytic * (1.0 - block_analytic) / cfg.trials as f64).sqrt();
            let z = if se > 0.0 {
                (mc.block_error - block_analytic) / se
            } else if mc.block_error == block_analytic {
                0.0
            } else {
                f64::INFINITY
            };
            max_abs_z = max_abs_z.max(z.abs());
            table.push(vec![
                Cell::Float(value),
                Cell::from(label),
                Cell::Int(l as i64),
                Cell::Float(block_analytic),
                Cell::Float(mc.block_error),
                Cell::Float(mc.block_half_width.unwrap_or(0.0)),
                Cell::Float(pep::packet_error_from_block(block_analytic, l)),
                Cell::Float(mc.pep),
                Cell::Float(z),
                Cell::Int(i64::from(z.abs() <= 3.0)),
            ]);
        }
    }

    let passed = max_abs_z <= 3.0;
    let verdict = if passed { "PASS" } else { "FAIL" };
    table.write(
        out,
        cfg,
        "validate",
        &[
            ("verdict", format!("\"{verdict}\"")),
            ("max_abs_z", format!("{max_abs_z}")),
        ],
    )?;
    Ok(ValidateOutcome {
        summary: format!(
            "validate: {verdict} (max |z| = {max_abs_z:.3} over {} rows) -> {}",
            table.len(),
            out.display()
        ),
        passed,
    })
}

/// A drawn or averaged channel state entering the game.
#[derive(Debug, Clone, Copy)]
struct GameChannel {
    h_sq: f64,
    eta: f64,
}

/// Draws the game channel: N first-hop gains with best-helper selection
/// (equal helper geometry, so the argmax is the largest gain) and one
/// correlated array vector summed into η.
fn draw_game_channel(cfg: &RunConfig, model: CorrelationModel, draw_index: u64) -> Result<GameChannel> {
    let sc = cfg.scenario(model)?;
    let runner_array = CorrelatedGainSampler::new(&sc.helper_to_rsu)?;
    // a fixed stream id reserved for game draws keeps them disjoint from
    // validate's per-point streams
    let spec = RngSpec::new(cfg.seed, 0x6a3e);
    let mut rng = spec.trial_rng(draw_index);
    let single = CorrelatedGainSampler::new(&cooplink::channel::CorrelatedArray {
        antennas: 1,
        model: CorrelationModel::Cc(0.0),
        branch: sc.source_links[0],
    })?;
    let mut best = f64::NEG_INFINITY;
    for _ in 0..cfg.n_helpers {
        let g = single.sample(&mut rng)[0];
        if g > best {
            best = g;
        }
    }
    let eta: f64 = runner_array.sample(&mut rng).iter().sum();
    Ok(GameChannel { h_sq: best, eta })
}

fn game_channels(cfg: &RunConfig, model: CorrelationModel) -> Result<Vec<GameChannel>> {
    match cfg.realization {
        RealizationChoice::Mean => Ok(vec![GameChannel {
            h_sq: 1.0,
            eta: cfg.m_antennas as f64,
        }]),
        RealizationChoice::Draw => Ok(vec![draw_game_channel(cfg, model, 0)?]),
        RealizationChoice::Average => (0..cfg.draws as u64)
            .map(|i| draw_game_channel(cfg, model, i))
            .collect(),
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct GameRow {
    pub phi_star: f64,
    pub price_ask: f64,
    pub power_star: f64,
    pub u_source: f64,
    pub u_helper: f64,
    pub foc_residual: f64,
    pub no_trade_frac: f64,
}

/// Solves one game configuration under its realization policy; used by the
/// figure recipes.
pub fn game_point(cfg: &RunConfig, model: CorrelationModel) -> Result<GameRow> {
    let channels = game_channels(cfg, model)?;
    Ok(solve_game_point(cfg, &channels))
}

fn solve_game_point(cfg: &RunConfig, channels: &[GameChannel]) -> GameRow {
    let mut acc = GameRow::default();
    let n = channels.len() as f64;
    for ch_state in channels {
        let ch = ChannelRealization {
            h_sq_first: ch_state.h_sq,
            eta: ch_state.eta,
            d_first: cfg.d_first,
            d_second: cfg.d_second,
            alpha: cfg.alpha,
            noise: cfg.noise,
        };
        let params = GameParams {
            steepness: cfg.steepness,
            revenue_weight: cfg.revenue_weight,
            helper_cost: cfg.helper_cost,
            price: cfg.price,
            gamma0: db_to_linear(cfg.gamma0_db),
        };
        let (power, traded) = match game::optimal_power(&ch, &params) {
            Ok(p) => (p, true),
            Err(_) => (0.0, false),
        };
        acc.phi_star += game::optimal_phi(&ch);
        acc.price_ask += game::optimal_price(&ch, &params);
        acc.power_star += power;
        acc.u_source += game::utility_source(power, &ch, &params);
        acc.u_helper += game::utility_helper(power, &ch, &params);
        if traded && power > 0.0 {
            acc.foc_residual += game::source_marginal(power, &ch, &params).abs();
        } else {
            acc.no_trade_frac += 1.0;
        }
    }
    acc.phi_star /= n;
    acc.price_ask /= n;
    acc.power_star /= n;
    acc.u_source /= n;
    acc.u_helper /= n;
    let trades = n - acc.no_trade_frac;
    if trades > 0.0 {
        acc.foc_residual /= trades;
    }
    acc.no_trade_frac /= n;
    acc
}

/// Game sweep (price or geometry): per point, the split, the helper's
/// asking price, the power best-response to the configured price, both
/// utilities and the stationarity residual.
pub fn cmd_game(cfg: &RunConfig, out: &Path) -> Result<String> {
    cfg.validate()?;
    let model = match cfg.model {
        ModelChoice::Cc => CorrelationModel::Cc(cfg.rho),
        ModelChoice::Ec => CorrelationModel::Ec(cfg.rho),
        ModelChoice::Both => {
            if cfg.realization == RealizationChoice::Mean {
                CorrelationModel::Cc(cfg.rho) // irrelevant at the mean state
            } else {
                bail!("game with drawn realizations needs --model cc or --model ec");
            }
        }
    };
    let (var, values) = effective_points(cfg, SweepVar::Price);

    // realization fixed once per run, reused at every sweep point, so the
    // curve varies only through the swept variable
    let channels = game_channels(cfg, model)?;

    let mut table = Table::new(vec![
        var.name(),
        "phi_star",
        "price_ask",
        "power_star",
        "power_star_db",
        "u_source",
        "u_helper",
        "foc_residual",
        "no_trade",
    ]);

    for &value in &values {
        let point = point_config(cfg, var, value);
        let row = solve_game_point(&point, &channels);
        table.push(vec![
            Cell::Float(value),
            Cell::Float(row.phi_star),
            Cell::Float(row.price_ask),
            Cell::Float(row.power_star),
            Cell::Float(linear_to_db(row.power_star)),
            Cell::Float(row.u_source),
            Cell::Float(row.u_helper),
            Cell::Float(row.foc_residual),
            Cell::Float(row.no_trade_frac),
        ]);
    }

    let realization = format!(
        "{{\"policy\":{:?},\"draws\":{}}}",
        format!("{:?}", cfg.realization).to_lowercase(),
        channels.len()
    );
    let rows = table.len();
    table.write(out, cfg, "game", &[("realization", realization)])?;
    Ok(format!("game: wrote {rows} rows to {}", out.display()))
}

/// Quick internal identity checks; returns Err on the first violation.
pub fn cmd_selftest() -> Result<String> {
    let ctl = specfun::SeriesControl::default();
    let mut lines = Vec::new();
    let mut check = |name: &str, ok: bool| -> Result<()> {
        lines.push(format!("selftest {name}: {}", if ok { "ok" } else { "FAILED" }));
        if !ok {
            bail!("selftest failed at: {name}");
        }
        Ok(())
    };

    check(
        "exponential CDF identity",
        (specfun::reg_lower_gamma(1.0, 2.0_f64.ln())? - 0.5).abs() < 1e-14,
    )?;
    let p = specfun::reg_lower_gamma(3.3, 2.2)?;
    let q = specfun::reg_upper_gamma(3.3, 2.2)?;
    check("incomplete gamma complement", (p + q - 1.0).abs() < 1e-12)?;
    check(
        "kummer exponential reduction",
        (specfun::kummer_1f1(1.0, 1.0, 1.0, &ctl)? - core::f64::consts::E).abs() < 1e-12,
    )?;
    let phi1 = specfun::humbert_phi1(1.0, 2.0, 3.0, 0.3, 0.0, &ctl)?;
    check("humbert gauss reduction", (phi1 - 1.2594431986384973).abs() < 1e-10)?;
    check("ec lambda zero-correlation", channel::ec_lambda(10, 0.0)? == 10.0)?;
    let gp = GameParams {
        steepness: 2.0,
        revenue_weight: 1.0,
        helper_cost: 0.1,
        price: 1.0,
        gamma0: 0.7,
    };
    check("sigmoid midpoint", game::satisfaction(0.7, &gp) == 0.5)?;
    check(
        "packet error arithmetic",
        (pep::packet_error_from_block(0.09, 5) - (1.0 - 0.91f64.powi(5))).abs() < 1e-15,
    )?;
    let ch = ChannelRealization::new(0.9, 4.0, 15.0, 20.0, 2.5, 1.0)?;
    let phi = game::optimal_phi(&ch);
    let comp = game::optimal_phi_complement(&ch);
    check("split complement", (phi + comp - 1.0).abs() < 1e-15)?;
    let sc = RunConfig::default().scenario(CorrelationModel::Ec(0.1))?;
    let pe = pep::packet_error_prob(&sc, 10)?;
    check("default scenario evaluates", pe.is_finite() && (0.0..=1.0).contains(&pe))?;

    lines.push("selftest: all checks passed".into());
    Ok(lines.join("\n"))
}
