//! Command-line harness for the two-hop uplink analysis engine.
//!
//! Exit codes: 0 success, 1 usage/config error, 2 numeric failure,
//! 3 validation or claim failure.

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Args, Parser, Subcommand};

mod commands;
mod config;
mod output;
mod recipes;

use config::{read_config_file, ConfigOverlay, RunConfig};

#[derive(Parser)]
#[command(
    name = "cooplink",
    version,
    about = "Packet error analysis and power/pricing equilibria for a two-hop vehicular uplink",
    after_help = "Examples:\n  \
        cooplink pep --sweep gamma0-db:-20:0:21 --model both --out pep.csv\n  \
        cooplink validate --model ec --trials 100000 --seed 7 --out validate.csv\n  \
        cooplink game --sweep price:0.1:50:25:log --model cc --out game.csv\n  \
        cooplink reproduce fig6 --out fig6.csv"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    overlay: ConfigOverlay,
    /// JSON config file, or a previous output file (its `#` header is read)
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output file path
    #[arg(long)]
    out: Option<PathBuf>,
}

impl RunArgs {
    /// flags > config file > built-in defaults
    fn resolve(&self) -> Result<RunConfig> {
        let mut cfg = match &self.config {
            Some(path) => read_config_file(path)?,
            None => RunConfig::default(),
        };
        self.overlay.apply(&mut cfg);
        cfg.validate()?;
        Ok(cfg)
    }

    fn out_or(&self, default_name: &str) -> PathBuf {
        self.out.clone().unwrap_or_else(|| PathBuf::from(default_name))
    }
}

#[derive(Args)]
struct ValidateArgs {
    #[command(flatten)]
    run: RunArgs,
    /// Shift every analytic value by this amount (self-test hook for the
    /// FAIL path)
    #[arg(long, hide = true)]
    corrupt_analytic: Option<f64>,
}

#[derive(Args)]
struct ReproduceArgs {
    /// Figure name: fig2, fig3, fig4, fig5 or fig6
    figure: String,
    /// Output file path
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Closed-form packet error sweep
    Pep(RunArgs),
    /// Analytic vs Monte Carlo cross-validation with binomial z-scores
    Validate(ValidateArgs),
    /// Power/pricing equilibrium sweep
    Game(RunArgs),
    /// Run a frozen figure recipe and check its qualitative claims
    Reproduce(ReproduceArgs),
    /// Quick internal identity checks
    Selftest,
}

const EXIT_USAGE: u8 = 1;
const EXIT_NUMERIC: u8 = 2;
const EXIT_VALIDATION: u8 = 3;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // help/version are successful exits; anything else is usage
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };

    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_NUMERIC)
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Pep(args) => {
            let cfg = match args.resolve() {
                Ok(c) => c,
                Err(e) => return usage(e),
            };
            let summary = commands::cmd_pep(&cfg, &args.out_or("pep.csv"))?;
            println!("{summary}");
            Ok(ExitCode::SUCCESS)
        }
        Command::Validate(v) => {
            let cfg = match v.run.resolve() {
                Ok(c) => c,
                Err(e) => return usage(e),
            };
            if cfg.trials < 1_000 {
                return usage(anyhow::anyhow!("validate needs at least 1000 trials"));
            }
            let outcome =
                commands::cmd_validate(&cfg, &v.run.out_or("validate.csv"), v.corrupt_analytic)?;
            println!("{}", outcome.summary);
            Ok(if outcome.passed {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(EXIT_VALIDATION)
            })
        }
        Command::Game(args) => {
            let cfg = match args.resolve() {
                Ok(c) => c,
                Err(e) => return usage(e),
            };
            let summary = commands::cmd_game(&cfg, &args.out_or("game.csv"))?;
            println!("{summary}");
            Ok(ExitCode::SUCCESS)
        }
        Command::Reproduce(r) => {
            let out = r
                .out
                .clone()
                .unwrap_or_else(|| PathBuf::from(format!("{}.csv", r.figure)));
            let outcome = match recipes::run(&r.figure, &out) {
                Ok(o) => o,
                Err(e) if e.to_string().contains("unknown figure") => return usage(e),
                Err(e) => return Err(e),
            };
            println!("{}", outcome.summary);
            for claim in &outcome.claims {
                println!(
                    "  [{}] {}",
                    if claim.pass { "PASS" } else { "FAIL" },
                    claim.text
                );
            }
            Ok(if outcome.passed {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(EXIT_VALIDATION)
            })
        }
        Command::Selftest => {
            let report = commands::cmd_selftest()?;
            println!("{report}");
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn usage(e: anyhow::Error) -> Result<ExitCode> {
    eprintln!("error: {e:#}");
    Ok(ExitCode::from(EXIT_USAGE))
}
