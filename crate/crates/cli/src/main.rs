//! `siegel-lab`: batch front end for the continued-fraction, parabolic-explosion,
//! conformal-radius and Siegel-radius computations.
//!
//! Exit codes: 0 when every check holds, 1 on a reported violation, 2 for usage or
//! input errors (parse, rational input, non-coprime fraction), 3 for numerical failure.

mod audit;
mod commands;
mod report;

use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::report::{CliError, Report};

/// Seed used by every randomized scan unless `--seed` is given.
pub const DEFAULT_SEED: u64 = 20_070_601;

#[derive(Debug, Parser)]
#[command(name = "siegel-lab", version, about = "Numerical audits for quadratic Siegel disks")]
struct Cli {
    #[command(flatten)]
    config: RunConfig,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Text,
}

#[derive(Debug, Clone, Args)]
pub struct RunConfig {
    /// Mantissa bits for multiprecision work.
    #[arg(long, global = true, default_value_t = 256, value_parser = clap::value_parser!(u32).range(64..))]
    pub precision: u32,
    /// Number of linearizer coefficients.
    #[arg(long = "series-N", visible_alias = "series-n", global = true, default_value_t = 4000,
          value_parser = clap::value_parser!(u64).range(100..))]
    pub series_n: u64,
    /// Continued-fraction depth used when a command has no `--depth`.
    #[arg(long, global = true, default_value_t = 64)]
    pub cf_depth: usize,
    /// Pass threshold for numerical residuals.
    #[arg(long, global = true, default_value_t = 1e-12)]
    pub tolerance: f64,
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    pub format: Format,
    /// Seed for randomized scans.
    #[arg(long, global = true, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Which {
    Constants,
    KeyInequality,
    Bcurve,
    Slit,
    Schwarz,
    All,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Convergents with the gap sandwich and the good indices.
    ///
    /// CSV columns: n,a,p,q,gap_holds,good.
    Cf {
        /// Decimal, p/q, literal like "[0; 2,(1)]", or surd like "(3-sqrt(5))/2".
        #[arg(long, allow_hyphen_values = true)]
        alpha: String,
        #[arg(long)]
        depth: Option<usize>,
    },
    /// Partial Bruno sum and the good/bad split of it.
    ///
    /// CSV columns: n,q_n,term,partial.
    Bruno {
        #[arg(long, allow_hyphen_values = true)]
        alpha: String,
        #[arg(long)]
        depth: Option<usize>,
    },
    /// Exhaustive checks of the inequality chain; exit 1 on any violation.
    ///
    /// CSV columns: tag,ok,detail.
    Audit {
        #[arg(long, value_enum, default_value_t = Which::All)]
        which: Which,
        #[arg(long, default_value_t = 50)]
        qmax: u32,
        #[arg(long, default_value_t = 10_000)]
        grid: usize,
        /// Largest denominator for the resultant collision oracle (at most 6).
        #[arg(long, default_value_t = 4, value_parser = clap::value_parser!(u32).range(1..=6))]
        oracle_qmax: u32,
        #[arg(long, hide = true)]
        inject_fault: bool,
    },
    /// Tracks the exploded cycle at p/q and checks the cycle relation.
    ///
    /// CSV columns: branch,delta_re,delta_im,chi_re,chi_im,residual.
    Explode {
        #[arg(long, allow_hyphen_values = true)]
        p: i64,
        #[arg(long)]
        q: i64,
        /// `default` (|delta|^q = 1/(2q^3)), `beyond-R`, or a value t for |delta|^q = t.
        #[arg(long, default_value = "default")]
        delta_path: String,
        #[arg(long, default_value_t = 16)]
        steps: usize,
        /// Write the branch CSV to this file.
        #[arg(long)]
        emit: Option<std::path::PathBuf>,
    },
    /// B_partial + log r against 16.
    ///
    /// CSV columns: n,log_abs_h.
    Radius {
        #[arg(long, allow_hyphen_values = true)]
        alpha: String,
        #[arg(long)]
        depth: Option<usize>,
    },
}

fn run(cli: Cli) -> Result<Report, CliError> {
    let cfg = &cli.config;
    match cli.command {
        Command::Cf { alpha, depth } => commands::cf(cfg, &alpha, depth.unwrap_or(cfg.cf_depth)),
        Command::Bruno { alpha, depth } => commands::bruno(cfg, &alpha, depth.unwrap_or(cfg.cf_depth)),
        Command::Audit { which, qmax, grid, oracle_qmax, inject_fault } => {
            audit::run(cfg, &audit::AuditOptions { which, qmax, grid, oracle_qmax, inject_fault })
        }
        Command::Explode { p, q, delta_path, steps, emit } => {
            commands::explode(cfg, p, q, &delta_path, steps, emit.as_deref())
        }
        Command::Radius { alpha, depth } => commands::radius(cfg, &alpha, depth.unwrap_or(cfg.cf_depth)),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let format = cli.config.format;
    match run(cli).and_then(|r| r.emit(format)) {
        Ok(ok) => ExitCode::from(if ok { 0 } else { 1 }),
        Err(e) => {
            eprintln!("siegel-lab: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
