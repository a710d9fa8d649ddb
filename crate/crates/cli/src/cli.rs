//! Argument parsing and dispatch.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::error::ErrorKind;
use clap::{Parser, Subcommand, ValueEnum};

use crate::eval::{eval_binom, eval_pois, BoundReport};
use crate::sweep::{sweep_binom, write_csv, SweepSpec};
use crate::verify::{load_config, run_verify, verdicts_json};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "tailbounds", version, about = "Binomial and Poisson tail bounds")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate every bound at one threshold
    Eval {
        #[command(subcommand)]
        dist: EvalDist,
    },
    /// Tabulate bounds over a grid of p as CSV
    Sweep {
        #[command(subcommand)]
        dist: SweepDist,
    },
    /// Certify every inequality and identity over a parameter grid
    Verify {
        /// Grid configuration file; keys not set keep their defaults
        #[arg(long)]
        config: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, Copy, Default, ValueEnum)]
pub enum OutputFormat {
    #[default]
    Json,
    Text,
}

#[derive(Debug, Subcommand)]
pub enum EvalDist {
    /// X ~ Bin(n, p), tail P[X >= k]
    Binom {
        #[arg(long)]
        n: u64,
        /// Decimal or fraction, e.g. 0.3 or 3/10
        #[arg(long)]
        p: String,
        #[arg(long, allow_hyphen_values = true)]
        k: i64,
        #[arg(long, value_enum, default_value_t)]
        format: OutputFormat,
    },
    /// Y ~ Poi(mu), tail P[Y >= k]
    Pois {
        #[arg(long)]
        mu: String,
        /// Threshold; fractional values are rounded up
        #[arg(long, allow_hyphen_values = true)]
        k: String,
        /// Also report the Chernoff form with prefactor e^(+mu)
        #[arg(long)]
        positive_exponent: bool,
        #[arg(long, value_enum, default_value_t)]
        format: OutputFormat,
    },
}

#[derive(Debug, Subcommand)]
pub enum SweepDist {
    /// Fixed n and k, p over integer multiples of the step
    Binom {
        #[arg(long)]
        n: u64,
        #[arg(long)]
        k: u64,
        /// Default 0.01
        #[arg(long)]
        p_min: Option<String>,
        /// Default k/n - 0.01
        #[arg(long)]
        p_max: Option<String>,
        #[arg(long, default_value = "0.01")]
        step: String,
        /// Divide the pelekis_lower column by p^2
        #[arg(long)]
        figure_exponent: bool,
    },
}

fn render(report: &BoundReport, format: OutputFormat) -> anyhow::Result<String> {
    Ok(match format {
        OutputFormat::Json => serde_json::to_string_pretty(report)? + "\n",
        OutputFormat::Text => report.to_text(),
    })
}

fn dispatch(command: Command, out: &mut dyn Write, err: &mut dyn Write) -> anyhow::Result<i32> {
    match command {
        Command::Eval { dist } => {
            let (report, format) = match dist {
                EvalDist::Binom { n, p, k, format } => (eval_binom(n, &p, k)?, format),
                EvalDist::Pois { mu, k, positive_exponent, format } => {
                    (eval_pois(&mu, &k, positive_exponent)?, format)
                }
            };
            for anomaly in &report.meta.anomalies {
                writeln!(err, "warning: {anomaly}")?;
            }
            out.write_all(render(&report, format)?.as_bytes())?;
            Ok(EXIT_OK)
        }
        Command::Sweep { dist: SweepDist::Binom { n, k, p_min, p_max, step, figure_exponent } } => {
            let spec = SweepSpec { n, k, p_min, p_max, step, figure_exponent };
            let rows = sweep_binom(&spec)?;
            write_csv(&rows, out)?;
            Ok(EXIT_OK)
        }
        Command::Verify { config } => {
            let config = load_config(config.as_deref())?;
            let verdicts = run_verify(&config)?;
            writeln!(out, "{}", verdicts_json(&verdicts)?)?;
            let failed: Vec<_> =
                verdicts.iter().filter(|v| !v.passed()).map(|v| v.inequality_id).collect();
            writeln!(err, "{}/{} suites passed", verdicts.len() - failed.len(), verdicts.len())?;
            if failed.is_empty() {
                Ok(EXIT_OK)
            } else {
                writeln!(err, "failed: {}", failed.join(", "))?;
                Ok(EXIT_FAILED)
            }
        }
    }
}

/// Parses `args` (including the program name) and runs the command, writing
/// data to `out` and diagnostics to `err`. Returns the process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let informational = matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion);
            let _ = if informational {
                write!(out, "{}", e.render())
            } else {
                write!(err, "{}", e.render())
            };
            return if informational { EXIT_OK } else { EXIT_USAGE };
        }
    };
    match dispatch(cli.command, out, err) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e:#}");
            EXIT_USAGE
        }
    }
}
