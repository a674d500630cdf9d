//! `nrsector`: seeded verification suites for sector bounds of the `L^p`
//! numerical range, with JSON reports and CSV plot data.
//!
//! Exit status: 0 when every check passes, 1 when a check fails, 2 on
//! usage or input errors.

mod commands;
mod error;
mod generators;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use error::CliError;
use report::{Report, SCHEMA_VERSION};

#[derive(Parser)]
#[command(name = "nrsector", version, about = "Verify sector bounds for the L^p numerical range of symmetric semigroup generators")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Exponent p in (1, 1000].
    #[arg(long, global = true, default_value_t = 4.0)]
    p: f64,

    /// Number of partition blocks (certificate, compress), capped at the generator size.
    #[arg(long, global = true, default_value_t = 4)]
    n: usize,

    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    /// Sample count, or grid size for lemma3.
    #[arg(long, global = true, default_value_t = 10_000)]
    samples: usize,

    /// Multistart restarts for searches and norm estimates.
    #[arg(long, global = true, default_value_t = 8)]
    restarts: usize,

    /// Time for certificate and compress.
    #[arg(long, global = true, default_value_t = 1.0)]
    t: f64,

    /// paper2x2, lambda:<re>,<im>, random:<n>[:<seed>], markov:<n>[:<seed>],
    /// laplacian:<file> or a JSON matrix file.
    #[arg(long = "gen", global = true, default_value = "paper2x2")]
    generator: String,

    /// Report path; stdout when absent.
    #[arg(long, global = true)]
    output: Option<PathBuf>,

    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,

    /// Write `null` for the wall time so identical runs give identical bytes.
    #[arg(long, global = true)]
    no_timing: bool,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Two-point form (w - z) conj(F(w) - F(z)) on random pairs.
    Lemma2,
    /// Angle of the quadratic form of diag(1, λ).
    Lemma3 {
        #[arg(long, default_value_t = 3.0)]
        lambda: f64,
    },
    /// Jacobian of the duality map against finite differences.
    Jacobian,
    /// Sampled numerical-range values of a generator.
    Range,
    /// Searches for the largest numerical-range angle.
    Sharpness,
    /// Step-function certificate for e^{-tA}.
    Certificate,
    /// Block compression of e^{-tA} and the reduction identity.
    Compress,
    /// p-norms of e^{-zA} over a polar grid of complex times.
    Sweep,
    /// Generator validation checks.
    Validate,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::Lemma2 => "lemma2",
            Command::Lemma3 { .. } => "lemma3",
            Command::Jacobian => "jacobian",
            Command::Range => "range",
            Command::Sharpness => "sharpness",
            Command::Certificate => "certificate",
            Command::Compress => "compress",
            Command::Sweep => "sweep",
            Command::Validate => "validate",
        }
    }
}

#[derive(ValueEnum, Clone, Copy, Serialize)]
#[serde(rename_all = "lowercase")]
enum Format {
    Json,
    Csv,
}

/// Echoed verbatim into every report.
#[derive(Serialize)]
pub(crate) struct RunConfig {
    pub command: &'static str,
    pub gen: String,
    pub p: f64,
    pub n: usize,
    pub seed: u64,
    pub samples: usize,
    pub restarts: usize,
    pub t: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    pub output: Option<String>,
    format: Format,
}

impl RunConfig {
    fn from_cli(cli: &Cli) -> Result<Self, CliError> {
        let lambda = match cli.command {
            Command::Lemma3 { lambda } => Some(lambda),
            _ => None,
        };
        let usage = |msg: String| Err(CliError::Usage(msg));
        if !(cli.p > 1.0 && cli.p <= 1000.0) {
            return usage(format!("--p must lie in (1, 1000], got {}", cli.p));
        }
        if !(1..=64).contains(&cli.n) {
            return usage(format!("--n must lie in 1..=64, got {}", cli.n));
        }
        if !(1..=10_000_000).contains(&cli.samples) {
            return usage(format!("--samples must lie in 1..=10000000, got {}", cli.samples));
        }
        if !(1..=10_000).contains(&cli.restarts) {
            return usage(format!("--restarts must lie in 1..=10000, got {}", cli.restarts));
        }
        if !(cli.t > 0.0 && cli.t <= 1e6) {
            return usage(format!("--t must lie in (0, 1e6], got {}", cli.t));
        }
        if let Some(l) = lambda {
            if !(l > 0.0 && l.is_finite()) {
                return usage(format!("--lambda must be positive, got {l}"));
            }
        }
        Ok(RunConfig {
            command: cli.command.name(),
            gen: cli.generator.clone(),
            p: cli.p,
            n: cli.n,
            seed: cli.seed,
            samples: cli.samples,
            restarts: cli.restarts,
            t: cli.t,
            lambda,
            output: cli.output.as_ref().map(|p| p.display().to_string()),
            format: cli.format,
        })
    }
}

fn init_threads() -> Result<(), CliError> {
    let Ok(raw) = std::env::var("NRSECTOR_THREADS") else { return Ok(()) };
    let threads: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&t| t > 0)
        .ok_or_else(|| CliError::Usage(format!("NRSECTOR_THREADS must be a positive integer, got '{raw}'")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| CliError::Usage(format!("cannot size thread pool: {e}")))
}

fn run(cli: &Cli) -> Result<bool, CliError> {
    init_threads()?;
    let cfg = RunConfig::from_cli(cli)?;
    let start = Instant::now();
    let outcome = match cli.command {
        Command::Lemma2 => commands::lemma2(&cfg),
        Command::Lemma3 { lambda } => commands::lemma3(&cfg, lambda),
        Command::Jacobian => commands::jacobian(&cfg),
        Command::Range => commands::range(&cfg),
        Command::Sharpness => commands::sharpness(&cfg),
        Command::Certificate => commands::certificate(&cfg),
        Command::Compress => commands::compress_cmd(&cfg),
        Command::Sweep => commands::sweep(&cfg),
        Command::Validate => commands::validate(&cfg),
    }?;
    let elapsed = start.elapsed().as_secs_f64();
    let passed = outcome.checks.iter().all(|c| c.passed);

    for c in &outcome.checks {
        eprintln!(
            "{} {:<24} worst {:.3e} (tol {:.0e})",
            if c.passed { "PASS" } else { "FAIL" },
            c.name,
            c.worst_defect,
            c.tolerance
        );
    }

    let bytes = match cli.format {
        Format::Json => {
            let report = Report {
                schema_version: SCHEMA_VERSION,
                tool: "nrsector",
                version: env!("CARGO_PKG_VERSION"),
                command: cfg.command,
                config: &cfg,
                seed: cfg.seed,
                wall_time_s: (!cli.no_timing).then_some(elapsed),
                passed,
                checks: &outcome.checks,
                result: &outcome.result,
            };
            let mut out = serde_json::to_vec_pretty(&report)?;
            out.push(b'\n');
            out
        }
        Format::Csv => outcome.table.to_bytes()?,
    };
    report::emit(cli.output.as_deref(), &bytes)?;
    Ok(passed)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("nrsector: {e}");
            ExitCode::from(2)
        }
    }
}
