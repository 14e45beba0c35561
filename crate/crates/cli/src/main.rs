//! `cyclemix` — run the cyclic three-level mixing workflows from a JSON
//! config. Physics lives in the config file; flags only steer where the
//! results go.

mod config;
mod emit;
mod workflow;

use std::fmt;
use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::OutputFormat;

/// Exit code 2: the run never started (config, invocation, file plumbing).
/// Exit code 3: the physics failed (singular parameters, blow-up, no
/// steady state).
#[derive(Debug)]
pub enum Failure {
    Config(String),
    Numeric(String),
}

impl Failure {
    pub fn config(msg: impl Into<String>) -> Self {
        Failure::Config(msg.into())
    }

    pub fn numeric(msg: impl Into<String>) -> Self {
        Failure::Numeric(msg.into())
    }

    fn code(&self) -> u8 {
        match self {
            Failure::Config(_) => 2,
            Failure::Numeric(_) => 3,
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Config(msg) => write!(f, "{msg}"),
            Failure::Numeric(msg) => write!(f, "{msg}"),
        }
    }
}

#[derive(Parser)]
#[command(name = "cyclemix", version, about = "Cyclic three-level wave mixing workflows")]
struct Cli {
    /// Run configuration (JSON document).
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    /// Payload destination; overrides `output.path` from the config.
    #[arg(long, global = true, value_name = "PATH")]
    out: Option<PathBuf>,

    /// Payload format; overrides `output.format` (default: csv).
    #[arg(long, global = true, value_enum, value_name = "FORMAT")]
    format: Option<OutputFormat>,

    /// Suppress the run summary on stdout.
    #[arg(long, global = true)]
    quiet: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate the three coupled envelopes through the medium.
    Propagate,
    /// Probe absorption over a detuning grid.
    Spectrum,
    /// Compare perturbative coherences against the master-equation steady state.
    Validate,
    /// Peak conversion efficiencies over a parameter grid.
    Sweep,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            eprintln!("error: {failure}");
            ExitCode::from(failure.code())
        }
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    let path = cli
        .config
        .ok_or_else(|| Failure::config("--config <PATH> is required"))?;
    let text = fs::read_to_string(&path)
        .map_err(|e| Failure::config(format!("cannot read {}: {e}", path.display())))?;
    let cfg = config::parse_config(&text)?;

    let kind = match cli.command {
        Command::Propagate => workflow::Kind::Propagate,
        Command::Spectrum => workflow::Kind::Spectrum,
        Command::Validate => workflow::Kind::Validate,
        Command::Sweep => workflow::Kind::Sweep,
    };
    let outcome = workflow::run(&cfg, kind)?;

    let out = cli
        .out
        .or_else(|| cfg.output.as_ref().map(|o| PathBuf::from(&o.path)))
        .ok_or_else(|| Failure::config("no output path: pass --out or set output.path"))?;
    let format = cli
        .format
        .or_else(|| cfg.output.as_ref().and_then(|o| o.format))
        .unwrap_or(OutputFormat::Csv);

    let sidecar = emit::Sidecar {
        tool: "cyclemix",
        version: env!("CARGO_PKG_VERSION"),
        created: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
        units: emit::UNITS,
        workflow: outcome.workflow,
        format: format.name(),
        payload: out
            .file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_default(),
        config: &cfg,
        summary: &outcome.summary,
    };
    emit::emit(&out, format, &outcome.table, &sidecar)?;

    if !cli.quiet {
        println!(
            "{} -> {} (+ {})",
            outcome.line,
            out.display(),
            emit::sidecar_path(&out).display()
        );
    }
    Ok(())
}
