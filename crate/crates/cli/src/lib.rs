//! Config-driven front end for `ermakov-core`: simulate, linearize,
//! reconstruct and validate runs described in JSON.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod config;
pub mod output;
pub mod presets;

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use commands::{Outcome, Status};
use config::{ConfigError, Mode, RunConfig};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("invalid configuration: {0}")]
    Config(#[from] ConfigError),
    #[error("{0}")]
    Core(#[from] ermakov_core::Error),
    #[error("{context}: {source}")]
    Io {
        context: String,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 1,
            CliError::Core(_) | CliError::Io { .. } => 2,
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "ermakov",
    version,
    about = "Simulate and linearize generalized Ermakov systems"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Integrate the system directly and monitor the invariant.
    Simulate(Source),
    /// Sample the linear equation for psi = rho/r and its solution.
    Linearize(Source),
    /// Rebuild r(t), theta(t) from the linear equation and the time quadrature.
    Reconstruct(Source),
    /// Compare direct integration with the reconstruction.
    Validate(Source),
    /// Run the command named by the config's `mode` field.
    Run(Source),
    /// List the built-in presets.
    Presets,
}

#[derive(Debug, Args)]
pub struct Source {
    /// JSON run configuration.
    #[arg(long, conflicts_with = "preset", required_unless_present = "preset")]
    pub config: Option<PathBuf>,
    /// Built-in configuration (see `ermakov presets`).
    #[arg(long)]
    pub preset: Option<String>,
    /// Output directory; overrides the config's `output.dir`.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn load(source: &Source) -> Result<RunConfig, CliError> {
    let text = match (&source.config, &source.preset) {
        (Some(path), _) => fs::read_to_string(path).map_err(|e| CliError::Io {
            context: format!("reading {}", path.display()),
            source: e,
        })?,
        (None, Some(name)) => presets::get(name)
            .ok_or_else(|| {
                ConfigError::new(
                    "",
                    format!("unknown preset `{name}` (known: {})", presets::NAMES.join(", ")),
                )
            })?
            .to_string(),
        (None, None) => return Err(ConfigError::new("", "give --config or --preset").into()),
    };
    Ok(RunConfig::from_json(&text)?)
}

fn execute(mode: Mode, source: &Source) -> Result<Outcome, CliError> {
    let prep = load(source)?.prepare()?;
    let dir = source
        .out
        .clone()
        .or_else(|| prep.out_dir.clone())
        .unwrap_or_else(|| PathBuf::from("."));
    let out = output::prepare_dir(&dir).map_err(|e| CliError::Io {
        context: format!("creating {}", dir.display()),
        source: e,
    })?;
    match mode {
        Mode::Simulate => commands::simulate(&prep, &out),
        Mode::Linearize => commands::linearize(&prep, &out),
        Mode::Reconstruct => commands::reconstruct_cmd(&prep, &out),
        Mode::Validate => commands::validate(&prep, &out),
    }
}

/// Run a parsed command line, printing the summary or the error, and
/// return the exit status: 0 success, 1 invalid configuration or failed
/// validation, 2 runtime or domain error.
pub fn run(cli: Cli) -> ExitCode {
    let result = match &cli.command {
        Command::Presets => {
            for name in presets::NAMES {
                println!("{name}");
            }
            return ExitCode::SUCCESS;
        }
        Command::Simulate(s) => execute(Mode::Simulate, s),
        Command::Linearize(s) => execute(Mode::Linearize, s),
        Command::Reconstruct(s) => execute(Mode::Reconstruct, s),
        Command::Validate(s) => execute(Mode::Validate, s),
        Command::Run(s) => load(s).and_then(|cfg| {
            let mode = cfg
                .mode
                .ok_or_else(|| ConfigError::new("mode", "missing (required by `run`)"))?;
            execute(mode, s)
        }),
    };
    match result {
        Ok(outcome) => {
            println!("{}", serde_json::to_string_pretty(&outcome.summary).unwrap_or_default());
            ExitCode::from(match outcome.status {
                Status::Success => 0,
                Status::Failed => 1,
                Status::Incomplete => 2,
            })
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
