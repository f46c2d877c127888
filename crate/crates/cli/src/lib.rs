//! Command-line front end: configuration, presets, orchestration and
//! deterministic CSV/JSON/SVG artifacts with a hashed manifest.

pub mod commands;
pub mod config;
pub mod error;
pub mod output;
pub mod svg;

use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};

use crate::config::{ExperimentConfig, Format, Overrides, Resolved};
use crate::error::{CliError, CliResult};
use crate::output::{sha256_hex, Manifest, OutputDir};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FormatArg {
    Csv,
    Json,
}

#[derive(Debug, Parser)]
#[command(name = "rydmag", version, about = "Rydberg-dressed spin-chain simulator")]
pub struct Cli {
    /// TOML experiment configuration (frequencies as f/2π in MHz).
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Start from a named preset.
    #[arg(long, global = true, value_name = "NAME")]
    pub preset: Option<String>,
    /// Output directory.
    #[arg(long, global = true, value_name = "DIR", default_value = "rydmag-out")]
    pub out: PathBuf,
    /// Master seed for disorder, initialisation and shot sampling.
    #[arg(long, global = true, value_name = "U64")]
    pub seed: Option<u64>,
    /// Shots per output time (0 disables sampling).
    #[arg(long, global = true, value_name = "N")]
    pub shots: Option<usize>,
    /// Positional-disorder realisations to average.
    #[arg(long, global = true, value_name = "N")]
    pub disorder_samples: Option<usize>,
    /// Worker threads for the simulation pool.
    #[arg(long, global = true, value_name = "N")]
    pub threads: Option<usize>,
    /// Table format.
    #[arg(long, global = true, value_enum)]
    pub format: Option<FormatArg>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Dressed exchange J(r) for both detuning signs.
    Potential,
    /// Rydberg densities and mean-square displacement of a quench.
    Walk,
    /// Two-magnon spectrum and bound-state wavefunctions.
    Bands,
    /// Pair correlators and participation ratios.
    Pair,
    /// Effective-model coefficient tables and anisotropies.
    Coeffs,
    /// Oracle and invariant self-checks.
    Verify,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Potential => "potential",
            Command::Walk => "walk",
            Command::Bands => "bands",
            Command::Pair => "pair",
            Command::Coeffs => "coeffs",
            Command::Verify => "verify",
        }
    }
}

/// State shared by one subcommand invocation.
pub struct Context {
    pub resolved: Option<Resolved>,
    pub out: OutputDir,
    /// Lines for standard output.
    pub summary: Vec<String>,
}

impl Context {
    pub fn require(&self) -> CliResult<&Resolved> {
        self.resolved
            .as_ref()
            .ok_or_else(|| CliError::Usage("this command needs --preset or --config".into()))
    }
}

#[derive(Debug)]
pub struct Outcome {
    pub manifest: Manifest,
    pub summary: Vec<String>,
    pub unit_echo: Vec<String>,
}

impl Cli {
    pub fn overrides(&self) -> Overrides {
        Overrides {
            preset: self.preset.clone(),
            seed: self.seed,
            shots: self.shots,
            disorder_samples: self.disorder_samples,
            format: self.format.map(|f| match f {
                FormatArg::Csv => Format::Csv,
                FormatArg::Json => Format::Json,
            }),
        }
    }

    pub fn resolve(&self) -> CliResult<Option<Resolved>> {
        let config = match &self.config {
            Some(p) => ExperimentConfig::load(p)?,
            None => ExperimentConfig::default(),
        };
        if self.config.is_none() && self.preset.is_none() {
            return Ok(None);
        }
        config.resolve(&self.overrides()).map(Some)
    }
}

/// Run one subcommand and write its artifacts. `echo` receives the unit
/// interpretation of the configuration before any computation starts.
pub fn run(cli: &Cli, echo: &mut dyn FnMut(&str)) -> CliResult<Outcome> {
    if cli.threads == Some(0) {
        return Err(CliError::Usage("--threads must be at least 1".into()));
    }
    let resolved = cli.resolve()?;
    let format = resolved
        .as_ref()
        .map(|r| r.format)
        .or(cli.overrides().format)
        .unwrap_or_default();
    let unit_echo = resolved.as_ref().map(Resolved::unit_echo).unwrap_or_default();
    unit_echo.iter().for_each(|l| echo(l));
    let mut ctx = Context {
        resolved,
        out: OutputDir::create(&cli.out, format)?,
        summary: Vec::new(),
    };
    let config_bytes = match &ctx.resolved {
        Some(r) => {
            let mut b = serde_json::to_vec_pretty(r).expect("resolved config serialises");
            b.push(b'\n');
            ctx.out.write("config.resolved.json", "config", &b)?;
            b
        }
        None => b"null\n".to_vec(),
    };

    let work = |ctx: &mut Context| match cli.command {
        Command::Potential => commands::potential::run(ctx),
        Command::Walk => commands::walk::run(ctx),
        Command::Bands => commands::bands::run(ctx),
        Command::Pair => commands::pair::run(ctx),
        Command::Coeffs => commands::coeffs::run(ctx),
        Command::Verify => commands::verify::run(ctx),
    };
    match cli.threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| CliError::Usage(format!("cannot build thread pool: {e}")))?
            .install(|| work(&mut ctx))?,
        None => work(&mut ctx)?,
    }

    let (preset, seed) = match &ctx.resolved {
        Some(r) => (r.spec.name.clone(), r.settings.seed),
        None => (None, cli.seed.unwrap_or(0)),
    };
    let summary = std::mem::take(&mut ctx.summary);
    let manifest = ctx.out.finish(cli.command.name(), preset, seed, sha256_hex(&config_bytes))?;
    Ok(Outcome {
        manifest,
        summary,
        unit_echo,
    })
}
