//! `lambscan`: runs the emitter/nanosphere forward model and its inversions
//! from a TOML configuration and writes CSV/JSON data plus a manifest.

mod commands;
mod config;
mod error;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};

use crate::commands::Context;
use crate::config::RunConfig;
use crate::error::CliError;
use crate::output::{OutputDir, RunManifest, MANIFEST_SCHEMA};

#[derive(Debug, Parser)]
#[command(name = "lambscan", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// TOML run configuration; built-in defaults when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output directory [default: run.output_dir, else ./out].
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Worker threads [default: run.jobs, else all cores].
    #[arg(long, global = true)]
    jobs: Option<usize>,

    /// Seed for synthetic noise [default: run.seed].
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Drop the emitter Lamb shift from the spectra.
    #[arg(long, global = true)]
    no_lamb_shift: bool,
}

#[derive(Debug, Clone, Copy, Subcommand)]
enum Command {
    /// Drude permittivity, dipolar polarizability and the dipole mode.
    Material,
    /// Spectral densities J_n per multipole order at several gaps.
    Modes,
    /// Scattering and emission spectra at one geometry.
    Spectrum,
    /// Dip shift and emission peak along a gap, tilt or z-offset sweep.
    Sweep,
    /// 2D lateral dip-shift map.
    Scan,
    /// Recover gap, tilt or lateral position from observed data.
    Invert,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::Material => "material",
            Command::Modes => "modes",
            Command::Spectrum => "spectrum",
            Command::Sweep => "sweep",
            Command::Scan => "scan",
            Command::Invert => "invert",
        }
    }
}

fn run(cli: &Cli) -> Result<(), CliError> {
    let start = Instant::now();
    let config = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    config.validate()?;
    if cli.jobs == Some(0) {
        return Err(CliError::Validation {
            field: Some("--jobs".into()),
            message: "must be >= 1".into(),
        });
    }
    let jobs = cli
        .jobs
        .or(config.run.jobs)
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build_global()
        .map_err(|e| CliError::Numerical(format!("thread pool: {e}")))?;

    let seed = cli.seed.unwrap_or(config.run.seed);
    let lamb_shift = !cli.no_lamb_shift;
    let out_dir = cli
        .out
        .clone()
        .or_else(|| config.run.output_dir.clone())
        .unwrap_or_else(|| PathBuf::from("out"));
    let mut out = OutputDir::create(&out_dir)?;
    let ctx = Context {
        config: &config,
        lamb_shift,
        seed,
    };
    let summary = match cli.command {
        Command::Material => commands::material(&ctx, &mut out)?,
        Command::Modes => commands::modes(&ctx, &mut out)?,
        Command::Spectrum => commands::spectrum(&ctx, &mut out)?,
        Command::Sweep => commands::run_sweep(&ctx, &mut out)?,
        Command::Scan => commands::scan(&ctx, &mut out)?,
        Command::Invert => commands::invert(&ctx, &mut out)?,
    };
    let mut resolved = config.clone();
    resolved.run.seed = seed;
    let manifest = RunManifest {
        schema_version: MANIFEST_SCHEMA,
        tool: env!("CARGO_PKG_NAME"),
        version: env!("CARGO_PKG_VERSION"),
        subcommand: cli.command.name().to_string(),
        config_fingerprint: resolved.fingerprint(lamb_shift),
        seed,
        jobs,
        lamb_shift,
        wall_time_s: start.elapsed().as_secs_f64(),
        outputs: out.entries().to_vec(),
    };
    let root = out.root().to_path_buf();
    let manifest_path = out.finish(manifest)?;
    println!("{}: {summary}", cli.command.name());
    println!("wrote {} (manifest {})", root.display(), manifest_path.display());
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", e.to_json());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
