//! Batch front end for the `vrabi` simulator: `simulate`, `compare` and
//! `sweep`, each writing CSV, JSON and optional SVG files.

pub mod commands;
pub mod config;
pub mod error;
pub mod output;
pub mod svg;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use config::{ConfigFile, RunConfig};
pub use error::CliError;

#[derive(Debug, Parser)]
#[command(name = "vrabi", version, args_override_self = true, about = "Three-level V atom in a quantized mode, without the rotating-wave approximation")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evolve one configuration and write timeseries.csv
    Simulate(RunArgs),
    /// Run with and without the third level and write compare.csv and summary.json
    Compare(RunArgs),
    /// Scan g_ac/g_ab and omega_ac/omega_ab and write surface.csv
    Sweep(RunArgs),
}

#[derive(Debug, Clone, Args)]
pub struct RunArgs {
    /// JSON config file; flags override its keys
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub g_ab: Option<f64>,
    #[arg(long)]
    pub g_ac: Option<f64>,
    /// omega_ac in units of omega_ab
    #[arg(long)]
    pub w_ac: Option<f64>,
    /// Field frequency in units of omega_ab
    #[arg(long)]
    pub w0: Option<f64>,
    #[arg(long)]
    pub nbar: Option<f64>,
    #[arg(long)]
    pub nmax: Option<usize>,
    #[arg(long)]
    pub dt: Option<f64>,
    #[arg(long)]
    pub t_end: Option<f64>,
    #[arg(long)]
    pub sample_every: Option<f64>,
    /// Sweep worker threads (0 = all cores)
    #[arg(long)]
    pub workers: Option<usize>,
    /// Comma-separated g_ac/g_ab values for sweep
    #[arg(long, value_delimiter = ',')]
    pub ratios: Option<Vec<f64>>,
    /// Comma-separated omega_ac/omega_ab values for sweep
    #[arg(long, value_delimiter = ',')]
    pub placements: Option<Vec<f64>>,
    /// Also write SVG plots
    #[arg(long)]
    pub svg: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

impl RunArgs {
    fn as_overrides(&self) -> ConfigFile {
        ConfigFile {
            g_ab: self.g_ab,
            g_ac: self.g_ac,
            omega_ac: self.w_ac,
            omega_0: self.w0,
            n_bar: self.nbar,
            n_max: self.nmax,
            dt: self.dt,
            t_end: self.t_end,
            sample_every: self.sample_every,
            workers: self.workers,
            ratios: self.ratios.clone(),
            placements: self.placements.clone(),
            emit_svg: self.svg.then_some(true),
            output_dir: self.out.clone(),
            ..Default::default()
        }
    }

    pub fn resolve(&self) -> Result<RunConfig, CliError> {
        let base = match &self.config {
            Some(path) => ConfigFile::load(path)?,
            None => ConfigFile::default(),
        };
        RunConfig::resolve(base.overlay(self.as_overrides()))
    }
}

pub fn run(cli: &Cli) -> Result<Vec<PathBuf>, CliError> {
    match &cli.command {
        Command::Simulate(args) => commands::cmd_simulate(&args.resolve()?),
        Command::Compare(args) => commands::cmd_compare(&args.resolve()?),
        Command::Sweep(args) => commands::cmd_sweep(&args.resolve()?),
    }
}
