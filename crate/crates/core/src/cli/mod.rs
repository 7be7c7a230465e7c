//! The `qpack-lab` command line.
//!
//! Exit codes: 0 on success, 1 when a computation or input fails, 2 on a
//! usage error. Every report starts with the run manifest; outputs are
//! written only after all of them have been computed.

mod commands;
mod io;
mod manifest;
mod pipeline;
mod plot;
mod specs;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

pub use io::atomic_write;
pub use manifest::{derive_seed, ManifestBuilder, RunManifest};
pub use pipeline::PipelineConfig;
pub use plot::{emit_plot_data, PlotFile, PlotKind, Report};
pub use specs::{BootstrapSpec, PearsonSpec, Sizes};

use crate::units::{parse_compact, Dimension};

pub const DEFAULT_BANDS: &str = "4GHz:6GHz:qubit,9.5GHz:10.5GHz:readout";

#[derive(Debug, Parser)]
#[command(name = "qpack-lab", version, about = "Wafer-scale qubit package analysis")]
struct Cli {
    /// Worker threads; results do not depend on this.
    #[arg(long, global = true, value_parser = clap::value_parser!(u16).range(1..))]
    jobs: Option<u16>,
    /// Seed for every random draw; drawn from entropy and recorded when absent.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Box modes of a cavity geometry.
    Modes(ModesArgs),
    /// Participation-ratio loss budget of an exported mode field.
    Loss(LossArgs),
    /// Readout error budget from IQ shots.
    Readout(ReadoutArgs),
    /// Coherence statistics over a wafer.
    Coherence(CoherenceArgs),
    /// Cryostat heat loads and stage temperatures.
    Thermal(ThermalArgs),
    /// All of the above on one configuration, bundled demo data by default.
    Pipeline(PipelineArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, serde::Deserialize)]
/// Report encoding.
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

fn length(s: &str) -> Result<f64, String> {
    parse_compact(s, Dimension::Length).map_err(|e| e.to_string())
}

fn frequency(s: &str) -> Result<f64, String> {
    parse_compact(s, Dimension::Frequency).map_err(|e| e.to_string())
}

fn bands(s: &str) -> Result<String, String> {
    crate::cavity::parse_bands(s).map(|_| s.to_string()).map_err(|e| e.to_string())
}

#[derive(Debug, Args, Serialize)]
pub(crate) struct ModesArgs {
    #[arg(long)]
    #[serde(skip)]
    geometry: PathBuf,
    /// Material table; the bundled one when absent.
    #[arg(long)]
    #[serde(skip)]
    materials: Option<PathBuf>,
    #[arg(long, default_value_t = 16)]
    n_modes: usize,
    /// Grid spacing (`0.3mm`); defaults to radius/150, or a quarter of the
    /// smallest pillar radius if that is finer.
    #[arg(long, value_parser = length)]
    spacing: Option<f64>,
    /// `low:high[:label]` entries separated by commas.
    #[arg(long, default_value = DEFAULT_BANDS, value_parser = bands)]
    bands: String,
    /// Return the modes nearest this frequency instead of the lowest.
    #[arg(long, value_parser = frequency)]
    shift: Option<f64>,
    #[arg(long, default_value = "sapphire")]
    wafer_material: String,
    /// Skip the per-mode field files.
    #[arg(long)]
    no_fields: bool,
    #[arg(long, default_value = ".")]
    #[serde(skip)]
    out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub(crate) struct LossArgs {
    #[arg(long)]
    #[serde(skip)]
    field: PathBuf,
    #[arg(long)]
    #[serde(skip)]
    materials: Option<PathBuf>,
    #[arg(long)]
    #[serde(skip)]
    channels: PathBuf,
    /// Mode frequency (`4.5GHz`).
    #[arg(long, value_parser = frequency)]
    frequency: f64,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    report: Format,
    /// Report file; standard output when absent.
    #[arg(long)]
    #[serde(skip)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
#[command(group = clap::ArgGroup::new("source").required(true).args(["shots", "synth"]))]
pub(crate) struct ReadoutArgs {
    /// Shot CSV, or a directory of them, each with a `.meta` sidecar.
    #[arg(long)]
    #[serde(skip)]
    shots: Option<PathBuf>,
    /// TOML list of `[[qubit]]` truths to draw synthetic shots from.
    #[arg(long)]
    #[serde(skip)]
    synth: Option<PathBuf>,
    /// CSV `qubit_id,t1_s` overriding the sidecar T₁ values.
    #[arg(long)]
    #[serde(skip)]
    t1: Option<PathBuf>,
    /// Count the full ground-prepared excited fraction as the thermal term.
    #[arg(long)]
    unhalved_thermal: bool,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    report: Format,
    #[arg(long)]
    #[serde(skip)]
    out: Option<PathBuf>,
    /// Also save the synthetic shots (CSV plus sidecar).
    #[arg(long, requires = "synth")]
    #[serde(skip)]
    write_shots: Option<PathBuf>,
}

fn bootstrap_spec(s: &str) -> Result<BootstrapSpec, String> {
    BootstrapSpec::parse(s).map_err(|e| e.to_string())
}

fn pearson_spec(s: &str) -> Result<PearsonSpec, String> {
    PearsonSpec::parse(s).map_err(|e| e.to_string())
}

fn unit_interval(s: &str) -> Result<f64, String> {
    match s.parse::<f64>() {
        Ok(v) if (0.0..=1.0).contains(&v) => Ok(v),
        _ => Err(format!("`{s}` is not in [0, 1]")),
    }
}

#[derive(Debug, Args, Serialize)]
pub(crate) struct CoherenceArgs {
    /// Wafer map CSV.
    #[arg(long)]
    #[serde(skip)]
    wafer: PathBuf,
    /// Directory with `manifest.csv` and decay curves.
    #[arg(long)]
    #[serde(skip)]
    decays: Option<PathBuf>,
    /// Minimum R² for a decay fit to count.
    #[arg(long, default_value_t = crate::coherence::DEFAULT_R2_THRESHOLD, value_parser = unit_interval)]
    r2: f64,
    /// e.g. `sizes=all,resamples=2000,conf=50,90,99,stat=median,min`.
    #[arg(long, value_parser = bootstrap_spec)]
    bootstrap: Option<BootstrapSpec>,
    /// e.g. `observable=t1,t2e,bins=10`.
    #[arg(long, value_parser = pearson_spec)]
    pearson: Option<PearsonSpec>,
    #[arg(long, default_value = "38.1mm", value_parser = length)]
    wafer_radius: f64,
    #[arg(long, default_value_t = 5)]
    radial_bins: usize,
    /// Output directory.
    #[arg(long)]
    #[serde(skip)]
    report: PathBuf,
}

#[derive(Debug, Args, Serialize)]
#[command(group = clap::ArgGroup::new("source").required(true).args(["payload", "mode"]))]
pub(crate) struct ThermalArgs {
    #[arg(long)]
    #[serde(skip)]
    payload: Option<PathBuf>,
    /// Bundled payload preset.
    #[arg(long, value_parser = clap::builder::PossibleValuesParser::new(crate::thermal::PRESETS))]
    mode: Option<String>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    report: Format,
    #[arg(long)]
    #[serde(skip)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub(crate) struct PipelineArgs {
    /// TOML configuration; every section is optional.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
}

/// Resolves the run seed, recording an entropy draw when none was given.
pub(crate) fn resolve_seed(seed: Option<u64>) -> u64 {
    seed.unwrap_or_else(|| {
        let s: u64 = rand::random();
        eprintln!("seed {s} (drawn from entropy; pass --seed {s} to repeat)");
        s
    })
}

/// Parses `args` (program name first) and runs the subcommand, returning
/// the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let pool = match rayon::ThreadPoolBuilder::new()
        .num_threads(cli.jobs.map_or(0, usize::from))
        .build()
    {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: thread pool: {e}");
            return 1;
        }
    };
    let seed = cli.seed;
    let result = pool.install(|| match &cli.command {
        Command::Modes(a) => commands::modes(a, seed),
        Command::Loss(a) => commands::loss(a, seed),
        Command::Readout(a) => commands::readout(a, seed),
        Command::Coherence(a) => commands::coherence(a, seed),
        Command::Thermal(a) => commands::thermal(a, seed),
        Command::Pipeline(a) => pipeline::pipeline(a, seed),
    });
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}
