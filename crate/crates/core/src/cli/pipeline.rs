//! End-to-end run: modes → loss budget of one mode, readout, coherence and
//! thermal reports under one output directory with a shared manifest.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::commands::{
    analyze_all, coherence_outputs, default_spacing, load_materials, load_payload, loss_budget, modes_outputs,
    parse_truths, render_loss, render_readout, render_thermal, synth_datasets,
};
use super::io::Outputs;
use super::manifest::{derive_seed, ManifestBuilder};
use super::plot::{emit_plot_data, PlotKind, Report};
use super::specs::{BootstrapSpec, PearsonSpec};
use super::{resolve_seed, Format, PipelineArgs, DEFAULT_BANDS};
use crate::cavity::{parse_geometry, SolverConfig};
use crate::coherence::{load_coherence_data, synth_ensemble, EnsembleSpec, DEFAULT_R2_THRESHOLD};
use crate::error::{read_to_string, Error, Result};
use crate::loss::parse_channels;
use crate::readout::BudgetOptions;
use crate::thermal::evaluate_payload;
use crate::units::{parse_compact, Dimension};

const DEMO_CAVITY: &str = include_str!("../../data/demo/cavity.txt");
const DEMO_CHANNELS: &str = include_str!("../../data/demo/channels.txt");
const DEMO_TRUTH: &str = include_str!("../../data/demo/readout_truth.toml");

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ModesSection {
    pub geometry: Option<PathBuf>,
    pub materials: Option<PathBuf>,
    /// Length with unit; the `modes` default when absent.
    pub spacing: Option<String>,
    pub n_modes: usize,
    pub bands: String,
    pub wafer_material: String,
}

impl Default for ModesSection {
    fn default() -> Self {
        Self {
            geometry: None,
            materials: None,
            spacing: None,
            n_modes: 8,
            bands: DEFAULT_BANDS.into(),
            wafer_material: "sapphire".into(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LossSection {
    pub channels: Option<PathBuf>,
    /// 1-based index into the solved spectrum.
    pub mode: usize,
    pub report: Format,
}

impl Default for LossSection {
    fn default() -> Self {
        Self {
            channels: None,
            mode: 1,
            report: Format::Csv,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ReadoutSection {
    pub truth: Option<PathBuf>,
    pub report: Format,
}

impl Default for ReadoutSection {
    fn default() -> Self {
        Self {
            truth: None,
            report: Format::Csv,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CoherenceSection {
    /// Measured wafer map; the synthetic ensemble when absent.
    pub wafer: Option<PathBuf>,
    pub decays: Option<PathBuf>,
    pub ensemble: EnsembleSpec,
    pub r2: f64,
    pub bootstrap: Option<String>,
    pub pearson: Option<String>,
    pub radial_bins: usize,
}

impl Default for CoherenceSection {
    fn default() -> Self {
        Self {
            wafer: None,
            decays: None,
            ensemble: EnsembleSpec::default(),
            r2: DEFAULT_R2_THRESHOLD,
            bootstrap: None,
            pearson: Some("observable=t1,t2e".into()),
            radial_bins: 5,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ThermalSection {
    pub preset: String,
    pub payload: Option<PathBuf>,
    pub report: Format,
}

impl Default for ThermalSection {
    fn default() -> Self {
        Self {
            preset: "qpu_mode".into(),
            payload: None,
            report: Format::Csv,
        }
    }
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PipelineConfig {
    pub modes: ModesSection,
    pub loss: LossSection,
    pub readout: ReadoutSection,
    pub coherence: CoherenceSection,
    pub thermal: ThermalSection,
}

impl PipelineConfig {
    pub fn parse(text: &str, ctx: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::parse(ctx, 0, e.to_string()))
    }

    fn paths(&mut self) -> [&mut Option<PathBuf>; 7] {
        [
            &mut self.modes.geometry,
            &mut self.modes.materials,
            &mut self.loss.channels,
            &mut self.readout.truth,
            &mut self.coherence.wafer,
            &mut self.coherence.decays,
            &mut self.thermal.payload,
        ]
    }

    /// Makes relative paths relative to `base`.
    fn rebase(&mut self, base: &Path) {
        for p in self.paths().into_iter().flatten() {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
    }
}

/// File contents, or the bundled text when no path is configured.
fn input(path: Option<&Path>, bundled: &'static str, label: &str, mb: &mut ManifestBuilder) -> Result<(String, String)> {
    match path {
        Some(p) => {
            mb.file(p)?;
            Ok((read_to_string(p)?, p.display().to_string()))
        }
        None => {
            let ctx = format!("bundled:{label}");
            mb.text(&ctx, bundled);
            Ok((bundled.to_string(), ctx))
        }
    }
}

pub(crate) fn pipeline(args: &PipelineArgs, seed: Option<u64>) -> Result<()> {
    let mut mb = ManifestBuilder::new("pipeline");
    let config = match &args.config {
        Some(p) => {
            mb.file(p)?;
            let mut c = PipelineConfig::parse(&read_to_string(p)?, &p.display().to_string())?;
            c.rebase(p.parent().unwrap_or(Path::new(".")));
            c
        }
        None => PipelineConfig::default(),
    };

    let (text, ctx) = input(config.modes.geometry.as_deref(), DEMO_CAVITY, "cavity.txt", &mut mb)?;
    let geometry = parse_geometry(&text, &ctx)?;
    let materials = load_materials(config.modes.materials.as_deref(), &mut mb)?;
    let (text, ctx) = input(config.loss.channels.as_deref(), DEMO_CHANNELS, "channels.txt", &mut mb)?;
    let channels = parse_channels(&text, &ctx)?;
    let (text, ctx) = input(config.readout.truth.as_deref(), DEMO_TRUTH, "readout_truth.toml", &mut mb)?;
    let truths = parse_truths(&text, &ctx)?;
    if let Some(w) = &config.coherence.wafer {
        mb.file(w)?;
    }
    if let Some(d) = &config.coherence.decays {
        mb.file(d)?;
    }
    let payload = load_payload(config.thermal.payload.as_deref(), Some(&config.thermal.preset), &mut mb)?;

    let spacing = match &config.modes.spacing {
        Some(s) => parse_compact(s, Dimension::Length)?,
        None => default_spacing(&geometry),
    };
    let mut solver = SolverConfig::new(spacing, config.modes.n_modes);
    solver.wafer_material = config.modes.wafer_material.clone();
    let bootstrap = config
        .coherence
        .bootstrap
        .as_deref()
        .map_or_else(|| Ok(BootstrapSpec::default()), BootstrapSpec::parse)?;
    let pearson = config
        .coherence
        .pearson
        .as_deref()
        .map_or_else(|| Ok(PearsonSpec::default()), PearsonSpec::parse)?;
    if !(1..=config.modes.n_modes).contains(&config.loss.mode) {
        return Err(Error::invalid(
            "pipeline config",
            format!("loss.mode {} outside 1..={}", config.loss.mode, config.modes.n_modes),
        ));
    }

    // Paths were hashed with their contents; keep them out of the options
    // so that moving the inputs does not change the hash.
    let mut hashed = config.clone();
    hashed.paths().into_iter().for_each(|p| *p = None);
    mb.options(&(&hashed, &solver))?;
    let seed = resolve_seed(seed);
    let manifest = mb.finish(Some(seed));

    let dir = &args.out;
    let mut out = Outputs::default();

    let modes = modes_outputs(
        &geometry,
        &materials,
        &solver,
        &config.modes.bands,
        false,
        &manifest,
        &dir.join("modes"),
        &mut out,
    )?;
    let mode = &modes.modes[config.loss.mode - 1];
    out.add(
        dir.join("modes").join(format!("{}.field", mode.label)),
        manifest.preamble() + &crate::field::write_field_grid(&mode.field),
    );

    let budget = loss_budget(&mode.field, &channels, &materials, mode.frequency)?;
    let ext = |f: Format| if f == Format::Csv { "csv" } else { "json" };
    out.add(dir.join(format!("loss.{}", ext(config.loss.report))), render_loss(&budget, config.loss.report, &manifest)?);
    for f in emit_plot_data(&Report::Loss(&budget), PlotKind::Loss)? {
        out.add(dir.join(f.name), manifest.embed_csv(&f.csv));
    }
    eprintln!("{} at {:.4} GHz: total Q {:.4e}", mode.label, mode.frequency / 1e9, budget.total_q);

    let datasets = synth_datasets(&truths, derive_seed(seed, "pipeline/readout"))?;
    let rows = analyze_all(&datasets, &BTreeMap::new(), BudgetOptions::default())?;
    out.add(
        dir.join(format!("readout.{}", ext(config.readout.report))),
        render_readout(&rows, config.readout.report, &manifest)?,
    );
    for f in emit_plot_data(&Report::Readout(&rows), PlotKind::Readout)? {
        out.add(dir.join(f.name), manifest.embed_csv(&f.csv));
    }

    let c = &config.coherence;
    let records = match &c.wafer {
        Some(w) => load_coherence_data(w, c.decays.as_deref(), c.ensemble.wafer_radius)?,
        None => synth_ensemble(&c.ensemble, derive_seed(seed, "pipeline/ensemble"))?,
    };
    coherence_outputs(
        &records,
        c.r2,
        &bootstrap,
        &pearson,
        c.radial_bins,
        derive_seed(seed, "pipeline/coherence"),
        &manifest,
        &dir.join("coherence"),
        &mut out,
    )?;

    let loads = evaluate_payload(&payload)?;
    out.add(
        dir.join(format!("thermal.{}", ext(config.thermal.report))),
        render_thermal(&payload, &loads, config.thermal.report, &manifest)?,
    );
    for f in emit_plot_data(&Report::Thermal(&loads), PlotKind::Thermal)? {
        out.add(dir.join(f.name), manifest.embed_csv(&f.csv));
    }

    out.add(dir.join("manifest.json"), serde_json::to_string_pretty(&manifest)? + "\n");
    let written = out.commit()?;
    eprintln!("wrote {} files under {}", written.len(), dir.display());
    Ok(())
}
