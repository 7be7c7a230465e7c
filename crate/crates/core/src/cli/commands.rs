use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::io::Outputs;
use super::manifest::{derive_seed, ManifestBuilder, RunManifest};
use super::plot::{emit_plot_data, PlotKind, Report};
use super::specs::{BootstrapSpec, PearsonSpec};
use super::{resolve_seed, CoherenceArgs, Format, LossArgs, ModesArgs, ReadoutArgs, ThermalArgs};
use crate::cavity::{mode_report, parse_bands, solve_modes, ModeSpectrum, SolverConfig};
use crate::coherence::{
    bootstrap_csv, bootstrap_statistic, correlation_csv, load_coherence_data, observable_values, pearson_spatial,
    radial_profile_of, Observable, QubitRecord, Statistic,
};
use crate::error::{read_to_string, Error, Result};
use crate::field::{write_field_grid, CavityGeometry, FieldGrid, MaterialTable};
use crate::loss::{assemble_budget, budget_to_csv, budget_to_json, evaluate_channels, ChannelDecl, QBudget};
use crate::readout::{
    analyze_readout, load_shots, readout_csv, synth_shots, write_shots, write_sidecar, BudgetOptions, IQDataset,
    QubitReadout, SynthTruth,
};
use crate::thermal::{evaluate_payload, headroom, load_report_csv, Headroom, LoadReport, Payload};

/// Relative-error level at which bootstrap crossings are summarised.
pub(crate) const CROSSING_THRESHOLD: f64 = 0.2;

fn plot_files(out: &mut Outputs, dir: &Path, manifest: &RunManifest, report: Report<'_>, kind: PlotKind) -> Result<()> {
    for f in emit_plot_data(&report, kind)? {
        out.add(dir.join(f.name), manifest.embed_csv(&f.csv));
    }
    Ok(())
}

fn finish(out: Outputs) -> Result<()> {
    for path in out.commit()? {
        eprintln!("wrote {}", path.display());
    }
    Ok(())
}

/// A single report goes to `path`, or to standard output.
fn emit_single(path: Option<&Path>, contents: String) -> Result<()> {
    match path {
        Some(p) => {
            let mut out = Outputs::default();
            out.add(p, contents);
            finish(out)
        }
        None => {
            print!("{contents}");
            Ok(())
        }
    }
}

pub(crate) fn load_materials(path: Option<&Path>, mb: &mut ManifestBuilder) -> Result<MaterialTable> {
    match path {
        Some(p) => {
            mb.file(p)?;
            MaterialTable::load(p)
        }
        None => Ok(MaterialTable::bundled()),
    }
}

pub(crate) fn default_spacing(geometry: &CavityGeometry) -> f64 {
    let coarse = geometry.radius() / 150.0;
    geometry
        .pillars()
        .iter()
        .map(|p| p.radius / 4.0)
        .fold(coarse, f64::min)
}

/// Solves, then queues the spectrum, its plot table and (optionally) one
/// field file per mode under `dir`.
pub(crate) fn modes_outputs(
    geometry: &CavityGeometry,
    materials: &MaterialTable,
    config: &SolverConfig,
    bands: &str,
    fields: bool,
    manifest: &RunManifest,
    dir: &Path,
    out: &mut Outputs,
) -> Result<ModeSpectrum> {
    let spectrum = solve_modes(geometry, materials, config)?;
    let report = mode_report(&spectrum, &parse_bands(bands)?)?;
    out.add(dir.join("spectrum.csv"), manifest.embed_csv(&report.to_csv()?));
    plot_files(out, dir, manifest, Report::Spectrum(&report), PlotKind::Spectrum)?;
    if fields {
        for mode in &spectrum.modes {
            if !mode.is_normalized_to(1.0, 1e-9) {
                return Err(Error::Domain(format!("mode `{}` is not normalized to 1 J", mode.label)));
            }
            out.add(
                dir.join(format!("{}.field", mode.label)),
                manifest.preamble() + &write_field_grid(&mode.field),
            );
        }
    }
    eprintln!(
        "{} modes, fundamental {:.4} GHz, {} collisions, valid below {:.2} GHz",
        report.rows.len(),
        spectrum.fundamental().unwrap_or(f64::NAN) / 1e9,
        report.collisions,
        report.validity_ceiling_hz / 1e9
    );
    Ok(spectrum)
}

pub(crate) fn modes(args: &ModesArgs, seed: Option<u64>) -> Result<()> {
    let mut mb = ManifestBuilder::new("modes");
    mb.file(&args.geometry)?;
    let geometry = crate::cavity::load_geometry(&args.geometry)?;
    let materials = load_materials(args.materials.as_deref(), &mut mb)?;
    let mut config = SolverConfig::new(args.spacing.unwrap_or_else(|| default_spacing(&geometry)), args.n_modes);
    config.shift = args.shift.unwrap_or(0.0);
    config.wafer_material = args.wafer_material.clone();
    mb.options(&(args, &config))?;
    let manifest = mb.finish(seed);
    let mut out = Outputs::default();
    modes_outputs(&geometry, &materials, &config, &args.bands, !args.no_fields, &manifest, &args.out, &mut out)?;
    finish(out)
}

pub(crate) fn loss_budget(
    field: &FieldGrid,
    decls: &[ChannelDecl],
    materials: &MaterialTable,
    frequency: f64,
) -> Result<QBudget> {
    let channels = evaluate_channels(field, decls, materials, frequency)?;
    assemble_budget(&channels, materials, frequency)
}

pub(crate) fn render_loss(budget: &QBudget, format: Format, manifest: &RunManifest) -> Result<String> {
    match format {
        Format::Csv => Ok(manifest.embed_csv(&budget_to_csv(budget)?)),
        Format::Json => manifest.embed_json(budget_to_json(budget)?),
    }
}

pub(crate) fn loss(args: &LossArgs, seed: Option<u64>) -> Result<()> {
    let mut mb = ManifestBuilder::new("loss");
    mb.file(&args.field)?;
    mb.file(&args.channels)?;
    let field = crate::field::load_field_grid(&args.field)?;
    let decls = crate::loss::load_channels(&args.channels)?;
    let materials = load_materials(args.materials.as_deref(), &mut mb)?;
    mb.options(args)?;
    let manifest = mb.finish(seed);
    let budget = loss_budget(&field, &decls, &materials, args.frequency)?;
    eprintln!("total Q {:.4e}, T1 limit {:.4e} s", budget.total_q, budget.t1_limit);
    emit_single(args.out.as_deref(), render_loss(&budget, args.report, &manifest)?)
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub(crate) struct TruthFile {
    pub qubit: Vec<SynthTruth>,
}

pub(crate) fn parse_truths(text: &str, ctx: &str) -> Result<Vec<SynthTruth>> {
    let file: TruthFile = toml::from_str(text).map_err(|e| Error::parse(ctx, 0, e.to_string()))?;
    if file.qubit.is_empty() {
        return Err(Error::invalid("synthetic truth", format!("{ctx}: no [[qubit]] entries")));
    }
    Ok(file.qubit)
}

/// Draws each qubit from its own seed derived from the run seed and the
/// qubit id.
pub(crate) fn synth_datasets(truths: &[SynthTruth], seed: u64) -> Result<Vec<IQDataset>> {
    truths
        .par_iter()
        .map(|t| synth_shots(t, derive_seed(seed, &format!("readout/{}", t.qubit_id))))
        .collect()
}

fn load_t1_table(path: &Path) -> Result<BTreeMap<String, f64>> {
    #[derive(Deserialize)]
    struct Row {
        qubit_id: String,
        t1_s: f64,
    }
    let text = read_to_string(path)?;
    let mut table = BTreeMap::new();
    for row in csv::Reader::from_reader(text.as_bytes()).deserialize() {
        let row: Row = row?;
        if !(row.t1_s > 0.0 && row.t1_s.is_finite()) {
            return Err(Error::invalid("t1", format!("{}: {} s", row.qubit_id, row.t1_s)));
        }
        table.insert(row.qubit_id, row.t1_s);
    }
    Ok(table)
}

fn shot_files(path: &Path) -> Result<Vec<PathBuf>> {
    if !path.is_dir() {
        return Ok(vec![path.to_path_buf()]);
    }
    let mut files: Vec<PathBuf> = std::fs::read_dir(path)
        .map_err(|e| Error::io(path, e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "csv"))
        .collect();
    files.sort();
    if files.is_empty() {
        return Err(Error::invalid("shots", format!("no .csv files in {}", path.display())));
    }
    Ok(files)
}

pub(crate) fn analyze_all(
    datasets: &[IQDataset],
    t1: &BTreeMap<String, f64>,
    options: BudgetOptions,
) -> Result<Vec<QubitReadout>> {
    datasets
        .par_iter()
        .map(|ds| {
            analyze_readout(ds, t1.get(&ds.qubit_id).copied(), options)
                .map_err(|e| Error::Domain(format!("qubit {}: {e}", ds.qubit_id)))
        })
        .collect()
}

pub(crate) fn render_readout(rows: &[QubitReadout], format: Format, manifest: &RunManifest) -> Result<String> {
    match format {
        Format::Csv => Ok(manifest.embed_csv(&readout_csv(rows)?)),
        Format::Json => manifest.embed_json(serde_json::to_value(rows)?),
    }
}

pub(crate) fn readout(args: &ReadoutArgs, seed: Option<u64>) -> Result<()> {
    let mut mb = ManifestBuilder::new("readout");
    let mut used_seed = None;
    let datasets = match (&args.shots, &args.synth) {
        (Some(path), _) => {
            let mut all = Vec::new();
            for f in shot_files(path)? {
                mb.file(&f)?;
                mb.file(&crate::readout::sidecar_path(&f))?;
                all.extend(load_shots(&f)?);
            }
            all
        }
        (None, Some(path)) => {
            mb.file(path)?;
            let truths = parse_truths(&read_to_string(path)?, &path.display().to_string())?;
            let s = resolve_seed(seed);
            used_seed = Some(s);
            synth_datasets(&truths, s)?
        }
        (None, None) => unreachable!("clap requires one source"),
    };
    let t1 = match &args.t1 {
        Some(p) => {
            mb.file(p)?;
            load_t1_table(p)?
        }
        None => BTreeMap::new(),
    };
    mb.options(args)?;
    let manifest = mb.finish(used_seed.or(seed));
    let options = BudgetOptions {
        halve_thermal: !args.unhalved_thermal,
    };
    let rows = analyze_all(&datasets, &t1, options)?;
    for r in &rows {
        eprintln!("{}: readout error {:.3}%", r.qubit_id, 100.0 * r.budget.measured_error);
    }
    if let Some(path) = &args.write_shots {
        let mut out = Outputs::default();
        out.add(path, write_shots(&datasets)?);
        out.add(crate::readout::sidecar_path(path), write_sidecar(&datasets));
        finish(out)?;
    }
    emit_single(args.out.as_deref(), render_readout(&rows, args.report, &manifest)?)
}

#[derive(Debug, Serialize)]
pub(crate) struct Crossing {
    pub quantity: Observable,
    pub statistic: Statistic,
    pub confidence: f64,
    pub threshold: f64,
    pub size: Option<usize>,
}

#[derive(Debug, Serialize)]
pub(crate) struct CoherenceSummary {
    pub qubits: usize,
    pub measured_t1: usize,
    pub measured_t2e: usize,
    pub median_t1: Option<f64>,
    pub median_t2e: Option<f64>,
    pub crossings: Vec<Crossing>,
}

/// Queues the wafer map, histograms, bootstrap, correlation and radial
/// tables plus a JSON summary under `dir`.
#[allow(clippy::too_many_arguments)]
pub(crate) fn coherence_outputs(
    records: &[QubitRecord],
    r2: f64,
    bootstrap: &BootstrapSpec,
    pearson: &PearsonSpec,
    radial_bins: usize,
    seed: u64,
    manifest: &RunManifest,
    dir: &Path,
    out: &mut Outputs,
) -> Result<CoherenceSummary> {
    let wafer = Report::Wafer {
        records,
        r2_threshold: r2,
    };
    plot_files(out, dir, manifest, wafer, PlotKind::WaferMap)?;
    plot_files(out, dir, manifest, wafer, PlotKind::Histogram)?;

    let mut crossings = Vec::new();
    for &quantity in &bootstrap.quantities {
        let values: Vec<f64> = observable_values(records, quantity, r2).into_iter().map(|(_, v)| v).collect();
        if values.is_empty() {
            return Err(Error::Domain(format!("no accepted {quantity} values to bootstrap")));
        }
        let config = bootstrap.config(values.len(), derive_seed(seed, &format!("bootstrap/{quantity}")));
        for &stat in &bootstrap.statistics {
            let result = bootstrap_statistic(&values, stat, &config)?;
            out.add(
                dir.join(format!("bootstrap_{quantity}_{stat}.csv")),
                manifest.embed_csv(&bootstrap_csv(&result)?),
            );
            for f in emit_plot_data(&Report::Bootstrap(&result), PlotKind::Bootstrap)? {
                out.add(dir.join(format!("plot_bootstrap_{quantity}_{stat}.csv")), manifest.embed_csv(&f.csv));
            }
            for &confidence in &config.confidences {
                crossings.push(Crossing {
                    quantity,
                    statistic: stat,
                    confidence,
                    threshold: CROSSING_THRESHOLD,
                    size: result.crossing_size(confidence, CROSSING_THRESHOLD),
                });
            }
        }
    }

    for &obs in &pearson.observables {
        let c = pearson_spatial(records, obs, &pearson.config(r2, derive_seed(seed, &format!("pearson/{obs}"))))?;
        out.add(dir.join(format!("correlation_{obs}.csv")), manifest.embed_csv(&correlation_csv(&c)?));
        plot_files(out, dir, manifest, Report::Correlation(&c), PlotKind::Correlation)?;
    }

    for obs in [Observable::T1, Observable::T2e] {
        if observable_values(records, obs, r2).is_empty() {
            continue;
        }
        let profile = radial_profile_of(records, obs, r2, radial_bins)?;
        plot_files(
            out,
            dir,
            manifest,
            Report::Radial {
                observable: obs,
                profile: &profile,
            },
            PlotKind::Radial,
        )?;
    }

    let median_of = |obs| {
        let mut v: Vec<f64> = observable_values(records, obs, r2).into_iter().map(|(_, v)| v).collect();
        (!v.is_empty()).then(|| crate::coherence::median(&mut v))
    };
    let summary = CoherenceSummary {
        qubits: records.len(),
        measured_t1: observable_values(records, Observable::T1, r2).len(),
        measured_t2e: observable_values(records, Observable::T2e, r2).len(),
        median_t1: median_of(Observable::T1),
        median_t2e: median_of(Observable::T2e),
        crossings,
    };
    out.add(dir.join("summary.json"), manifest.embed_json(serde_json::to_value(&summary)?)?);
    Ok(summary)
}

pub(crate) fn coherence(args: &CoherenceArgs, seed: Option<u64>) -> Result<()> {
    let mut mb = ManifestBuilder::new("coherence");
    mb.file(&args.wafer)?;
    if let Some(d) = &args.decays {
        mb.file(d)?;
    }
    let records = load_coherence_data(&args.wafer, args.decays.as_deref(), args.wafer_radius)?;
    mb.options(args)?;
    let seed = resolve_seed(seed);
    let manifest = mb.finish(Some(seed));
    let mut out = Outputs::default();
    let s = coherence_outputs(
        &records,
        args.r2,
        &args.bootstrap.clone().unwrap_or_default(),
        &args.pearson.clone().unwrap_or_default(),
        args.radial_bins,
        seed,
        &manifest,
        &args.report,
        &mut out,
    )?;
    eprintln!(
        "{} qubits, {} with T1, median T1 {:.1} us",
        s.qubits,
        s.measured_t1,
        s.median_t1.unwrap_or(f64::NAN) * 1e6
    );
    finish(out)
}

#[derive(Debug, Serialize)]
struct ThermalJson<'a> {
    payload: &'a str,
    stages: &'a LoadReport,
    mxc_budget_w: f64,
    headroom: Headroom,
}

pub(crate) fn render_thermal(
    payload: &Payload,
    report: &LoadReport,
    format: Format,
    manifest: &RunManifest,
) -> Result<String> {
    match format {
        Format::Csv => Ok(manifest.embed_csv(&load_report_csv(report)?)),
        Format::Json => manifest.embed_json(serde_json::to_value(ThermalJson {
            payload: &payload.name,
            stages: report,
            mxc_budget_w: payload.mxc_budget,
            headroom: headroom(report, payload.mxc_budget),
        })?),
    }
}

pub(crate) fn load_payload(path: Option<&Path>, preset: Option<&str>, mb: &mut ManifestBuilder) -> Result<Payload> {
    match (path, preset) {
        (Some(p), _) => {
            mb.file(p)?;
            Payload::load(p)
        }
        (None, Some(name)) => {
            let text = Payload::preset_text(name).ok_or_else(|| Error::Unknown {
                kind: "payload preset",
                name: name.to_string(),
            })?;
            mb.text(&format!("preset:{name}"), text);
            Payload::preset(name)
        }
        (None, None) => Err(Error::invalid("thermal", "need a payload file or a preset")),
    }
}

pub(crate) fn thermal(args: &ThermalArgs, seed: Option<u64>) -> Result<()> {
    let mut mb = ManifestBuilder::new("thermal");
    let payload = load_payload(args.payload.as_deref(), args.mode.as_deref(), &mut mb)?;
    mb.options(args)?;
    let manifest = mb.finish(seed);
    let report = evaluate_payload(&payload)?;
    let h = headroom(&report, payload.mxc_budget);
    eprintln!(
        "{}: MXC load {:.4e} W, {:.1}% of budget{}",
        payload.name,
        report.stage(crate::thermal::StageName::MXC).total(),
        100.0 * h.fraction,
        if h.flagged { " (over budget)" } else { "" }
    );
    emit_single(args.out.as_deref(), render_thermal(&payload, &report, args.report, &manifest)?)
}
