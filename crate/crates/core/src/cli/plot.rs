//! Plot-ready CSV tables, one schema per figure kind.
//!
//! | kind          | columns |
//! |---------------|---------|
//! | `spectrum`    | mode_index, frequency_ghz, group, band, above_ceiling |
//! | `loss`        | kind, label, q_limit, loss_fraction |
//! | `readout`     | qubit_id, measured_pct, thermal_pct, overlap_pct, decay_pct, residual_pct, t_eff_mk |
//! | `histogram`   | quantity, low, high, count (coherence times in µs) |
//! | `wafer_map`   | per-qubit medians and frequency errors by position |
//! | `bootstrap`   | statistic, size, confidence_pct, relative_error_pct, low, high |
//! | `correlation` | observable, distance_low_mm, distance_high_mm, distance_mid_mm, pairs, correlation, band_low, band_high |
//! | `radial`      | quantity, kind, r_low_m, r_high_m, value, count |
//! | `thermal`     | stage, passive_w, active_dissipative_w, temperature_mk |

use std::fmt;
use std::str::FromStr;

use crate::cavity::ModeReport;
use crate::coherence::{
    histogram_csv, radial_csv, wafer_summary_csv, BootstrapResult, CoherenceKind, Observable, QubitRecord,
    RadialProfile, SpatialCorrelation,
};
use crate::error::{csv_to_string, Error, Result};
use crate::loss::QBudget;
use crate::readout::{EffectiveTemperature, QubitReadout};
use crate::thermal::LoadReport;

const HISTOGRAM_BINS: usize = 20;

/// A computed report that plot data can be drawn from.
#[derive(Debug, Clone, Copy)]
pub enum Report<'a> {
    Spectrum(&'a ModeReport),
    Loss(&'a QBudget),
    Readout(&'a [QubitReadout]),
    Wafer { records: &'a [QubitRecord], r2_threshold: f64 },
    Bootstrap(&'a BootstrapResult),
    Correlation(&'a SpatialCorrelation),
    Radial { observable: Observable, profile: &'a RadialProfile },
    Thermal(&'a LoadReport),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlotKind {
    Spectrum,
    Loss,
    Readout,
    Histogram,
    WaferMap,
    Bootstrap,
    Correlation,
    Radial,
    Thermal,
}

impl PlotKind {
    pub const ALL: [PlotKind; 9] = [
        PlotKind::Spectrum,
        PlotKind::Loss,
        PlotKind::Readout,
        PlotKind::Histogram,
        PlotKind::WaferMap,
        PlotKind::Bootstrap,
        PlotKind::Correlation,
        PlotKind::Radial,
        PlotKind::Thermal,
    ];

    fn name(self) -> &'static str {
        match self {
            PlotKind::Spectrum => "spectrum",
            PlotKind::Loss => "loss",
            PlotKind::Readout => "readout",
            PlotKind::Histogram => "histogram",
            PlotKind::WaferMap => "wafer_map",
            PlotKind::Bootstrap => "bootstrap",
            PlotKind::Correlation => "correlation",
            PlotKind::Radial => "radial",
            PlotKind::Thermal => "thermal",
        }
    }
}

impl fmt::Display for PlotKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for PlotKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        PlotKind::ALL.into_iter().find(|k| k.name() == s).ok_or_else(|| Error::Unknown {
            kind: "plot kind",
            name: s.to_string(),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PlotFile {
    /// Suggested file name, e.g. `plot_bootstrap_median.csv`.
    pub name: String,
    pub csv: String,
}

fn num(v: f64) -> String {
    if v.is_infinite() {
        "inf".into()
    } else {
        format!("{v:e}")
    }
}

fn opt(v: Option<f64>) -> String {
    v.map_or(String::new(), num)
}

pub fn emit_plot_data(report: &Report<'_>, kind: PlotKind) -> Result<Vec<PlotFile>> {
    let file = |name: String, csv: String| Ok(vec![PlotFile { name, csv }]);
    match (*report, kind) {
        (Report::Spectrum(r), PlotKind::Spectrum) => file("plot_spectrum.csv".into(), spectrum(r)?),
        (Report::Loss(b), PlotKind::Loss) => file("plot_loss.csv".into(), loss(b)?),
        (Report::Readout(rows), PlotKind::Readout) => file("plot_readout.csv".into(), readout(rows)?),
        (Report::Wafer { records, r2_threshold }, PlotKind::Histogram) => [CoherenceKind::T1, CoherenceKind::T2e]
            .into_iter()
            .filter_map(|k| {
                let obs = if k == CoherenceKind::T1 { Observable::T1 } else { Observable::T2e };
                let us: Vec<f64> = crate::coherence::observable_values(records, obs, r2_threshold)
                    .into_iter()
                    .map(|(_, v)| v * 1e6)
                    .collect();
                (!us.is_empty()).then(|| {
                    Ok(PlotFile {
                        name: format!("plot_histogram_{k}.csv"),
                        csv: histogram_csv(&format!("{k}_us"), &us, HISTOGRAM_BINS)?,
                    })
                })
            })
            .collect(),
        (Report::Wafer { records, r2_threshold }, PlotKind::WaferMap) => {
            file("plot_wafer_map.csv".into(), wafer_summary_csv(records, r2_threshold)?)
        }
        (Report::Bootstrap(b), PlotKind::Bootstrap) => file(format!("plot_bootstrap_{}.csv", b.statistic), bootstrap(b)?),
        (Report::Correlation(c), PlotKind::Correlation) => {
            let name = c.observable.map_or("values".to_string(), |o| o.to_string());
            file(format!("plot_correlation_{name}.csv"), correlation(c)?)
        }
        (Report::Radial { observable, profile }, PlotKind::Radial) => {
            file(format!("plot_radial_{observable}.csv"), radial_csv(&observable.to_string(), profile)?)
        }
        (Report::Thermal(r), PlotKind::Thermal) => file("plot_thermal.csv".into(), thermal(r)?),
        (_, kind) => Err(Error::invalid("plot kind", format!("`{kind}` does not apply to this report"))),
    }
}

fn spectrum(r: &ModeReport) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["mode_index", "frequency_ghz", "group", "band", "above_ceiling"])?;
    for row in &r.rows {
        w.write_record([
            row.index.to_string(),
            num(row.frequency_hz / 1e9),
            row.group.to_string(),
            row.collision.clone().unwrap_or_default(),
            row.above_ceiling.to_string(),
        ])?;
    }
    csv_to_string(w)
}

fn loss(b: &QBudget) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["kind", "label", "q_limit", "loss_fraction"])?;
    let total_rate = 1.0 / b.total_q;
    for e in &b.channels {
        let rate = 1.0 / e.q_limit;
        let share = if total_rate > 0.0 { rate / total_rate } else { 0.0 };
        w.write_record([e.channel.kind.key(), &e.channel.label, &num(e.q_limit), &num(share)])?;
    }
    csv_to_string(w)
}

fn readout(rows: &[QubitReadout]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([
        "qubit_id",
        "measured_pct",
        "thermal_pct",
        "overlap_pct",
        "decay_pct",
        "residual_pct",
        "t_eff_mk",
    ])?;
    for r in rows {
        let b = &r.budget;
        let t = match r.effective_temperature {
            Some(EffectiveTemperature::Kelvin(t)) => num(t * 1e3),
            _ => String::new(),
        };
        let mut rec = vec![r.qubit_id.clone()];
        rec.extend([b.measured_error, b.thermal, b.overlap, b.decay, b.residual].map(|v| num(100.0 * v)));
        rec.push(t);
        w.write_record(&rec)?;
    }
    csv_to_string(w)
}

fn bootstrap(b: &BootstrapResult) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["statistic", "size", "confidence_pct", "relative_error_pct", "low", "high"])?;
    for (size, bands) in b.sizes.iter().zip(&b.bands) {
        for band in bands {
            w.write_record([
                b.statistic.to_string(),
                size.to_string(),
                num(100.0 * band.confidence),
                num(100.0 * band.relative_error),
                num(band.low),
                num(band.high),
            ])?;
        }
    }
    csv_to_string(w)
}

fn correlation(c: &SpatialCorrelation) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([
        "observable",
        "distance_low_mm",
        "distance_high_mm",
        "distance_mid_mm",
        "pairs",
        "correlation",
        "band_low",
        "band_high",
    ])?;
    let name = c.observable.map_or(String::new(), |o| o.to_string());
    for bin in &c.bins {
        w.write_record([
            name.clone(),
            num(bin.low * 1e3),
            num(bin.high * 1e3),
            num(0.5 * (bin.low + bin.high) * 1e3),
            bin.pairs.to_string(),
            opt(bin.value),
            opt(bin.band.map(|b| b.0)),
            opt(bin.band.map(|b| b.1)),
        ])?;
    }
    csv_to_string(w)
}

fn thermal(r: &LoadReport) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["stage", "passive_w", "active_dissipative_w", "temperature_mk"])?;
    for s in &r.stages {
        w.write_record([
            s.stage.to_string(),
            num(s.passive),
            num(s.active + s.dissipative),
            opt(s.temperature.map(|t| t * 1e3)),
        ])?;
    }
    csv_to_string(w)
}
