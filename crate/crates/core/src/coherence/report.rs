//! Plot-ready CSV tables. Missing values are empty fields.

use crate::coherence::bootstrap::BootstrapResult;
use crate::coherence::record::{qubit_median, CoherenceKind, QubitRecord};
use crate::coherence::spatial::{RadialProfile, SpatialCorrelation};
use crate::error::{csv_to_string, Error, Result};

fn num(v: f64) -> String {
    format!("{v:e}")
}

fn opt(v: Option<f64>) -> String {
    v.map_or(String::new(), num)
}

/// One row per qubit with medians, accept counts and frequency errors;
/// unmeasured qubits keep their position with empty values.
pub fn wafer_summary_csv(records: &[QubitRecord], r2_threshold: f64) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([
        "qubit_id",
        "x_m",
        "y_m",
        "r_m",
        "t1_s",
        "t1_accepted",
        "t1_total",
        "t2e_s",
        "t2e_accepted",
        "t2e_total",
        "qubit_freq_error_hz",
        "resonator_freq_error_hz",
    ])?;
    for r in records {
        let t1 = qubit_median(r, CoherenceKind::T1, r2_threshold);
        let t2 = qubit_median(r, CoherenceKind::T2e, r2_threshold);
        w.write_record([
            r.qubit_id.clone(),
            num(r.position.x),
            num(r.position.y),
            num(r.position.norm()),
            opt(t1.median),
            t1.accepted.to_string(),
            t1.total.to_string(),
            opt(t2.median),
            t2.accepted.to_string(),
            t2.total.to_string(),
            opt(r.measured_frequency.map(|f| f - r.design_frequency)),
            opt(r.resonator_measured_frequency.map(|f| f - r.resonator_design_frequency)),
        ])?;
    }
    csv_to_string(w)
}

/// Equal-width histogram between the smallest and largest value.
pub fn histogram_csv(quantity: &str, values: &[f64], bins: usize) -> Result<String> {
    if values.is_empty() || bins == 0 {
        return Err(Error::Domain(format!("histogram of {quantity}: no values or no bins")));
    }
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let width = if hi > lo { (hi - lo) / bins as f64 } else { 1.0 };
    let mut counts = vec![0usize; bins];
    for v in values {
        counts[(((v - lo) / width) as usize).min(bins - 1)] += 1;
    }
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["quantity", "low", "high", "count"])?;
    for (b, c) in counts.iter().enumerate() {
        w.write_record([
            quantity.to_string(),
            num(lo + b as f64 * width),
            num(lo + (b + 1) as f64 * width),
            c.to_string(),
        ])?;
    }
    csv_to_string(w)
}

pub fn bootstrap_csv(result: &BootstrapResult) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["statistic", "size", "mean", "confidence", "low", "high", "relative_error", "full_value"])?;
    for ((size, mean), bands) in result.sizes.iter().zip(&result.mean_estimate).zip(&result.bands) {
        for b in bands {
            w.write_record([
                result.statistic.to_string(),
                size.to_string(),
                num(*mean),
                num(b.confidence),
                num(b.low),
                num(b.high),
                num(b.relative_error),
                num(result.full_value),
            ])?;
        }
    }
    csv_to_string(w)
}

pub fn correlation_csv(c: &SpatialCorrelation) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["observable", "low_m", "high_m", "pairs", "correlation", "band_low", "band_high"])?;
    let name = c.observable.map_or(String::new(), |o| o.to_string());
    for b in &c.bins {
        w.write_record([
            name.clone(),
            num(b.low),
            num(b.high),
            b.pairs.to_string(),
            opt(b.value),
            opt(b.band.map(|x| x.0)),
            opt(b.band.map(|x| x.1)),
        ])?;
    }
    csv_to_string(w)
}

/// Scatter rows (`point`) followed by ring medians (`bin`).
pub fn radial_csv(quantity: &str, p: &RadialProfile) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["quantity", "kind", "r_low_m", "r_high_m", "value", "count"])?;
    for &(r, v) in &p.points {
        w.write_record([quantity.into(), "point".into(), num(r), num(r), num(v), "1".into()])?;
    }
    for b in &p.bins {
        w.write_record([
            quantity.into(),
            "bin".into(),
            num(b.low),
            num(b.high),
            opt(b.median),
            b.count.to_string(),
        ])?;
    }
    csv_to_string(w)
}
