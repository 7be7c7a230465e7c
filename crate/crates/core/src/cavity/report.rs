use serde::Serialize;

use crate::cavity::modes::ModeSpectrum;
use crate::error::{Error, Result};
use crate::units::{parse_compact, Dimension};

/// A protected frequency band, e.g. the qubit or readout band.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Band {
    pub low: f64,
    pub high: f64,
    pub label: String,
}

impl Band {
    pub fn new(low: f64, high: f64, label: impl Into<String>) -> Result<Self> {
        if !(low.is_finite() && high.is_finite() && low < high) {
            return Err(Error::invalid("band", format!("need low < high, got {low}..{high}")));
        }
        Ok(Self {
            low,
            high,
            label: label.into(),
        })
    }

    pub fn contains(&self, f: f64) -> bool {
        f >= self.low && f <= self.high
    }
}

/// Parses `low:high[:label]` entries separated by commas, e.g.
/// `4GHz:6GHz:qubit,9.5GHz:10.5GHz:readout`. Values accept a unit suffix.
pub fn parse_bands(spec: &str) -> Result<Vec<Band>> {
    let freq = |s: &str| parse_compact(s, Dimension::Frequency);
    let mut bands = Vec::new();
    for (k, item) in spec.split(',').map(str::trim).filter(|s| !s.is_empty()).enumerate() {
        let parts: Vec<&str> = item.split(':').collect();
        if parts.len() < 2 || parts.len() > 3 {
            return Err(Error::invalid("band", format!("`{item}` is not low:high[:label]")));
        }
        let label = parts.get(2).map_or_else(|| format!("band_{}", k + 1), |s| s.trim().to_string());
        bands.push(Band::new(freq(parts[0])?, freq(parts[1])?, label)?);
    }
    Ok(bands)
}

#[derive(Debug, Clone, Serialize)]
pub struct ModeRow {
    pub index: usize,
    pub label: String,
    pub frequency_hz: f64,
    pub group: usize,
    /// Band the mode falls in, if any.
    pub collision: Option<String>,
    /// True above the thin-cavity validity ceiling.
    pub above_ceiling: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct ModeReport {
    pub rows: Vec<ModeRow>,
    pub bands: Vec<Band>,
    pub collisions: usize,
    /// Fundamental minus the top of the highest band; negative when the
    /// fundamental sits below it. Absent when no bands are declared.
    pub clearance_hz: Option<f64>,
    pub validity_ceiling_hz: f64,
}

pub fn mode_report(spectrum: &ModeSpectrum, bands: &[Band]) -> Result<ModeReport> {
    if spectrum.modes.is_empty() {
        return Err(Error::Domain("mode report needs a non-empty spectrum".into()));
    }
    let mut sorted: Vec<&Band> = bands.iter().collect();
    sorted.sort_by(|a, b| a.low.total_cmp(&b.low));
    for w in sorted.windows(2) {
        if w[1].low < w[0].high {
            return Err(Error::invalid(
                "bands",
                format!("`{}` overlaps `{}`", w[0].label, w[1].label),
            ));
        }
    }
    let ceiling = spectrum.validity_ceiling();
    let rows: Vec<ModeRow> = spectrum
        .modes
        .iter()
        .enumerate()
        .map(|(k, m)| ModeRow {
            index: k + 1,
            label: m.label.clone(),
            frequency_hz: m.frequency,
            group: spectrum.groups[k],
            collision: bands.iter().find(|b| b.contains(m.frequency)).map(|b| b.label.clone()),
            above_ceiling: m.frequency > ceiling,
        })
        .collect();
    let collisions = rows.iter().filter(|r| r.collision.is_some()).count();
    let top = bands.iter().map(|b| b.high).fold(f64::NEG_INFINITY, f64::max);
    Ok(ModeReport {
        collisions,
        clearance_hz: (!bands.is_empty()).then(|| rows[0].frequency_hz - top),
        rows,
        bands: bands.to_vec(),
        validity_ceiling_hz: ceiling,
    })
}

impl ModeReport {
    /// Spectrum table: one row per mode with its band annotation.
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["index", "label", "frequency_hz", "group", "collision", "above_ceiling"])?;
        for r in &self.rows {
            w.write_record([
                r.index.to_string(),
                r.label.clone(),
                format!("{:e}", r.frequency_hz),
                r.group.to_string(),
                r.collision.clone().unwrap_or_default(),
                r.above_ceiling.to_string(),
            ])?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Domain(e.to_string()))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_band_specs() {
        let b = parse_bands("4GHz:6GHz:qubit, 9.5e9:10.5e9").unwrap();
        assert_eq!(b.len(), 2);
        assert_eq!(b[0].label, "qubit");
        assert!((b[0].low - 4e9).abs() < 1e-3);
        assert!((b[1].high - 10.5e9).abs() < 1e-3);
        assert_eq!(b[1].label, "band_2");
        assert!(parse_bands("6GHz:4GHz").is_err());
        assert!(parse_bands("").unwrap().is_empty());
    }
}
