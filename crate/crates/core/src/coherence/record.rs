use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::coherence::decay::{fit_decay, DecayCurve};
use crate::coherence::stats::median;
use crate::error::{Error, Result};
use crate::field::Point2;

/// 3-inch wafer.
pub const DEFAULT_WAFER_RADIUS: f64 = 38.1e-3;
pub const DEFAULT_R2_THRESHOLD: f64 = 0.75;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QubitRecord {
    pub qubit_id: String,
    pub position: Point2,
    pub design_frequency: f64,
    pub measured_frequency: Option<f64>,
    pub resonator_design_frequency: f64,
    pub resonator_measured_frequency: Option<f64>,
    pub t1_samples: Vec<DecayCurve>,
    pub t2e_samples: Vec<DecayCurve>,
}

impl QubitRecord {
    pub fn validate(&self, wafer_radius: f64) -> Result<()> {
        if self.position.norm() > wafer_radius {
            return Err(Error::invalid(
                "qubit record",
                format!(
                    "{} at r = {:.3} mm lies outside the {:.3} mm wafer",
                    self.qubit_id,
                    self.position.norm() * 1e3,
                    wafer_radius * 1e3
                ),
            ));
        }
        for c in self.t1_samples.iter().chain(&self.t2e_samples) {
            c.validate()?;
        }
        Ok(())
    }

    pub fn samples(&self, kind: CoherenceKind) -> &[DecayCurve] {
        match kind {
            CoherenceKind::T1 => &self.t1_samples,
            CoherenceKind::T2e => &self.t2e_samples,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CoherenceKind {
    T1,
    T2e,
}

impl fmt::Display for CoherenceKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CoherenceKind::T1 => "t1",
            CoherenceKind::T2e => "t2e",
        })
    }
}

impl FromStr for CoherenceKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "t1" => Ok(CoherenceKind::T1),
            "t2e" => Ok(CoherenceKind::T2e),
            other => Err(Error::Unknown {
                kind: "coherence kind",
                name: other.into(),
            }),
        }
    }
}

/// Median of the accepted fits for one qubit. `median` is `None` when no fit
/// passed the R² filter (an unmeasured qubit).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QubitMedian {
    pub median: Option<f64>,
    pub accepted: usize,
    pub total: usize,
}

/// Fits every curve of one kind and takes the median of fits with R² above
/// the threshold. Curves that fail to fit count as rejected.
pub fn qubit_median(record: &QubitRecord, kind: CoherenceKind, r2_threshold: f64) -> QubitMedian {
    let samples = record.samples(kind);
    let mut taus: Vec<f64> = samples
        .iter()
        .filter_map(|c| fit_decay(c).ok())
        .filter(|f| f.r_squared > r2_threshold)
        .map(|f| f.tau)
        .collect();
    QubitMedian {
        median: (!taus.is_empty()).then(|| median(&mut taus)),
        accepted: taus.len(),
        total: samples.len(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Observable {
    T1,
    T2e,
    QubitFreqError,
    ResonatorFreqError,
}

impl fmt::Display for Observable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Observable::T1 => "t1",
            Observable::T2e => "t2e",
            Observable::QubitFreqError => "qubit_freq_error",
            Observable::ResonatorFreqError => "resonator_freq_error",
        })
    }
}

impl FromStr for Observable {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "t1" => Ok(Observable::T1),
            "t2e" => Ok(Observable::T2e),
            "qubit_freq_error" => Ok(Observable::QubitFreqError),
            "resonator_freq_error" => Ok(Observable::ResonatorFreqError),
            other => Err(Error::Unknown {
                kind: "observable",
                name: other.into(),
            }),
        }
    }
}

/// Position and value of every qubit where the observable is measured.
/// Frequency errors are measured − design, Hz.
pub fn observable_values(records: &[QubitRecord], observable: Observable, r2_threshold: f64) -> Vec<(Point2, f64)> {
    records
        .iter()
        .filter_map(|r| {
            let v = match observable {
                Observable::T1 => qubit_median(r, CoherenceKind::T1, r2_threshold).median,
                Observable::T2e => qubit_median(r, CoherenceKind::T2e, r2_threshold).median,
                Observable::QubitFreqError => r.measured_frequency.map(|f| f - r.design_frequency),
                Observable::ResonatorFreqError => {
                    r.resonator_measured_frequency.map(|f| f - r.resonator_design_frequency)
                }
            };
            v.map(|v| (r.position, v))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn curve(tau: f64) -> DecayCurve {
        let delays: Vec<f64> = (0..12).map(|i| i as f64 * 20e-6).collect();
        let signal = delays.iter().map(|t| (-t / tau).exp()).collect();
        DecayCurve::new(delays, signal).unwrap()
    }

    fn record() -> QubitRecord {
        QubitRecord {
            qubit_id: "q".into(),
            position: Point2::origin(),
            design_frequency: 4.5e9,
            measured_frequency: None,
            resonator_design_frequency: 10e9,
            resonator_measured_frequency: Some(10.001e9),
            t1_samples: vec![curve(100e-6); 50],
            t2e_samples: vec![],
        }
    }

    #[test]
    fn identical_curves() {
        let m = qubit_median(&record(), CoherenceKind::T1, 0.75);
        assert!((m.median.unwrap() / 100e-6 - 1.0).abs() < 1e-12);
        assert_eq!((m.accepted, m.total), (50, 50));
    }

    #[test]
    fn garbage_is_filtered() {
        let mut r = record();
        r.t1_samples.truncate(49);
        let delays: Vec<f64> = (0..12).map(|i| i as f64 * 20e-6).collect();
        let garbage = (0..12).map(|i| if i % 2 == 0 { 0.9 } else { 0.1 }).collect();
        r.t1_samples.push(DecayCurve::new(delays, garbage).unwrap());
        let m = qubit_median(&r, CoherenceKind::T1, 0.75);
        assert_eq!((m.accepted, m.total), (49, 50));
    }

    #[test]
    fn unmeasured_and_observables() {
        let r = record();
        assert_eq!(qubit_median(&r, CoherenceKind::T2e, 0.75).median, None);
        let rs = [r];
        assert!(observable_values(&rs, Observable::T2e, 0.75).is_empty());
        assert!(observable_values(&rs, Observable::QubitFreqError, 0.75).is_empty());
        let v = observable_values(&rs, Observable::ResonatorFreqError, 0.75);
        assert!((v[0].1 - 1e6).abs() < 1e-3);
    }

    #[test]
    fn outside_wafer() {
        let mut r = record();
        r.position = Point2::new(0.04, 0.0).unwrap();
        assert!(r.validate(DEFAULT_WAFER_RADIUS).is_err());
    }
}
