use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{MaterialTable, Property};
use crate::units::MU0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LossKind {
    BulkDielectric,
    SurfaceDielectric,
    Conductor,
    Seam,
}

impl LossKind {
    pub fn key(self) -> &'static str {
        match self {
            LossKind::BulkDielectric => "bulk_dielectric",
            LossKind::SurfaceDielectric => "surface_dielectric",
            LossKind::Conductor => "conductor",
            LossKind::Seam => "seam",
        }
    }
}

impl fmt::Display for LossKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.key())
    }
}

impl FromStr for LossKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        [
            LossKind::BulkDielectric,
            LossKind::SurfaceDielectric,
            LossKind::Conductor,
            LossKind::Seam,
        ]
        .into_iter()
        .find(|k| k.key() == s)
        .ok_or_else(|| Error::Unknown {
            kind: "loss channel kind",
            name: s.to_string(),
        })
    }
}

/// One loss mechanism. `value` is a participation ratio for dielectric and
/// conductor kinds and a seam admittance (Ω⁻¹·m⁻¹) for seams.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LossChannel {
    pub kind: LossKind,
    pub label: String,
    pub value: f64,
    pub material: String,
}

impl LossChannel {
    pub fn new(kind: LossKind, label: impl Into<String>, value: f64, material: impl Into<String>) -> Result<Self> {
        let ok = match kind {
            LossKind::BulkDielectric | LossKind::SurfaceDielectric => (0.0..=1.0).contains(&value),
            LossKind::Conductor | LossKind::Seam => value >= 0.0 && value.is_finite(),
        };
        if !ok {
            return Err(Error::invalid("loss channel", format!("{kind} value {value} out of range")));
        }
        Ok(Self {
            kind,
            label: label.into(),
            value,
            material: material.into(),
        })
    }
}

fn omega(frequency: f64) -> Result<f64> {
    if !(frequency > 0.0 && frequency.is_finite()) {
        return Err(Error::invalid("frequency", format!("{frequency} Hz")));
    }
    Ok(2.0 * PI * frequency)
}

/// Quality-factor limit of a single channel. A zero participation or loss
/// rate gives an infinite Q.
///
/// Conductors use Q = ωμ₀λ/(R_s·p_cond), so Q falls as the surface
/// resistance grows.
pub fn q_from_channel(channel: &LossChannel, materials: &MaterialTable, frequency: f64) -> Result<f64> {
    let w = omega(frequency)?;
    let m = channel.material.as_str();
    let p = channel.value;
    let q = match channel.kind {
        LossKind::BulkDielectric | LossKind::SurfaceDielectric => 1.0 / (p * materials.get(m, Property::LossTangent)?),
        LossKind::Conductor => {
            let lambda = materials.get(m, Property::PenetrationDepth)?;
            let rs = materials.get(m, Property::SurfaceResistance)?;
            w * MU0 * lambda / (rs * p)
        }
        LossKind::Seam => materials.get(m, Property::SeamConductance)? / p,
    };
    Ok(if q.is_nan() { f64::INFINITY } else { q })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BudgetEntry {
    pub channel: LossChannel,
    pub q_limit: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Unbudgeted {
    pub channel: LossChannel,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QBudget {
    pub channels: Vec<BudgetEntry>,
    /// Channels whose material has no loss rate; carried, not summed.
    pub unbudgeted: Vec<Unbudgeted>,
    pub total_q: f64,
    pub t1_limit: f64,
    pub frequency: f64,
}

/// Q = ωT₁ ⇒ T₁ = Q/ω.
pub fn t1_from_q(q: f64, frequency: f64) -> Result<f64> {
    Ok(q / omega(frequency)?)
}

/// Sums inverse Q over the budgeted channels.
pub fn assemble_budget(channels: &[LossChannel], materials: &MaterialTable, frequency: f64) -> Result<QBudget> {
    if channels.is_empty() {
        return Err(Error::invalid("loss budget", "no channels"));
    }
    let w = omega(frequency)?;
    let mut entries = Vec::new();
    let mut unbudgeted = Vec::new();
    for ch in channels {
        match q_from_channel(ch, materials, frequency) {
            Ok(q) => entries.push(BudgetEntry {
                channel: ch.clone(),
                q_limit: q,
            }),
            Err(e @ Error::PropertyAbsent { .. }) => unbudgeted.push(Unbudgeted {
                channel: ch.clone(),
                reason: e.to_string(),
            }),
            Err(e) => return Err(e),
        }
    }
    let inverse: f64 = entries.iter().map(|e| 1.0 / e.q_limit).sum();
    let total_q = 1.0 / inverse;
    Ok(QBudget {
        channels: entries,
        unbudgeted,
        total_q,
        t1_limit: total_q / w,
        frequency,
    })
}

/// Smallest seam conductance for which the seam alone still allows the
/// observed T₁: g_min = y_seam·ω·T₁.
pub fn seam_bound_from_t1(t1: f64, frequency: f64, y_seam: f64) -> Result<f64> {
    for (name, v) in [("t1", t1), ("frequency", frequency), ("y_seam", y_seam)] {
        if !(v > 0.0 && v.is_finite()) {
            return Err(Error::invalid("seam bound input", format!("{name} = {v} must be > 0")));
        }
    }
    Ok(y_seam * omega(frequency)? * t1)
}

/// Packaging T₁ limit at each frequency for fixed channel participations.
pub fn t1_bound(frequencies: &[f64], channels: &[LossChannel], materials: &MaterialTable) -> Result<Vec<(f64, f64)>> {
    if frequencies.is_empty() {
        return Err(Error::invalid("frequency list", "empty"));
    }
    frequencies
        .iter()
        .map(|&f| assemble_budget(channels, materials, f).map(|b| (f, b.t1_limit)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table() -> MaterialTable {
        MaterialTable::bundled()
    }

    #[test]
    fn rogers_full_participation() {
        let ch = LossChannel::new(LossKind::BulkDielectric, "pcb", 1.0, "Rogers").unwrap();
        let q = q_from_channel(&ch, &table(), 4.5e9).unwrap();
        assert!((q - 1.0 / 7e-4).abs() < 1e-9);
        assert!((q - 1428.571).abs() < 1e-3);
    }

    #[test]
    fn seam_unit_q() {
        let ch = LossChannel::new(LossKind::Seam, "side", 700.0, "Al/Al").unwrap();
        assert!((q_from_channel(&ch, &table(), 4.5e9).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn conductor_orientation() {
        let ch = LossChannel::new(LossKind::Conductor, "walls", 1e-9, "Al").unwrap();
        let q = q_from_channel(&ch, &table(), 4.5e9).unwrap();
        // independent evaluation: 2π·4.5e9 · 4πe-7 · 50e-9 / (3e-6 · 1e-9)
        let expected = 2.0 * PI * 4.5e9 * 1.256_637_062_12e-6 * 50e-9 / (3e-6 * 1e-9);
        assert!((q / expected - 1.0).abs() < 1e-12);
        assert!((q / 5.922e11 - 1.0).abs() < 1e-3);
    }

    #[test]
    fn missing_rate_is_unbudgeted() {
        let chans = vec![
            LossChannel::new(LossKind::Seam, "pillar_tops", 1e-3, "Al/In").unwrap(),
            LossChannel::new(LossKind::BulkDielectric, "pcb", 1e-3, "Rogers").unwrap(),
        ];
        let b = assemble_budget(&chans, &table(), 4.5e9).unwrap();
        assert_eq!(b.unbudgeted.len(), 1);
        assert_eq!(b.channels.len(), 1);
        assert!(q_from_channel(&chans[0], &table(), 4.5e9).is_err());
    }

    #[test]
    fn parallel_combination_and_t1() {
        let mut t = MaterialTable::new();
        t.insert("x", Property::LossTangent, 1e-6).unwrap();
        let ch = LossChannel::new(LossKind::BulkDielectric, "a", 1.0, "x").unwrap();
        let b = assemble_budget(&[ch.clone(), ch], &t, 4.5e9).unwrap();
        assert!((b.total_q - 5e5).abs() < 1e-6);
        assert!((b.t1_limit - 5e5 / (2.0 * PI * 4.5e9)).abs() < 1e-18);
        assert!(assemble_budget(&[], &t, 4.5e9).is_err());
    }

    #[test]
    fn reference_t1_pairs() {
        let t = t1_from_q(5e8, 4.5e9).unwrap();
        assert!((t - 17.68e-3).abs() < 0.01e-3);
        let t = t1_from_q(3.5e7, 4.5e9).unwrap();
        assert!((t - 1.238e-3).abs() < 0.001e-3);
    }

    #[test]
    fn seam_bound() {
        let g = seam_bound_from_t1(100e-6, 4.5e9, 3e3 / (2.0 * PI * 4.5e9 * 100e-6)).unwrap();
        assert!((g - 3e3).abs() < 1e-9);
        let y = 3e3 / (2.0 * PI * 4.5e9 * 100e-6);
        assert!((y - 1.061e-3).abs() < 1e-6);
        let g2 = seam_bound_from_t1(200e-6, 4.5e9, y).unwrap();
        assert!((g2 / g - 2.0).abs() < 1e-15);
        assert!(seam_bound_from_t1(0.0, 4.5e9, y).is_err());
    }

    #[test]
    fn t1_bound_inverse_frequency() {
        let mut t = MaterialTable::new();
        t.insert("x", Property::LossTangent, 1.0 / 2.8e6).unwrap();
        let ch = LossChannel::new(LossKind::BulkDielectric, "all", 1.0, "x").unwrap();
        let r = t1_bound(&[4.5e9, 9e9], std::slice::from_ref(&ch), &t).unwrap();
        assert!((r[0].1 - 99.03e-6).abs() < 0.01e-6);
        assert!((r[0].1 / r[1].1 - 2.0).abs() < 1e-12);
        assert!(t1_bound(&[], &[ch], &t).is_err());
    }
}
