use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{read_to_string, Error, Result};
use crate::thermal::stage::{CoolingCurve, Stage, StageName};
use crate::units::dbm_to_watts;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LineKind {
    Drive,
    ReadoutIn,
    ReadoutOut,
    Pump,
}

impl fmt::Display for LineKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LineKind::Drive => "drive",
            LineKind::ReadoutIn => "readout_in",
            LineKind::ReadoutOut => "readout_out",
            LineKind::Pump => "pump",
        })
    }
}

impl FromStr for LineKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "drive" => Ok(LineKind::Drive),
            "readout_in" => Ok(LineKind::ReadoutIn),
            "readout_out" => Ok(LineKind::ReadoutOut),
            "pump" => Ok(LineKind::Pump),
            other => Err(Error::Unknown {
                kind: "line kind",
                name: other.into(),
            }),
        }
    }
}

/// A group of identical lines.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LineSpec {
    pub label: String,
    pub kind: LineKind,
    pub count: u32,
    /// Attenuator at each stage, dB.
    pub attenuation_db: BTreeMap<StageName, f64>,
    /// Declared total attenuation, dB; the schedule must sum to it.
    pub budget_db: f64,
    /// Conducted heat per line into each stage, W.
    pub passive_per_line: BTreeMap<StageName, f64>,
    /// Continuous-equivalent power per line at the device, W.
    pub signal_power_at_device: f64,
}

impl LineSpec {
    pub fn validate(&self) -> Result<()> {
        let ctx = |m: String| Error::invalid("line", format!("{}: {m}", self.label));
        if let Some((s, a)) = self.attenuation_db.iter().find(|(_, a)| !(**a >= 0.0 && a.is_finite())) {
            return Err(ctx(format!("attenuation {a} dB at {s}")));
        }
        let total: f64 = self.attenuation_db.values().sum();
        if (total - self.budget_db).abs() > 1e-9 * self.budget_db.abs().max(1.0) {
            return Err(ctx(format!(
                "attenuation schedule sums to {total} dB but the budget is {} dB",
                self.budget_db
            )));
        }
        if let Some((s, p)) = self.passive_per_line.iter().find(|(_, p)| !(**p >= 0.0 && p.is_finite())) {
            return Err(ctx(format!("passive load {p} W at {s}")));
        }
        if !(self.signal_power_at_device >= 0.0 && self.signal_power_at_device.is_finite()) {
            return Err(ctx(format!("signal power {} W", self.signal_power_at_device)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActiveComponent {
    pub stage: StageName,
    pub label: String,
    pub count: u32,
    /// Per unit, W.
    pub power: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Payload {
    pub name: String,
    pub stages: Vec<Stage>,
    pub lines: Vec<LineSpec>,
    pub active: Vec<ActiveComponent>,
    /// Mechanical supports and other non-wiring conduction, W per stage.
    pub base_passive: BTreeMap<StageName, f64>,
    /// MXC cooling power used for the headroom figure, W.
    pub mxc_budget: f64,
}

pub const PRESETS: [&str; 2] = ["qpu_mode", "high_throughput"];
const QPU_MODE: &str = include_str!("../../data/thermal/qpu_mode.toml");
const HIGH_THROUGHPUT: &str = include_str!("../../data/thermal/high_throughput.toml");

// file layout

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct StageFile {
    cooling: CoolingCurve,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct LineFile {
    label: String,
    kind: LineKind,
    count: u32,
    #[serde(default)]
    attenuation_db: BTreeMap<StageName, f64>,
    #[serde(default)]
    budget_db: Option<f64>,
    #[serde(default)]
    passive_w: BTreeMap<StageName, f64>,
    /// Per-tone power in dBm; `-inf` for an idle line.
    #[serde(default)]
    signal_dbm: Option<f64>,
    #[serde(default)]
    signal_w: Option<f64>,
    #[serde(default = "one")]
    tones: u32,
}

fn one() -> u32 {
    1
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ActiveFile {
    stage: StageName,
    label: String,
    #[serde(default = "one")]
    count: u32,
    power_w: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct PayloadFile {
    name: String,
    mxc_budget_w: f64,
    stages: BTreeMap<StageName, StageFile>,
    #[serde(default)]
    base_passive_w: BTreeMap<StageName, f64>,
    #[serde(default)]
    lines: Vec<LineFile>,
    #[serde(default)]
    active: Vec<ActiveFile>,
}

impl Payload {
    pub fn preset(name: &str) -> Result<Self> {
        match name {
            "qpu_mode" => Self::parse(QPU_MODE, "preset qpu_mode"),
            "high_throughput" => Self::parse(HIGH_THROUGHPUT, "preset high_throughput"),
            other => Err(Error::Unknown {
                kind: "thermal preset",
                name: other.into(),
            }),
        }
    }

    /// Source text of a bundled preset, for copying and editing.
    pub fn preset_text(name: &str) -> Option<&'static str> {
        match name {
            "qpu_mode" => Some(QPU_MODE),
            "high_throughput" => Some(HIGH_THROUGHPUT),
            _ => None,
        }
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&read_to_string(path)?, &path.display().to_string())
    }

    pub fn parse(text: &str, ctx: &str) -> Result<Self> {
        let file: PayloadFile = toml::from_str(text).map_err(|e| {
            let line = e.span().map_or(0, |s| text[..s.start].lines().count().max(1));
            Error::parse(ctx, line, e.message())
        })?;
        let mut stages = Vec::new();
        for name in StageName::ALL {
            let s = file
                .stages
                .get(&name)
                .ok_or_else(|| Error::parse(ctx, 0, format!("no cooling curve for stage {name}")))?;
            s.cooling.validate().map_err(|e| Error::parse(ctx, 0, format!("{name}: {e}")))?;
            stages.push(Stage {
                name,
                cooling_curve: s.cooling.clone(),
            });
        }
        let lines = file
            .lines
            .into_iter()
            .map(|l| {
                let per_tone = match (l.signal_dbm, l.signal_w) {
                    (Some(dbm), None) => dbm_to_watts(dbm),
                    (None, Some(w)) => w,
                    (None, None) => 0.0,
                    (Some(_), Some(_)) => {
                        return Err(Error::parse(ctx, 0, format!("line {}: give signal_dbm or signal_w", l.label)))
                    }
                };
                let spec = LineSpec {
                    budget_db: l.budget_db.unwrap_or_else(|| l.attenuation_db.values().sum()),
                    label: l.label,
                    kind: l.kind,
                    count: l.count,
                    attenuation_db: l.attenuation_db,
                    passive_per_line: l.passive_w,
                    signal_power_at_device: per_tone * l.tones as f64,
                };
                spec.validate()?;
                Ok(spec)
            })
            .collect::<Result<Vec<_>>>()?;
        let active = file
            .active
            .into_iter()
            .map(|a| {
                if !(a.power_w >= 0.0 && a.power_w.is_finite()) {
                    return Err(Error::parse(ctx, 0, format!("active {}: power {} W", a.label, a.power_w)));
                }
                Ok(ActiveComponent {
                    stage: a.stage,
                    label: a.label,
                    count: a.count,
                    power: a.power_w,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Payload {
            name: file.name,
            stages,
            lines,
            active,
            base_passive: file.base_passive_w,
            mxc_budget: file.mxc_budget_w,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_parse() {
        for p in PRESETS {
            let pl = Payload::preset(p).unwrap();
            assert_eq!(pl.stages.len(), 5);
            assert_eq!(pl.name, p);
        }
        assert!(Payload::preset("nope").is_err());
    }

    #[test]
    fn budget_mismatch_rejected() {
        let text = Payload::preset_text("qpu_mode").unwrap().replace("budget_db = 60", "budget_db = 61");
        assert!(Payload::parse(&text, "t").is_err());
    }

    #[test]
    fn unknown_stage_rejected() {
        let text = Payload::preset_text("qpu_mode").unwrap().replace("stage = \"PT2\"", "stage = \"PT3\"");
        assert!(Payload::parse(&text, "t").is_err());
    }

    #[test]
    fn dbm() {
        assert!((dbm_to_watts(-78.0) - 1.584_893e-11).abs() < 1e-16);
        assert_eq!(dbm_to_watts(f64::NEG_INFINITY), 0.0);
    }
}
