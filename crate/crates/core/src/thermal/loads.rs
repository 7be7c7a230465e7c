use serde::Serialize;

use crate::error::{Error, Result};
use crate::thermal::payload::{ActiveComponent, LineSpec, Payload};
use crate::thermal::stage::{Stage, StageName};

pub type PerStage = [f64; 5];

/// Power flow along one line.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LineBudget {
    /// Power entering at room temperature, W.
    pub input: f64,
    pub delivered: f64,
    pub dissipated: PerStage,
}

/// Back-propagates the device power up the attenuator chain: an attenuator
/// of A dB passing P downstream receives P·10^(A/10) and keeps the rest.
pub fn line_budget(line: &LineSpec) -> Result<LineBudget> {
    line.validate()?;
    let mut dissipated = [0.0; 5];
    let mut p = line.signal_power_at_device;
    for s in StageName::ALL.into_iter().rev() {
        let a = line.attenuation_db.get(&s).copied().unwrap_or(0.0);
        let incoming = p * 10f64.powf(a / 10.0);
        dissipated[s.index()] = incoming - p;
        p = incoming;
    }
    Ok(LineBudget {
        input: p,
        delivered: line.signal_power_at_device,
        dissipated,
    })
}

pub fn dissipative_loads(lines: &[LineSpec]) -> Result<PerStage> {
    let mut out = [0.0; 5];
    for l in lines {
        let b = line_budget(l)?;
        for (o, d) in out.iter_mut().zip(b.dissipated) {
            *o += l.count as f64 * d;
        }
    }
    Ok(out)
}

pub fn passive_loads(lines: &[LineSpec], base: &std::collections::BTreeMap<StageName, f64>) -> PerStage {
    let mut out = [0.0; 5];
    for (s, w) in base {
        out[s.index()] += w;
    }
    for l in lines {
        for (s, w) in &l.passive_per_line {
            out[s.index()] += l.count as f64 * w;
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StageLoad {
    pub stage: StageName,
    pub passive: f64,
    pub active: f64,
    pub dissipative: f64,
    pub temperature: Option<f64>,
}

impl StageLoad {
    pub fn total(&self) -> f64 {
        self.passive + self.active + self.dissipative
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LoadReport {
    pub stages: Vec<StageLoad>,
}

impl LoadReport {
    pub fn stage(&self, name: StageName) -> &StageLoad {
        &self.stages[name.index()]
    }
}

pub fn aggregate_loads(
    lines: &[LineSpec],
    active: &[ActiveComponent],
    base_passive: &std::collections::BTreeMap<StageName, f64>,
) -> Result<LoadReport> {
    let passive = passive_loads(lines, base_passive);
    let dissipative = dissipative_loads(lines)?;
    let mut act = [0.0; 5];
    for a in active {
        if !(a.power >= 0.0) {
            return Err(Error::invalid("active component", format!("{}: {} W", a.label, a.power)));
        }
        act[a.stage.index()] += a.count as f64 * a.power;
    }
    Ok(LoadReport {
        stages: StageName::ALL
            .into_iter()
            .map(|s| StageLoad {
                stage: s,
                passive: passive[s.index()],
                active: act[s.index()],
                dissipative: dissipative[s.index()],
                temperature: None,
            })
            .collect(),
    })
}

/// Each stage on its own curve; no conduction between stages.
pub fn solve_temperatures(report: &LoadReport, stages: &[Stage]) -> Result<LoadReport> {
    let mut out = report.clone();
    for load in &mut out.stages {
        let stage = stages
            .iter()
            .find(|s| s.name == load.stage)
            .ok_or_else(|| Error::Unknown {
                kind: "stage",
                name: load.stage.to_string(),
            })?;
        let t = stage
            .cooling_curve
            .temperature_for(load.total())
            .map_err(|e| Error::Domain(format!("{}: {e}", load.stage)))?;
        load.temperature = Some(t);
    }
    Ok(out)
}

pub fn evaluate_payload(payload: &Payload) -> Result<LoadReport> {
    let loads = aggregate_loads(&payload.lines, &payload.active, &payload.base_passive)?;
    solve_temperatures(&loads, &payload.stages)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Headroom {
    /// MXC total load over the budget.
    pub fraction: f64,
    /// Load at or above the budget.
    pub flagged: bool,
}

pub fn headroom(report: &LoadReport, budget: f64) -> Headroom {
    headroom_from_load(report.stage(StageName::MXC).total(), budget)
}

pub fn headroom_from_load(load: f64, budget: f64) -> Headroom {
    let fraction = if budget > 0.0 { load / budget } else { f64::INFINITY };
    Headroom {
        fraction,
        flagged: fraction >= 1.0,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeMap;

    fn line(p: f64) -> LineSpec {
        LineSpec {
            label: "d".into(),
            kind: crate::thermal::LineKind::Drive,
            count: 1,
            attenuation_db: BTreeMap::from([(StageName::PT2, 20.0), (StageName::CLD, 20.0), (StageName::MXC, 20.0)]),
            budget_db: 60.0,
            passive_per_line: BTreeMap::new(),
            signal_power_at_device: p,
        }
    }

    #[test]
    fn sixty_db_line() {
        let b = line_budget(&line(1e-12)).unwrap();
        let total: f64 = b.dissipated.iter().sum();
        assert!((total / (1e-12 * (1e6 - 1.0)) - 1.0).abs() < 1e-12);
        assert!(((total + b.delivered) / b.input - 1.0).abs() < 1e-12);
        assert!((b.dissipated[StageName::MXC.index()] / (99e-12) - 1.0).abs() < 1e-12);
        assert_eq!(line_budget(&line(0.0)).unwrap().dissipated, [0.0; 5]);
    }

    #[test]
    fn headroom_values() {
        assert!((headroom_from_load(3e-6, 25e-6).fraction - 0.12).abs() < 1e-15);
        assert_eq!(headroom_from_load(0.0, 25e-6).fraction, 0.0);
        let h = headroom_from_load(25e-6, 25e-6);
        assert_eq!(h.fraction, 1.0);
        assert!(h.flagged);
    }

    #[test]
    fn empty_payload_is_zero() {
        let r = aggregate_loads(&[], &[], &BTreeMap::new()).unwrap();
        assert!(r.stages.iter().all(|s| s.total() == 0.0));
    }
}
