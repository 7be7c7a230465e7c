use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc;

use crate::error::{Error, Result};
use crate::readout::dataset::IQDataset;
use crate::readout::fit::DoubleGaussianFit;
use crate::readout::projection::Projected;
use crate::units::{HBAR, K_B};

/// Average misassignment at the 0 V discriminator, counted on raw shots:
/// ½·(P(ground-prep > 0) + P(excited-prep < 0)).
pub fn readout_error(p: &Projected) -> Result<f64> {
    readout_error_at(p, 0.0)
}

pub fn readout_error_at(p: &Projected, threshold: f64) -> Result<f64> {
    if p.ground.is_empty() || p.excited.is_empty() {
        return Err(Error::Domain("readout error needs shots for both preparations".into()));
    }
    let g = p.ground.iter().filter(|&&x| x > threshold).count() as f64 / p.ground.len() as f64;
    let e = p.excited.iter().filter(|&&x| x < threshold).count() as f64 / p.excited.len() as f64;
    Ok(0.5 * (g + e))
}

/// Threshold minimising the averaged raw-shot error, with that error. Not
/// used for the 0 V budget; provided for comparison.
pub fn optimal_threshold(p: &Projected) -> Result<(f64, f64)> {
    if p.ground.is_empty() || p.excited.is_empty() {
        return Err(Error::Domain("readout error needs shots for both preparations".into()));
    }
    let mut g = p.ground.clone();
    let mut e = p.excited.clone();
    g.sort_by(f64::total_cmp);
    e.sort_by(f64::total_cmp);
    let (ng, ne) = (g.len() as f64, e.len() as f64);
    let mut candidates: Vec<f64> = g.iter().chain(&e).copied().collect();
    candidates.sort_by(f64::total_cmp);
    candidates.dedup();
    let mut best = (0.0, f64::INFINITY);
    for t in candidates {
        let g_above = g.len() - g.partition_point(|&x| x <= t);
        let e_below = e.partition_point(|&x| x < t);
        let err = 0.5 * (g_above as f64 / ng + e_below as f64 / ne);
        if err < best.1 {
            best = (t, err);
        }
    }
    Ok(best)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", content = "kelvin", rename_all = "snake_case")]
pub enum EffectiveTemperature {
    Kelvin(f64),
    /// No excited population resolved in the ground-prepared histogram.
    BelowFloor,
}

/// Boltzmann temperature of the ground-prepared populations:
/// T = ħω / (k_B·ln(a_gg/a_ge)).
pub fn effective_temperature(fit: &DoubleGaussianFit, qubit_frequency: f64) -> Result<EffectiveTemperature> {
    temperature_from_ratio(fit.a_gg, fit.a_ge, qubit_frequency)
}

pub fn temperature_from_ratio(a_gg: f64, a_ge: f64, qubit_frequency: f64) -> Result<EffectiveTemperature> {
    if !(a_gg > 0.0 && a_ge >= 0.0 && qubit_frequency > 0.0) {
        return Err(Error::invalid(
            "thermal populations",
            format!("need a_gg > 0, a_ge ≥ 0, f > 0 (got {a_gg}, {a_ge}, {qubit_frequency})"),
        ));
    }
    if a_ge == 0.0 {
        return Ok(EffectiveTemperature::BelowFloor);
    }
    if a_ge > a_gg {
        return Err(Error::Domain(format!(
            "population inversion (a_ge/a_gg = {:.4}); no positive temperature",
            a_ge / a_gg
        )));
    }
    if a_ge == a_gg {
        return Err(Error::Domain("equal populations: infinite temperature, invalid thermal state".into()));
    }
    let omega = 2.0 * std::f64::consts::PI * qubit_frequency;
    Ok(EffectiveTemperature::Kelvin(HBAR * omega / (K_B * (a_gg / a_ge).ln())))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BudgetOptions {
    /// Average the thermal term over both preparations (halve it), as is
    /// done for decay.
    pub halve_thermal: bool,
}

impl Default for BudgetOptions {
    fn default() -> Self {
        Self { halve_thermal: true }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ReadoutBudget {
    pub measured_error: f64,
    pub thermal: f64,
    pub overlap: f64,
    pub decay: f64,
    /// measured − (thermal + overlap + decay); may be negative.
    pub residual: f64,
}

/// ½·erfc(|Δc| / (2√2·σ)): mass of one Gaussian beyond the midpoint.
pub fn overlap_error(fit: &DoubleGaussianFit) -> f64 {
    0.5 * erfc((fit.center_e - fit.center_g).abs() / (2.0 * std::f64::consts::SQRT_2 * fit.sigma))
}

pub fn error_budget(
    dataset: &IQDataset,
    projected: &Projected,
    fit: &DoubleGaussianFit,
    t1: Option<f64>,
    options: BudgetOptions,
) -> Result<ReadoutBudget> {
    let t1 = t1
        .or(dataset.t1_reference)
        .ok_or_else(|| Error::Domain(format!("qubit {}: no T1 for the decay term", dataset.qubit_id)))?;
    if !(t1 > 0.0) {
        return Err(Error::invalid("t1", format!("{t1} s")));
    }
    let measured_error = readout_error(projected)?;
    let frac = fit.ground_excited_fraction();
    let thermal = if options.halve_thermal { 0.5 * frac } else { frac };
    let overlap = overlap_error(fit);
    let decay = dataset.readout_duration / (4.0 * t1);
    Ok(ReadoutBudget {
        measured_error,
        thermal,
        overlap,
        decay,
        residual: measured_error - (thermal + overlap + decay),
    })
}
