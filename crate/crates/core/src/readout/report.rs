//! Per-qubit analysis: projection, fit, budget and effective temperature.

use serde::Serialize;

use crate::error::{csv_to_string, Result};
use crate::readout::budget::{effective_temperature, error_budget, BudgetOptions, EffectiveTemperature, ReadoutBudget};
use crate::readout::dataset::{IQDataset, Prepared};
use crate::readout::fit::{fit_double_gaussian, DoubleGaussianFit};
use crate::readout::projection::project_shots;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QubitReadout {
    pub qubit_id: String,
    pub ground_shots: usize,
    pub excited_shots: usize,
    pub t1: f64,
    pub fit: DoubleGaussianFit,
    pub budget: ReadoutBudget,
    /// Absent when the populations do not describe a thermal state; see
    /// `temperature_note`.
    pub effective_temperature: Option<EffectiveTemperature>,
    pub temperature_note: Option<String>,
}

/// `t1` overrides the dataset's reference T₁.
pub fn analyze_readout(dataset: &IQDataset, t1: Option<f64>, options: BudgetOptions) -> Result<QubitReadout> {
    dataset.validate()?;
    let projected = project_shots(dataset)?;
    let fit = fit_double_gaussian(&projected)?;
    let budget = error_budget(dataset, &projected, &fit, t1, options)?;
    let (effective_temperature, temperature_note) = match effective_temperature(&fit, dataset.qubit_frequency) {
        Ok(t) => (Some(t), None),
        Err(e) => (None, Some(e.to_string())),
    };
    Ok(QubitReadout {
        qubit_id: dataset.qubit_id.clone(),
        ground_shots: dataset.count(Prepared::Ground),
        excited_shots: dataset.count(Prepared::Excited),
        t1: t1.or(dataset.t1_reference).unwrap_or(f64::NAN),
        fit,
        budget,
        effective_temperature,
        temperature_note,
    })
}

/// One row per qubit: the budget, T_eff (K, `below_floor` or `invalid`)
/// and the fitted model.
pub fn readout_csv(rows: &[QubitReadout]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([
        "qubit_id",
        "measured_error",
        "thermal",
        "overlap",
        "decay",
        "residual",
        "t_eff_k",
        "t1_s",
        "sigma_v",
        "center_g_v",
        "center_e_v",
        "a_gg",
        "a_ge",
        "a_eg",
        "a_ee",
        "reduced_chi2",
    ])?;
    for r in rows {
        let b = &r.budget;
        let t_eff = match r.effective_temperature {
            Some(EffectiveTemperature::Kelvin(t)) => format!("{t:e}"),
            Some(EffectiveTemperature::BelowFloor) => "below_floor".into(),
            None => "invalid".into(),
        };
        let f = &r.fit;
        let mut record = vec![r.qubit_id.clone()];
        record.extend([b.measured_error, b.thermal, b.overlap, b.decay, b.residual].map(|v| format!("{v:e}")));
        record.push(t_eff);
        record.extend(
            [r.t1, f.sigma, f.center_g, f.center_e, f.a_gg, f.a_ge, f.a_eg, f.a_ee, f.reduced_chi2].map(|v| format!("{v:e}")),
        );
        w.write_record(&record)?;
    }
    csv_to_string(w)
}
