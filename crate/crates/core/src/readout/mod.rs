//! Single-shot readout: projection, double-Gaussian fits, readout error
//! budgets and effective qubit temperature.

mod budget;
mod dataset;
mod fit;
mod projection;
mod report;
mod synth;

pub use budget::{
    effective_temperature, error_budget, optimal_threshold, overlap_error, readout_error, readout_error_at,
    temperature_from_ratio, BudgetOptions, EffectiveTemperature, ReadoutBudget,
};
pub use dataset::{load_shots, sidecar_path, write_shots, write_sidecar, IQDataset, Prepared, Shot, MIN_SHOTS};
pub use fit::{fit_double_gaussian, histogram, histogram_edges, DoubleGaussianFit};
pub use projection::{project_shots, Projected};
pub use report::{analyze_readout, readout_csv, QubitReadout};
pub use synth::{synth_shots, SynthTruth};
