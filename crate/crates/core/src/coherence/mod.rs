//! Coherence statistics: single-parameter decay fits, per-qubit medians,
//! subsample bootstrap of cohort statistics and wafer-scale spatial
//! correlation.

mod bootstrap;
mod decay;
mod io;
mod record;
mod report;
mod spatial;
mod stats;
mod synth;

pub use bootstrap::{bootstrap_statistic, BootstrapConfig, BootstrapResult, ConfidenceBand, Statistic};
pub use decay::{fit_decay, DecayCurve, DecayFit};
pub use io::{load_coherence_data, load_decays, load_wafer_map, parse_wafer_map, write_decays, write_wafer_map};
pub use record::{
    observable_values, qubit_median, CoherenceKind, Observable, QubitMedian, QubitRecord, DEFAULT_R2_THRESHOLD,
    DEFAULT_WAFER_RADIUS,
};
pub use report::{bootstrap_csv, correlation_csv, histogram_csv, radial_csv, wafer_summary_csv};
pub use spatial::{
    pearson_binned, pearson_spatial, radial_profile, radial_profile_of, CorrelationBin, PearsonConfig,
    RadialBin, RadialProfile, SpatialCorrelation,
};
pub use stats::median;
pub use synth::{lognormal_quantiles, synth_ensemble, EnsembleSpec};
