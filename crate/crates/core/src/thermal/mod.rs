//! Dilution-refrigerator heat loads for a wiring payload, stage
//! temperatures from configured cooling curves, and differential thermal
//! contraction.

mod contraction;
mod loads;
mod payload;
mod report;
mod stage;

pub use contraction::{bundled_contraction, differential_contraction};
pub use loads::{
    aggregate_loads, dissipative_loads, evaluate_payload, headroom, headroom_from_load, line_budget, passive_loads,
    solve_temperatures, Headroom, LineBudget, LoadReport, PerStage, StageLoad,
};
pub use crate::units::dbm_to_watts;
pub use payload::{ActiveComponent, LineKind, LineSpec, Payload, PRESETS};
pub use report::{load_report_csv, load_report_json};
pub use stage::{CoolingCurve, Stage, StageName};
