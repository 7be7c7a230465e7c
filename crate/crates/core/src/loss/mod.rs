//! Packaging loss budget: participation ratios, seam admittances, per-channel
//! Q limits and the packaging-limited T₁.

mod budget;
mod channels_file;
mod participation;
mod report;

pub use budget::{
    assemble_budget, q_from_channel, seam_bound_from_t1, t1_bound, t1_from_q, BudgetEntry, LossChannel, LossKind,
    QBudget, Unbudgeted,
};
pub use channels_file::{evaluate_channels, load_channels, parse_channels, ChannelDecl};
pub use participation::{
    conductor_participation, dielectric_participation, seam_admittance, surface_dielectric_participation,
    surface_participation_with, SeamPath, SurfaceConvention,
};
pub use report::{budget_to_csv, budget_to_json};
